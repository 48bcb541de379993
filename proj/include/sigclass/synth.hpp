/**
 * @file synth.hpp
 * @brief Synthetic labeled observations: geometric labels from a scene, C/N0 drawn per class.
 *
 * Every random quantity comes from a stream keyed by what it describes, so the
 * output does not depend on iteration order:
 *   scene bias        <- (seed, "bias/<scene_id>")
 *   one C/N0 draw     <- (seed, "<scene_id>:<receiver_id>/<sat_id>/<epoch>")
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigclass/error.hpp"
#include "sigclass/geometry.hpp"
#include "sigclass/ingest.hpp"
#include "sigclass/io.hpp"
#include "sigclass/rng.hpp"
#include "sigclass/scene_io.hpp"
#include "sigclass/types.hpp"

namespace sigclass {

struct ClassCn0Params {
  double rhcp_mean{};
  double rhcp_elevation_gain{};  // added as gain * sin(elevation)
  double rhcp_stddev{};
  double rhcp_min{};
  double rhcp_max{};
  double diff_mean{};
  double diff_stddev{};
  double diff_min{};
  double diff_max{};

  friend bool operator==(const ClassCn0Params&, const ClassCn0Params&) = default;
};

struct Cn0Model {
  std::array<ClassCn0Params, kNumClasses> per_class{};
  double scene_bias_stddev_db{};

  [[nodiscard]] const ClassCn0Params& params(SignalClass c) const noexcept { return per_class[index_of(c)]; }

  void validate() const {
    if (!(scene_bias_stddev_db > 0.0)) throw InputError("Cn0Model: scene bias stddev must be > 0");
    for (auto c : kAllClasses) {
      const auto& p = params(c);
      const std::string who = "Cn0Model[" + std::string(label_name(c)) + "]: ";
      if (!(p.rhcp_stddev > 0.0) || !(p.diff_stddev > 0.0)) throw InputError(who + "stddevs must be > 0");
      if (!(p.rhcp_min <= p.rhcp_max) || !(p.diff_min <= p.diff_max)) throw InputError(who + "clamp bounds unordered");
    }
    if (!(params(SignalClass::LosOnly).diff_min > 0.0)) throw InputError("Cn0Model[LOS]: diff lower clamp must be > 0");
  }

  friend bool operator==(const Cn0Model&, const Cn0Model&) = default;
};

/**
 * Default calibration. LOS-only RHCP C/N0 stays inside 36-51 dB-Hz with a strictly
 * positive RHCP-LHCP difference; the multipath classes spread over 25-51 dB-Hz and
 * reach negative differences.
 */
[[nodiscard]] inline Cn0Model default_cn0_model() noexcept {
  Cn0Model m;
  m.per_class[index_of(SignalClass::LosOnly)] = {38.0, 9.0, 2.0, 36.0, 51.0, 7.0, 2.5, 0.5, 15.0};
  m.per_class[index_of(SignalClass::NlosOnly)] = {33.0, 0.0, 5.0, 25.0, 51.0, -1.0, 3.0, -10.0, 8.0};
  m.per_class[index_of(SignalClass::LosNlos)] = {40.0, 0.0, 5.0, 25.0, 51.0, 3.0, 4.0, -8.0, 14.0};
  m.scene_bias_stddev_db = 1.5;
  return m;
}

/// Starts from the defaults and overrides whichever fields the JSON names.
[[nodiscard]] inline Cn0Model cn0_model_from_json(const nlohmann::json& j) {
  Cn0Model m = default_cn0_model();
  try {
    if (j.contains("scene_bias_stddev_db")) m.scene_bias_stddev_db = j.at("scene_bias_stddev_db").get<double>();
    if (j.contains("classes")) {
      for (const auto& [name, jc] : j.at("classes").items()) {
        const auto cls = parse_label(name);
        if (!cls) throw InputError("Cn0Model: unknown class '" + name + "'");
        auto& p = m.per_class[index_of(*cls)];
        auto set = [&](const char* key, double& field) {
          if (jc.contains(key)) field = jc.at(key).get<double>();
        };
        set("rhcp_mean", p.rhcp_mean);
        set("rhcp_elevation_gain", p.rhcp_elevation_gain);
        set("rhcp_stddev", p.rhcp_stddev);
        set("rhcp_min", p.rhcp_min);
        set("rhcp_max", p.rhcp_max);
        set("diff_mean", p.diff_mean);
        set("diff_stddev", p.diff_stddev);
        set("diff_min", p.diff_min);
        set("diff_max", p.diff_max);
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("Cn0Model: ") + ex.what());
  }
  m.validate();
  return m;
}

[[nodiscard]] inline nlohmann::ordered_json cn0_model_to_json(const Cn0Model& m) {
  nlohmann::ordered_json j;
  j["scene_bias_stddev_db"] = m.scene_bias_stddev_db;
  for (auto c : kAllClasses) {
    const auto& p = m.params(c);
    j["classes"][std::string(label_name(c))] = {
        {"rhcp_mean", p.rhcp_mean}, {"rhcp_elevation_gain", p.rhcp_elevation_gain}, {"rhcp_stddev", p.rhcp_stddev},
        {"rhcp_min", p.rhcp_min},   {"rhcp_max", p.rhcp_max},                       {"diff_mean", p.diff_mean},
        {"diff_stddev", p.diff_stddev}, {"diff_min", p.diff_min},                   {"diff_max", p.diff_max}};
  }
  return j;
}

/// One simulated C/N0 pair, quantized to 0.01 dB-Hz like receiver logs.
struct Cn0Draw {
  double cn0_rhcp_dbhz{};
  double cn0_lhcp_dbhz{};
  double cn0_diff_dbhz{};  // exactly the quantized RHCP - LHCP value
};

namespace detail {
[[nodiscard]] inline double centi(double v) noexcept { return std::round(v * 100.0) / 100.0; }
}  // namespace detail

/// Draws RHCP C/N0 and RHCP-LHCP difference for one signal; consumes two normals from @p stream.
[[nodiscard]] inline Cn0Draw sample_cn0(const Cn0Model& model, SignalClass label, double elevation_deg,
                                        double scene_bias_db, SeedStream& stream) noexcept {
  const auto& p = model.params(label);
  const double rhcp_mean = p.rhcp_mean + p.rhcp_elevation_gain * std::sin(deg2rad(elevation_deg)) + scene_bias_db;
  const double rhcp = detail::centi(std::clamp(stream.normal(rhcp_mean, p.rhcp_stddev), p.rhcp_min, p.rhcp_max));
  const double diff =
      detail::centi(std::clamp(stream.normal(p.diff_mean + scene_bias_db, p.diff_stddev), p.diff_min, p.diff_max));
  return {rhcp, detail::centi(rhcp - diff), diff};
}

/// Per-scene additive C/N0 offset, fixed by (seed, scene_id).
[[nodiscard]] inline double scene_bias(const Cn0Model& model, const std::string& scene_id, std::uint64_t seed) noexcept {
  auto stream = SeedStream(seed).child("bias/" + scene_id);
  return stream.normal(0.0, model.scene_bias_stddev_db);
}

/// Provenance scene_id for a receiver: "<scene_id>:<receiver_id>".
[[nodiscard]] inline std::string receiver_key(const UrbanScene& scene, const Receiver& rx) {
  return scene.scene_id() + ":" + rx.id;
}

[[nodiscard]] inline std::string sample_stream_key(const std::string& receiver_key, const std::string& sat_id,
                                                   std::uint64_t epoch) {
  return receiver_key + "/" + sat_id + "/" + std::to_string(epoch);
}

struct EpochRange {
  std::uint64_t start{0};  // s of week, 1 Hz
  std::size_t count{1};
};

/**
 * Labels every (receiver, satellite) pair of every scene, skips no-signal pairs,
 * and emits one sample per epoch with C/N0 drawn under that scene's bias.
 * With a cap, the result is stratified-subsampled to exactly cap per class.
 *
 * Output order: scene, epoch, receiver, satellite.
 */
[[nodiscard]] inline Dataset generate_dataset(std::span<const UrbanScene> scenes, const Cn0Model& model,
                                              std::span<const SatelliteSpec> satellites, EpochRange epochs,
                                              std::optional<std::size_t> per_class_cap, std::uint64_t seed,
                                              std::string partition_tag = {}) {
  if (epochs.count < 1) throw InputError("generate_dataset: epochs must be >= 1");
  if (static_cast<double>(epochs.start + epochs.count) > kSecondsPerWeek) {
    throw InputError("generate_dataset: epochs run past the end of the GPS week");
  }
  model.validate();
  const SeedStream root(seed);

  std::vector<LabeledSample> samples;
  for (const auto& scene : scenes) {
    const double bias = scene_bias(model, scene.scene_id(), seed);
    struct Cell {
      std::string rx_key;
      const SatelliteSpec* sat;
      SignalClass label;
    };
    std::vector<Cell> cells;
    for (const auto& rx : scene.receivers()) {
      for (const auto& sat : satellites) {
        const auto truth = label_condition(scene, rx.position, direction_from_az_el(sat.azimuth_deg, sat.elevation_deg));
        if (truth) cells.push_back({receiver_key(scene, rx), &sat, *truth});
      }
    }
    for (std::size_t e = 0; e < epochs.count; ++e) {
      const std::uint64_t epoch = epochs.start + e;
      for (const auto& cell : cells) {
        auto stream = root.child(sample_stream_key(cell.rx_key, cell.sat->sat_id, epoch));
        const auto draw = sample_cn0(model, cell.label, cell.sat->elevation_deg, bias, stream);
        samples.push_back({{cell.sat->elevation_deg, draw.cn0_rhcp_dbhz, draw.cn0_diff_dbhz},
                           cell.label,
                           {cell.rx_key, static_cast<double>(epoch), cell.sat->sat_id, false}});
      }
    }
  }
  Dataset full(std::move(samples), std::move(partition_tag));
  if (!per_class_cap) return full;
  return stratified_subsample(full, *per_class_cap, seed);
}

// ---------------------------------------------------------------------------
// Multi-partition protocol (what `sigclass synth` runs).

struct PartitionSpec {
  std::string tag;
  std::vector<std::filesystem::path> scenes;
  std::vector<std::filesystem::path> satellites;  // one shared list, or one per scene
  EpochRange epochs;
  std::optional<std::size_t> per_class_cap;
};

struct SynthProtocol {
  std::uint64_t seed{42};
  Cn0Model model{default_cn0_model()};
  std::vector<PartitionSpec> partitions;
};

/// Relative paths in the config resolve against @p base_dir.
[[nodiscard]] inline SynthProtocol protocol_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  SynthProtocol p;
  try {
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("model")) p.model = cn0_model_from_json(j.at("model"));
    auto resolve = [&](const std::string& s) {
      std::filesystem::path path(s);
      return path.is_absolute() ? path : base_dir / path;
    };
    for (const auto& jp : j.at("partitions")) {
      PartitionSpec part;
      part.tag = jp.at("tag").get<std::string>();
      for (const auto& s : jp.at("scenes")) part.scenes.push_back(resolve(s.get<std::string>()));
      const auto& js = jp.at("satellites");
      if (js.is_array()) {
        for (const auto& s : js) part.satellites.push_back(resolve(s.get<std::string>()));
      } else {
        part.satellites.push_back(resolve(js.get<std::string>()));
      }
      if (part.satellites.size() != 1 && part.satellites.size() != part.scenes.size()) {
        throw InputError("synth config: partition " + part.tag + " needs one satellite list or one per scene");
      }
      part.epochs.start = jp.value("epoch_start", std::uint64_t{0});
      part.epochs.count = jp.at("epochs").get<std::size_t>();
      if (jp.contains("per_class_cap") && !jp.at("per_class_cap").is_null()) {
        part.per_class_cap = jp.at("per_class_cap").get<std::size_t>();
      }
      p.partitions.push_back(std::move(part));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("synth config: ") + ex.what());
  }
  if (p.partitions.empty()) throw InputError("synth config: no partitions");
  return p;
}

/// Generates each scene under its own sky, concatenates in scene order, then applies the cap.
[[nodiscard]] inline Dataset generate_partition(const PartitionSpec& part, const Cn0Model& model, std::uint64_t seed) {
  std::vector<LabeledSample> samples;
  for (std::size_t i = 0; i < part.scenes.size(); ++i) {
    const std::vector<UrbanScene> scene{parse_scene(read_file(part.scenes[i]))};
    const auto sats = parse_satellite_csv(read_file(part.satellites[part.satellites.size() == 1 ? 0 : i]));
    auto d = generate_dataset(scene, model, sats, part.epochs, std::nullopt, seed, part.tag);
    samples.insert(samples.end(), d.samples().begin(), d.samples().end());
  }
  Dataset full(std::move(samples), part.tag);
  if (!part.per_class_cap) return full;
  return stratified_subsample(full, *part.per_class_cap, seed);
}

}  // namespace sigclass
