/**
 * @file ingest.hpp
 * @brief Observation/channel/dataset CSV I/O, two-receiver stream pairing, dataset
 *        construction, stratified subsampling and the partition catalog.
 *
 * Formats (comma separated, no quoting, '.' decimal point, LF line endings):
 *   observation: epoch,sat_id,elevation_deg,azimuth_deg,cn0_rhcp_dbhz,cn0_lhcp_dbhz
 *   channel:     epoch,sat_id,elevation_deg,azimuth_deg,cn0_<pol>_dbhz
 *   dataset:     scene_id,epoch,sat_id,elevation_deg,cn0_rhcp_dbhz,cn0_diff_dbhz,label
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sigclass/csv.hpp"
#include "sigclass/error.hpp"
#include "sigclass/rng.hpp"
#include "sigclass/types.hpp"

namespace sigclass {

inline constexpr std::string_view kObservationHeader =
    "epoch,sat_id,elevation_deg,azimuth_deg,cn0_rhcp_dbhz,cn0_lhcp_dbhz";
inline constexpr std::string_view kDatasetHeader =
    "scene_id,epoch,sat_id,elevation_deg,cn0_rhcp_dbhz,cn0_diff_dbhz,label";

inline constexpr double kSecondsPerWeek = 604800.0;
inline constexpr double kDefaultMaxSkewS = 0.5;

enum class Polarization { Rhcp, Lhcp };

[[nodiscard]] inline std::string channel_header(Polarization pol) {
  return std::string("epoch,sat_id,elevation_deg,azimuth_deg,") +
         (pol == Polarization::Rhcp ? "cn0_rhcp_dbhz" : "cn0_lhcp_dbhz");
}

namespace detail {

/// Constellation letter followed by a 1-3 digit PRN.
[[nodiscard]] inline bool valid_sat_id(std::string_view s) noexcept {
  if (s.size() < 2 || s.size() > 4) return false;
  if (s[0] < 'A' || s[0] > 'Z') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct FieldReader {
  std::vector<std::string_view> fields;
  std::size_t line_no;

  [[nodiscard]] double number(std::size_t i, std::string_view name, double lo, double hi, bool hi_open) const {
    const auto v = csv::parse_double(fields[i]);
    if (!v) throw MalformedRow(line_no, "field " + std::string(name) + " is not a finite number");
    if (*v < lo || (hi_open ? *v >= hi : *v > hi)) throw RangeViolation(line_no, std::string(name));
    return *v;
  }
  [[nodiscard]] std::string sat_id(std::size_t i) const {
    if (!valid_sat_id(fields[i])) throw MalformedRow(line_no, "invalid sat_id '" + std::string(fields[i]) + "'");
    return std::string(fields[i]);
  }
};

/// Returns false for an empty document; throws if the header is wrong.
inline bool expect_header(csv::LineReader& reader, std::string_view header) {
  std::string_view line;
  if (!reader.next(line)) return false;
  if (line != header) throw MalformedRow(reader.line_no(), "expected header '" + std::string(header) + "'");
  return true;
}

template <typename F>
void for_each_row(csv::LineReader& reader, std::size_t width, F&& on_row) {
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    FieldReader row{csv::split(line), reader.line_no()};
    if (row.fields.size() != width) {
      throw MalformedRow(row.line_no, "expected " + std::to_string(width) + " fields, got " +
                                          std::to_string(row.fields.size()));
    }
    on_row(row);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Observation CSV

[[nodiscard]] inline std::vector<ObservationRecord> parse_observation_csv(std::string_view text) {
  std::vector<ObservationRecord> out;
  csv::LineReader reader(text);
  if (!detail::expect_header(reader, kObservationHeader)) return out;
  std::set<std::pair<double, std::string>> seen;
  detail::for_each_row(reader, 6, [&](const detail::FieldReader& row) {
    ObservationRecord r;
    r.epoch = row.number(0, "epoch", 0.0, kSecondsPerWeek, true);
    r.sat_id = row.sat_id(1);
    r.elevation_deg = row.number(2, "elevation_deg", 0.0, 90.0, false);
    r.azimuth_deg = row.number(3, "azimuth_deg", 0.0, 360.0, true);
    r.cn0_rhcp_dbhz = row.number(4, "cn0_rhcp_dbhz", 10.0, 60.0, false);
    r.cn0_lhcp_dbhz = row.number(5, "cn0_lhcp_dbhz", 10.0, 60.0, false);
    if (!seen.emplace(r.epoch, r.sat_id).second) throw DuplicateKey(r.epoch, r.sat_id);
    out.push_back(std::move(r));
  });
  return out;
}

[[nodiscard]] inline std::string write_observation_csv(std::span<const ObservationRecord> records) {
  std::string out(kObservationHeader);
  out += '\n';
  for (const auto& r : records) {
    out += csv::format_double(r.epoch) + ',' + r.sat_id + ',' + csv::format_double(r.elevation_deg) + ',' +
           csv::format_double(r.azimuth_deg) + ',' + csv::format_double(r.cn0_rhcp_dbhz) + ',' +
           csv::format_double(r.cn0_lhcp_dbhz) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channel CSV (one receiver, one polarization)

[[nodiscard]] inline std::vector<ChannelRecord> parse_channel_csv(std::string_view text, Polarization pol) {
  std::vector<ChannelRecord> out;
  csv::LineReader reader(text);
  const auto header = channel_header(pol);
  if (!detail::expect_header(reader, header)) return out;
  const std::string cn0_field = pol == Polarization::Rhcp ? "cn0_rhcp_dbhz" : "cn0_lhcp_dbhz";
  std::set<std::pair<double, std::string>> seen;
  detail::for_each_row(reader, 5, [&](const detail::FieldReader& row) {
    ChannelRecord r;
    r.epoch = row.number(0, "epoch", 0.0, kSecondsPerWeek, true);
    r.sat_id = row.sat_id(1);
    r.elevation_deg = row.number(2, "elevation_deg", 0.0, 90.0, false);
    r.azimuth_deg = row.number(3, "azimuth_deg", 0.0, 360.0, true);
    r.cn0_dbhz = row.number(4, cn0_field, 10.0, 60.0, false);
    if (!seen.emplace(r.epoch, r.sat_id).second) throw DuplicateKey(r.epoch, r.sat_id);
    out.push_back(std::move(r));
  });
  return out;
}

[[nodiscard]] inline std::string write_channel_csv(std::span<const ChannelRecord> records, Polarization pol) {
  std::string out = channel_header(pol) + '\n';
  for (const auto& r : records) {
    out += csv::format_double(r.epoch) + ',' + r.sat_id + ',' + csv::format_double(r.elevation_deg) + ',' +
           csv::format_double(r.azimuth_deg) + ',' + csv::format_double(r.cn0_dbhz) + '\n';
  }
  return out;
}

/**
 * Joins the RHCP and LHCP receiver logs into dual-polarized observations.
 *
 * Each RHCP record takes the LHCP record of the same satellite whose epoch is
 * nearest (earlier wins on equal distance) and within @p max_skew_s. RHCP
 * records without a partner keep their epoch and get the tracking floor as LHCP
 * C/N0 with lhcp_imputed set. LHCP records without a partner are dropped.
 */
[[nodiscard]] inline std::vector<ObservationRecord> pair_receiver_streams(std::span<const ChannelRecord> rhcp,
                                                                          std::span<const ChannelRecord> lhcp,
                                                                          double max_skew_s = kDefaultMaxSkewS) {
  auto check_sorted = [](std::span<const ChannelRecord> s, const char* name) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i].epoch < s[i - 1].epoch) throw UnsortedStream(name);
    }
  };
  check_sorted(rhcp, "RHCP");
  check_sorted(lhcp, "LHCP");

  // Per satellite, LHCP (epoch, cn0) in epoch order.
  std::map<std::string, std::vector<std::pair<double, double>>, std::less<>> by_sat;
  for (const auto& r : lhcp) by_sat[r.sat_id].emplace_back(r.epoch, r.cn0_dbhz);

  std::vector<ObservationRecord> out;
  out.reserve(rhcp.size());
  for (const auto& r : rhcp) {
    ObservationRecord o{r.epoch, r.sat_id, r.elevation_deg, r.azimuth_deg, r.cn0_dbhz, kLhcpTrackingFloorDbHz, true};
    if (const auto it = by_sat.find(r.sat_id); it != by_sat.end()) {
      const auto& series = it->second;
      const auto hi = std::lower_bound(series.begin(), series.end(), r.epoch,
                                       [](const auto& e, double t) { return e.first < t; });
      const std::pair<double, double>* best = nullptr;
      if (hi != series.begin()) best = &*std::prev(hi);
      if (hi != series.end() && (best == nullptr || hi->first - r.epoch < r.epoch - best->first)) best = &*hi;
      if (best != nullptr && std::abs(best->first - r.epoch) <= max_skew_s) {
        o.cn0_lhcp_dbhz = best->second;
        o.lhcp_imputed = false;
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Datasets

[[nodiscard]] inline Dataset build_dataset(std::vector<LabeledSample> samples, std::string partition_tag) {
  return Dataset(std::move(samples), std::move(partition_tag));
}

/**
 * Draws exactly @p per_class samples of every class. Selected samples keep their
 * relative order from the source; which ones are selected depends only on the
 * seed and each class's sample sequence.
 */
[[nodiscard]] inline Dataset stratified_subsample(const Dataset& dataset, std::size_t per_class, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[index_of(dataset.samples()[i].label)].push_back(i);

  const SeedStream root(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(per_class * kNumClasses);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    if (idx.size() < per_class) {
      throw InsufficientClassSamples(std::string(label_name(class_at(c))), per_class, idx.size());
    }
    auto stream = root.child(std::string("subsample/") + std::string(label_name(class_at(c))));
    // Partial Fisher-Yates: the first per_class slots are the draw.
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto j = i + static_cast<std::size_t>(stream.bounded(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<LabeledSample> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(dataset.samples()[i]);
  return Dataset(std::move(out), dataset.partition_tag());
}

[[nodiscard]] inline Dataset parse_dataset_csv(std::string_view text, std::string partition_tag) {
  std::vector<LabeledSample> samples;
  csv::LineReader reader(text);
  if (detail::expect_header(reader, kDatasetHeader)) {
    detail::for_each_row(reader, 7, [&](const detail::FieldReader& row) {
      LabeledSample s;
      if (row.fields[0].empty()) throw MalformedRow(row.line_no, "empty scene_id");
      s.provenance.scene_id = std::string(row.fields[0]);
      s.provenance.epoch = row.number(1, "epoch", 0.0, kSecondsPerWeek, true);
      s.provenance.sat_id = row.sat_id(2);
      s.features.elevation_deg = row.number(3, "elevation_deg", 0.0, 90.0, false);
      s.features.cn0_rhcp_dbhz = row.number(4, "cn0_rhcp_dbhz", 10.0, 60.0, false);
      s.features.cn0_diff_dbhz = row.number(5, "cn0_diff_dbhz", -50.0, 50.0, false);
      const auto label = parse_label(row.fields[6]);
      if (!label) throw MalformedRow(row.line_no, "unknown label '" + std::string(row.fields[6]) + "'");
      s.label = *label;
      samples.push_back(std::move(s));
    });
  }
  return Dataset(std::move(samples), std::move(partition_tag));
}

[[nodiscard]] inline std::string write_dataset_csv(const Dataset& dataset) {
  std::string out(kDatasetHeader);
  out += '\n';
  for (const auto& s : dataset.samples()) {
    out += s.provenance.scene_id + ',' + csv::format_double(s.provenance.epoch) + ',' + s.provenance.sat_id + ',' +
           csv::format_double(s.features.elevation_deg) + ',' + csv::format_double(s.features.cn0_rhcp_dbhz) + ',' +
           csv::format_double(s.features.cn0_diff_dbhz) + ',' + std::string(label_name(s.label)) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partition catalog: per-partition totals and class counts.

struct CatalogEntry {
  std::string tag;
  std::size_t total{};
  ClassCounts counts{};

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

[[nodiscard]] inline CatalogEntry catalog_entry(const Dataset& d) {
  return {d.partition_tag(), d.size(), d.class_counts()};
}

[[nodiscard]] inline nlohmann::ordered_json catalog_to_json(std::span<const CatalogEntry> entries) {
  nlohmann::ordered_json parts = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["tag"] = e.tag;
    j["total"] = e.total;
    for (auto c : kAllClasses) j[std::string(label_name(c))] = e.counts[index_of(c)];
    parts.push_back(std::move(j));
  }
  nlohmann::ordered_json root;
  root["partitions"] = std::move(parts);
  return root;
}

/// Parses a catalog and checks that every total equals the sum of its class counts.
[[nodiscard]] inline std::vector<CatalogEntry> validate_catalog(const nlohmann::json& root) {
  std::vector<CatalogEntry> out;
  try {
    for (const auto& j : root.at("partitions")) {
      CatalogEntry e;
      e.tag = j.at("tag").get<std::string>();
      e.total = j.at("total").get<std::size_t>();
      std::size_t sum = 0;
      for (auto c : kAllClasses) {
        e.counts[index_of(c)] = j.at(std::string(label_name(c))).get<std::size_t>();
        sum += e.counts[index_of(c)];
      }
      if (sum != e.total) {
        throw InputError("catalog partition " + e.tag + ": total " + std::to_string(e.total) +
                         " != class sum " + std::to_string(sum));
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("catalog: ") + ex.what());
  }
  return out;
}

}  // namespace sigclass
