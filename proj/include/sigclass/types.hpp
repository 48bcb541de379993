/**
 * @file types.hpp
 * @brief Core value types: reception classes, observations, feature vectors and datasets.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sigclass {

/// Reception condition of one satellite signal. The enumerator order is the canonical order.
enum class SignalClass : int { NlosOnly = 0, LosOnly = 1, LosNlos = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<SignalClass, kNumClasses> kAllClasses{SignalClass::NlosOnly, SignalClass::LosOnly,
                                                                 SignalClass::LosNlos};

[[nodiscard]] constexpr std::size_t index_of(SignalClass c) noexcept { return static_cast<std::size_t>(c); }

[[nodiscard]] constexpr SignalClass class_at(std::size_t i) noexcept { return kAllClasses[i]; }

/// File label: NLOS, LOS or LOS+NLOS.
[[nodiscard]] constexpr std::string_view label_name(SignalClass c) noexcept {
  switch (c) {
    case SignalClass::NlosOnly: return "NLOS";
    case SignalClass::LosOnly: return "LOS";
    case SignalClass::LosNlos: return "LOS+NLOS";
  }
  return "?";
}

[[nodiscard]] inline std::optional<SignalClass> parse_label(std::string_view s) noexcept {
  for (auto c : kAllClasses) {
    if (label_name(c) == s) return c;
  }
  return std::nullopt;
}

using ClassCounts = std::array<std::size_t, kNumClasses>;

/// Argmax over counts; ties resolve to the earliest class in canonical order.
[[nodiscard]] inline SignalClass majority_class(const ClassCounts& counts) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumClasses; ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return class_at(best);
}

/// LHCP C/N0 assigned when the LHCP receiver produced no matching epoch.
inline constexpr double kLhcpTrackingFloorDbHz = 25.0;

/// One epoch x satellite measurement from the dual-polarized antenna.
struct ObservationRecord {
  double epoch{};  // GPS time of week, s
  std::string sat_id;
  double elevation_deg{};
  double azimuth_deg{};
  double cn0_rhcp_dbhz{};
  double cn0_lhcp_dbhz{};
  bool lhcp_imputed{false};

  friend bool operator==(const ObservationRecord&, const ObservationRecord&) = default;
};

/// Single-receiver record: one polarization's C/N0 only.
struct ChannelRecord {
  double epoch{};
  std::string sat_id;
  double elevation_deg{};
  double azimuth_deg{};
  double cn0_dbhz{};

  friend bool operator==(const ChannelRecord&, const ChannelRecord&) = default;
};

inline constexpr std::size_t kNumFeatures = 3;

/// Classifier input: elevation, RHCP C/N0 and the RHCP - LHCP difference.
struct FeatureVector {
  double elevation_deg{};
  double cn0_rhcp_dbhz{};
  double cn0_diff_dbhz{};

  [[nodiscard]] double operator[](std::size_t i) const noexcept {
    return i == 0 ? elevation_deg : (i == 1 ? cn0_rhcp_dbhz : cn0_diff_dbhz);
  }
  [[nodiscard]] bool valid() const noexcept {
    return std::isfinite(elevation_deg) && std::isfinite(cn0_rhcp_dbhz) && std::isfinite(cn0_diff_dbhz) &&
           elevation_deg >= 0.0 && elevation_deg <= 90.0;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames{"elevation_deg", "cn0_rhcp_dbhz",
                                                                         "cn0_diff_dbhz"};

struct Provenance {
  std::string scene_id;
  double epoch{};
  std::string sat_id;
  bool lhcp_imputed{false};

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledSample {
  FeatureVector features;
  SignalClass label{SignalClass::NlosOnly};
  Provenance provenance;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

[[nodiscard]] inline ClassCounts count_classes(std::span<const LabeledSample> samples) noexcept {
  ClassCounts counts{};
  for (const auto& s : samples) ++counts[index_of(s.label)];
  return counts;
}

/// Ordered, immutable collection of labeled samples with cached class counts.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<LabeledSample> samples, std::string partition_tag)
      : samples_(std::move(samples)), partition_tag_(std::move(partition_tag)), class_counts_(count_classes(samples_)) {}

  [[nodiscard]] const std::vector<LabeledSample>& samples() const noexcept { return samples_; }
  [[nodiscard]] const std::string& partition_tag() const noexcept { return partition_tag_; }
  [[nodiscard]] const ClassCounts& class_counts() const noexcept { return class_counts_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] std::size_t count(SignalClass c) const noexcept { return class_counts_[index_of(c)]; }

 private:
  std::vector<LabeledSample> samples_;
  std::string partition_tag_;
  ClassCounts class_counts_{};
};

}  // namespace sigclass
