/**
 * @file evaluation.hpp
 * @brief Confusion matrices, overall accuracy and per-class recall/precision, per partition and pooled.
 */
#pragma once

#include <array>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigclass/cart.hpp"
#include "sigclass/error.hpp"
#include "sigclass/types.hpp"

namespace sigclass {

/// Rows are ground truth, columns are predictions, both in canonical class order.
using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct EvalReport {
  std::string partition_tag;
  std::size_t sample_count{};
  double overall_accuracy{};
  std::array<std::optional<double>, kNumClasses> per_class_recall{};     // absent when the class has no samples
  std::array<std::optional<double>, kNumClasses> per_class_precision{};  // absent when the class is never predicted
  ConfusionMatrix matrix{};

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

[[nodiscard]] inline EvalReport report_from_matrix(std::string tag, const ConfusionMatrix& m) {
  EvalReport r;
  r.partition_tag = std::move(tag);
  r.matrix = m;
  std::size_t trace = 0;
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    trace += m[t][t];
    for (std::size_t p = 0; p < kNumClasses; ++p) r.sample_count += m[t][p];
  }
  if (r.sample_count == 0) throw EmptyDataset();
  r.overall_accuracy = static_cast<double>(trace) / static_cast<double>(r.sample_count);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      row += m[c][k];
      col += m[k][c];
    }
    if (row > 0) r.per_class_recall[c] = static_cast<double>(m[c][c]) / static_cast<double>(row);
    if (col > 0) r.per_class_precision[c] = static_cast<double>(m[c][c]) / static_cast<double>(col);
  }
  return r;
}

[[nodiscard]] inline ConfusionMatrix confusion_matrix(const TreeModel& model, const Dataset& dataset) {
  ConfusionMatrix m{};
  for (const auto& s : dataset.samples()) ++m[index_of(s.label)][index_of(model.predict(s.features))];
  return m;
}

[[nodiscard]] inline EvalReport evaluate(const TreeModel& model, const Dataset& dataset) {
  if (dataset.empty()) throw EmptyDataset();
  return report_from_matrix(dataset.partition_tag(), confusion_matrix(model, dataset));
}

struct PartitionComparison {
  std::vector<EvalReport> partitions;
  EvalReport pooled;  // entrywise sum of the partition matrices
};

/// Per-partition reports plus a pooled report tagged "A+B+...".
[[nodiscard]] inline PartitionComparison compare_partitions(const TreeModel& model, std::span<const Dataset> partitions) {
  if (partitions.empty()) throw InputError("compare_partitions: no partitions");
  PartitionComparison out;
  ConfusionMatrix pooled{};
  std::string tag;
  for (const auto& d : partitions) {
    out.partitions.push_back(evaluate(model, d));
    const auto& m = out.partitions.back().matrix;
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      for (std::size_t p = 0; p < kNumClasses; ++p) pooled[t][p] += m[t][p];
    }
    tag += (tag.empty() ? "" : "+") + d.partition_tag();
  }
  out.pooled = report_from_matrix(tag, pooled);
  return out;
}

[[nodiscard]] inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["partition_tag"] = r.partition_tag;
  j["n"] = r.sample_count;
  j["overall_accuracy"] = r.overall_accuracy;
  auto per_class = [](const std::array<std::optional<double>, kNumClasses>& v) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (auto c : kAllClasses) {
      if (v[index_of(c)]) o[std::string(label_name(c))] = *v[index_of(c)];
    }
    return o;
  };
  j["per_class_recall"] = per_class(r.per_class_recall);
  j["per_class_precision"] = per_class(r.per_class_precision);
  j["matrix"] = r.matrix;
  return j;
}

/// Two-decimal percentage, e.g. 0.644712 -> "64.47%".
[[nodiscard]] inline std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
  return buf;
}

[[nodiscard]] inline std::string report_table(std::span<const EvalReport> reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %8s %9s %9s %9s %9s\n", "partition", "n", "overall", "NLOS", "LOS",
                "LOS+NLOS");
  out += line;
  for (const auto& r : reports) {
    std::array<std::string, kNumClasses> recall;
    for (std::size_t c = 0; c < kNumClasses; ++c) recall[c] = r.per_class_recall[c] ? percent(*r.per_class_recall[c]) : "-";
    std::snprintf(line, sizeof(line), "%-16s %8zu %9s %9s %9s %9s\n", r.partition_tag.c_str(), r.sample_count,
                  percent(r.overall_accuracy).c_str(), recall[0].c_str(), recall[1].c_str(), recall[2].c_str());
    out += line;
  }
  return out;
}

}  // namespace sigclass
