/**
 * @file cart.hpp
 * @brief CART classification trees over the three reception features, with
 *        stratified k-fold grid search and a versioned JSON model format.
 *
 * Splits are axis-aligned, chosen by maximum Gini decrease over every midpoint
 * between consecutive distinct feature values. Candidate splits are ranked in
 * exact integer arithmetic, so the chosen tree never depends on floating-point
 * rounding or on the order of the training samples. Ties go to the lowest
 * feature index, then the lowest threshold. Samples with feature <= threshold
 * go left.
 */
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sigclass/csv.hpp"
#include "sigclass/error.hpp"
#include "sigclass/ingest.hpp"
#include "sigclass/rng.hpp"
#include "sigclass/types.hpp"

namespace sigclass {

[[nodiscard]] inline FeatureVector extract_features(const ObservationRecord& r) noexcept {
  return {r.elevation_deg, r.cn0_rhcp_dbhz, r.cn0_rhcp_dbhz - r.cn0_lhcp_dbhz};
}

/// Labeled sample for an observation; the LHCP imputation flag travels in the provenance.
[[nodiscard]] inline LabeledSample labeled_sample(const ObservationRecord& r, SignalClass label,
                                                  std::string scene_id) {
  return {extract_features(r), label, {std::move(scene_id), r.epoch, r.sat_id, r.lhcp_imputed}};
}

/// Gini impurity 1 - sum p_i^2.
[[nodiscard]] inline double gini(const ClassCounts& counts) {
  const std::size_t total = counts[0] + counts[1] + counts[2];
  if (total == 0) throw EmptyNode();
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct TreeParams {
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_split{2};
  std::size_t min_samples_leaf{1};
  double min_impurity_decrease{0.0};

  void validate() const {
    if (max_depth && *max_depth < 1) throw InputError("TreeParams: max_depth must be >= 1");
    if (min_samples_split < 2) throw InputError("TreeParams: min_samples_split must be >= 2");
    if (min_samples_leaf < 1) throw InputError("TreeParams: min_samples_leaf must be >= 1");
    if (!(min_impurity_decrease >= 0.0) || !std::isfinite(min_impurity_decrease)) {
      throw InputError("TreeParams: min_impurity_decrease must be >= 0");
    }
  }

  [[nodiscard]] std::string describe() const {
    return "max_depth=" + (max_depth ? std::to_string(*max_depth) : std::string("none")) +
           " min_samples_split=" + std::to_string(min_samples_split) +
           " min_samples_leaf=" + std::to_string(min_samples_leaf) +
           " min_impurity_decrease=" + csv::format_double(min_impurity_decrease);
  }

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct Split {
  std::size_t feature{};
  double threshold{};
  double impurity_decrease{};

  friend bool operator==(const Split&, const Split&) = default;
};

namespace detail {

using u128 = unsigned __int128;

/// Sum over both children of sum_c count_c^2 / n_child, kept as the exact fraction num / den.
struct SplitScore {
  u128 num{0};
  u128 den{1};

  [[nodiscard]] bool greater_than(const SplitScore& o) const noexcept { return num * o.den > o.num * den; }
};

[[nodiscard]] inline std::uint64_t sum_sq(const ClassCounts& c) noexcept {
  return static_cast<std::uint64_t>(c[0]) * c[0] + static_cast<std::uint64_t>(c[1]) * c[1] +
         static_cast<std::uint64_t>(c[2]) * c[2];
}

[[nodiscard]] inline double midpoint(double lo, double hi) noexcept {
  const double mid = (lo + hi) / 2.0;
  return (mid >= hi || !std::isfinite(mid)) ? lo : mid;
}

/**
 * Best split of the node whose samples are listed, per feature, in ascending
 * feature order by @p sorted (each a permutation of the same index set).
 */
[[nodiscard]] inline std::optional<Split> scan_split(std::span<const LabeledSample> samples,
                                                     const std::array<std::span<const std::uint32_t>, kNumFeatures>& sorted,
                                                     const ClassCounts& totals, const TreeParams& params) {
  const std::size_t n = sorted[0].size();
  if (n < 2) return std::nullopt;
  const std::uint64_t parent_sq = sum_sq(totals);

  std::optional<Split> best;
  SplitScore best_score;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const auto order = sorted[f];
    ClassCounts left{};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto& s = samples[order[i]];
      ++left[index_of(s.label)];
      const double v = s.features[f];
      const double next = samples[order[i + 1]].features[f];
      if (!(v < next)) continue;
      const std::size_t n_left = i + 1, n_right = n - n_left;
      if (n_left < params.min_samples_leaf || n_right < params.min_samples_leaf) continue;
      const ClassCounts right{totals[0] - left[0], totals[1] - left[1], totals[2] - left[2]};
      const SplitScore score{static_cast<u128>(sum_sq(left)) * n_right + static_cast<u128>(sum_sq(right)) * n_left,
                             static_cast<u128>(n_left) * n_right};
      if (!best || score.greater_than(best_score)) {
        best_score = score;
        best = Split{f, midpoint(v, next), 0.0};
      }
    }
  }
  if (!best) return std::nullopt;
  // Decrease > 0  <=>  score > parent_sq / n.
  if (!(best_score.num * n > static_cast<u128>(parent_sq) * best_score.den)) return std::nullopt;
  const double nd = static_cast<double>(n);
  best->impurity_decrease = static_cast<double>(best_score.num) / static_cast<double>(best_score.den) / nd -
                            static_cast<double>(parent_sq) / (nd * nd);
  if (best->impurity_decrease < params.min_impurity_decrease) return std::nullopt;
  return best;
}

[[nodiscard]] inline std::array<std::vector<std::uint32_t>, kNumFeatures> presort(
    std::span<const LabeledSample> samples) {
  std::array<std::vector<std::uint32_t>, kNumFeatures> out;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    auto& idx = out[f];
    idx.resize(samples.size());
    std::iota(idx.begin(), idx.end(), 0U);
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = samples[a].features[f], vb = samples[b].features[f];
      return va < vb || (va == vb && a < b);
    });
  }
  return out;
}

}  // namespace detail

/// Best Gini split of @p samples, or none when no split strictly reduces impurity (or beats the configured minimum).
[[nodiscard]] inline std::optional<Split> best_split(std::span<const LabeledSample> samples,
                                                     const TreeParams& params = {}) {
  const auto sorted = detail::presort(samples);
  return detail::scan_split(samples, {sorted[0], sorted[1], sorted[2]}, count_classes(samples),
                            params);
}

struct TreeNode {
  int feature{-1};  // -1 for leaves
  double threshold{};
  std::size_t left{};
  std::size_t right{};
  ClassCounts counts{};
  SignalClass predicted{SignalClass::NlosOnly};

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Fingerprint {
  std::uint64_t dataset_hash{};
  std::uint64_t seed{};
  std::uint64_t tree_digest{};

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

/// Fitted tree; nodes are stored in pre-order with explicit child indices.
class TreeModel {
 public:
  TreeModel() = default;
  TreeModel(std::vector<TreeNode> nodes, TreeParams params, Fingerprint fingerprint)
      : nodes_(std::move(nodes)), params_(std::move(params)), fingerprint_(fingerprint) {}

  [[nodiscard]] SignalClass predict(const FeatureVector& x) const noexcept {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const auto& n = nodes_[i];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].predicted;
  }

  [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const TreeParams& params() const noexcept { return params_; }
  [[nodiscard]] const Fingerprint& fingerprint() const noexcept { return fingerprint_; }

  [[nodiscard]] std::size_t depth() const noexcept { return nodes_.empty() ? 0 : depth_from(0); }
  [[nodiscard]] std::size_t leaf_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
  }

  friend bool operator==(const TreeModel&, const TreeModel&) = default;

 private:
  [[nodiscard]] std::size_t depth_from(std::size_t i) const noexcept {
    const auto& n = nodes_[i];
    return n.is_leaf() ? 0 : 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  std::vector<TreeNode> nodes_;
  TreeParams params_;
  Fingerprint fingerprint_;
};

[[nodiscard]] inline SignalClass predict(const TreeModel& model, const FeatureVector& x) noexcept {
  return model.predict(x);
}

/// Content hash of params + nodes; stored in the fingerprint so hand edits are detectable.
[[nodiscard]] inline std::uint64_t tree_digest(const std::vector<TreeNode>& nodes, const TreeParams& params) {
  std::string canon = params.describe();
  for (const auto& n : nodes) {
    canon += '|';
    canon += std::to_string(n.feature) + ',' + csv::format_double(n.threshold) + ',' + std::to_string(n.left) + ',' +
             std::to_string(n.right) + ',' + std::to_string(n.counts[0]) + ',' + std::to_string(n.counts[1]) + ',' +
             std::to_string(n.counts[2]) + ',' + std::to_string(index_of(n.predicted));
  }
  return fnv1a64(canon);
}

[[nodiscard]] inline std::uint64_t dataset_hash(const Dataset& d) { return fnv1a64(write_dataset_csv(d)); }

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(std::span<const LabeledSample> samples, const TreeParams& params)
      : samples_(samples), params_(params), sorted_(presort(samples)), goes_left_(samples.size(), 0) {}

  std::vector<TreeNode> build() && {
    grow(0, samples_.size(), 0);
    return std::move(nodes_);
  }

 private:
  std::size_t grow(std::size_t lo, std::size_t hi, std::size_t depth) {
    const std::size_t n = hi - lo;
    ClassCounts counts{};
    for (std::size_t i = lo; i < hi; ++i) ++counts[index_of(samples_[sorted_[0][i]].label)];

    const std::size_t id = nodes_.size();
    nodes_.push_back({-1, 0.0, 0, 0, counts, majority_class(counts)});

    const bool pure = counts[0] == n || counts[1] == n || counts[2] == n;
    if (pure || (params_.max_depth && depth >= *params_.max_depth) || n < params_.min_samples_split ||
        n < 2 * params_.min_samples_leaf) {
      return id;
    }
    const std::array<std::span<const std::uint32_t>, kNumFeatures> views{
        std::span<const std::uint32_t>(sorted_[0]).subspan(lo, n),
        std::span<const std::uint32_t>(sorted_[1]).subspan(lo, n),
        std::span<const std::uint32_t>(sorted_[2]).subspan(lo, n)};
    const auto split = scan_split(samples_, views, counts, params_);
    if (!split) return id;

    std::size_t n_left = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto s = sorted_[0][i];
      goes_left_[s] = samples_[s].features[split->feature] <= split->threshold ? 1 : 0;
      n_left += goes_left_[s];
    }
    for (auto& order : sorted_) {
      std::stable_partition(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi),
                            [&](std::uint32_t s) { return goes_left_[s] != 0; });
    }
    const std::size_t left = grow(lo, lo + n_left, depth + 1);
    const std::size_t right = grow(lo + n_left, hi, depth + 1);
    auto& node = nodes_[id];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  std::span<const LabeledSample> samples_;
  TreeParams params_;
  std::array<std::vector<std::uint32_t>, kNumFeatures> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// Greedy CART on a sample list; the fingerprint carries only the tree digest.
[[nodiscard]] inline TreeModel fit_samples(std::span<const LabeledSample> samples, const TreeParams& params) {
  params.validate();
  if (samples.empty()) throw EmptyDataset();
  if (samples.size() > std::numeric_limits<std::uint32_t>::max()) throw InputError("fit: too many samples");
  auto nodes = detail::TreeBuilder(samples, params).build();
  const auto digest = tree_digest(nodes, params);
  return TreeModel(std::move(nodes), params, Fingerprint{0, 0, digest});
}

[[nodiscard]] inline TreeModel fit(const Dataset& dataset, const TreeParams& params, std::uint64_t seed = 0) {
  if (dataset.empty()) throw EmptyDataset();
  auto model = fit_samples(dataset.samples(), params);
  return TreeModel(model.nodes(), model.params(),
                   Fingerprint{dataset_hash(dataset), seed, model.fingerprint().tree_digest});
}

// ---------------------------------------------------------------------------
// Cross-validation

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;

  friend bool operator==(const Fold&, const Fold&) = default;
};

/**
 * Stratified k-fold split. Each class is shuffled with its own keyed stream and
 * dealt round-robin, continuing from the fold where the previous class stopped,
 * so fold sizes differ by at most one and every fold holds floor or ceil of
 * n_c / k samples of class c. Index lists are ascending.
 */
[[nodiscard]] inline std::vector<Fold> kfold_stratified(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("kfold: k must be >= 2");
  for (auto c : kAllClasses) {
    if (dataset.count(c) < k) throw TooFewSamples(std::string(label_name(c)), dataset.count(c), k);
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[index_of(dataset.samples()[i].label)].push_back(i);

  const SeedStream root(seed);
  std::vector<std::size_t> fold_of(dataset.size());
  std::size_t next = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto stream = root.child(std::string("kfold/") + std::string(label_name(class_at(c))));
    stream.shuffle(by_class[c]);
    for (auto i : by_class[c]) {
      fold_of[i] = next;
      next = (next + 1) % k;
    }
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? folds[f].validation : folds[f].train).push_back(i);
  }
  return folds;
}

struct CvRow {
  TreeParams params;
  double mean_accuracy{};
  std::vector<double> fold_accuracies;

  friend bool operator==(const CvRow&, const CvRow&) = default;
};

struct CvReport {
  std::vector<CvRow> grid;
  std::size_t best_index{};
  TreeParams best;

  friend bool operator==(const CvReport&, const CvReport&) = default;
};

/// max_depth in {3,5,8,12,unlimited} x min_samples_leaf in {1,5,20,50} x min_samples_split in {2,10,40}.
[[nodiscard]] inline std::vector<TreeParams> default_grid() {
  std::vector<TreeParams> grid;
  const std::array<std::optional<std::size_t>, 5> depths{3, 5, 8, 12, std::nullopt};
  for (const auto& d : depths) {
    for (std::size_t leaf : {1, 5, 20, 50}) {
      for (std::size_t split : {2, 10, 40}) grid.push_back({d, split, leaf, 0.0});
    }
  }
  return grid;
}

namespace detail {

/// True when a is preferred over b at equal mean accuracy: shallower, then larger leaves.
[[nodiscard]] inline bool simpler(const TreeParams& a, const TreeParams& b) noexcept {
  constexpr auto unlimited = std::numeric_limits<std::size_t>::max();
  const auto da = a.max_depth.value_or(unlimited), db = b.max_depth.value_or(unlimited);
  if (da != db) return da < db;
  return a.min_samples_leaf > b.min_samples_leaf;
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1U, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

[[nodiscard]] inline double accuracy_on(const TreeModel& model, std::span<const LabeledSample> samples,
                                        std::span<const std::size_t> indices) {
  std::size_t correct = 0;
  for (auto i : indices) correct += model.predict(samples[i].features) == samples[i].label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

/**
 * Scores every grid point on the same stratified folds. (params x fold) cells are
 * evaluated concurrently; each cell writes only its own slot, so the report is
 * independent of scheduling.
 */
[[nodiscard]] inline CvReport grid_search(const Dataset& dataset, const std::vector<TreeParams>& grid, std::size_t k,
                                          std::uint64_t seed) {
  if (grid.empty()) throw InputError("grid_search: empty grid");
  if (dataset.empty()) throw EmptyDataset();
  for (const auto& p : grid) p.validate();
  const auto folds = kfold_stratified(dataset, k, seed);
  const auto& samples = dataset.samples();

  std::vector<std::vector<LabeledSample>> train_sets(k);
  for (std::size_t f = 0; f < k; ++f) {
    train_sets[f].reserve(folds[f].train.size());
    for (auto i : folds[f].train) train_sets[f].push_back(samples[i]);
  }

  std::vector<double> acc(grid.size() * k);
  detail::parallel_for(acc.size(), [&](std::size_t cell) {
    const std::size_t g = cell / k, f = cell % k;
    const auto model = fit_samples(train_sets[f], grid[g]);
    acc[cell] = accuracy_on(model, samples, folds[f].validation);
  });

  CvReport report;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CvRow row{grid[g], 0.0, {acc.begin() + static_cast<std::ptrdiff_t>(g * k),
                             acc.begin() + static_cast<std::ptrdiff_t>((g + 1) * k)}};
    double sum = 0.0;
    for (double a : row.fold_accuracies) sum += a;
    row.mean_accuracy = sum / static_cast<double>(k);
    report.grid.push_back(std::move(row));
  }
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const auto& cand = report.grid[g];
    const auto& cur = report.grid[report.best_index];
    if (cand.mean_accuracy > cur.mean_accuracy ||
        (cand.mean_accuracy == cur.mean_accuracy && detail::simpler(cand.params, cur.params))) {
      report.best_index = g;
    }
  }
  report.best = report.grid[report.best_index].params;
  return report;
}

// ---------------------------------------------------------------------------
// Model and report files

inline constexpr int kModelFormatVersion = 1;

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

[[nodiscard]] inline nlohmann::ordered_json params_to_json(const TreeParams& p) {
  nlohmann::ordered_json j;
  j["max_depth"] = p.max_depth ? nlohmann::ordered_json(*p.max_depth) : nlohmann::ordered_json(nullptr);
  j["min_samples_split"] = p.min_samples_split;
  j["min_samples_leaf"] = p.min_samples_leaf;
  j["min_impurity_decrease"] = p.min_impurity_decrease;
  return j;
}

/// Missing keys keep their defaults.
[[nodiscard]] inline TreeParams params_from_json(const nlohmann::json& j) {
  TreeParams p;
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<std::size_t>();
  if (j.contains("min_samples_split")) p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  if (j.contains("min_samples_leaf")) p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  if (j.contains("min_impurity_decrease")) p.min_impurity_decrease = j.at("min_impurity_decrease").get<double>();
  return p;
}

[[nodiscard]] inline std::string save_model(const TreeModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["class_order"] = nlohmann::ordered_json::array();
  for (auto c : kAllClasses) j["class_order"].push_back(std::string(label_name(c)));
  j["feature_order"] = nlohmann::ordered_json::array();
  for (auto f : kFeatureNames) j["feature_order"].push_back(std::string(f));
  j["params"] = params_to_json(model.params());
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : model.nodes()) {
    nlohmann::ordered_json jn;
    if (n.is_leaf()) {
      jn["counts"] = n.counts;
      jn["predicted"] = std::string(label_name(n.predicted));
    } else {
      jn["feature"] = n.feature;
      jn["threshold"] = n.threshold;
      jn["left"] = n.left;
      jn["right"] = n.right;
      jn["counts"] = n.counts;
    }
    j["nodes"].push_back(std::move(jn));
  }
  const auto& fp = model.fingerprint();
  j["fingerprint"] = {{"dataset_hash", hex64(fp.dataset_hash)}, {"seed", fp.seed}, {"tree_digest", hex64(fp.tree_digest)}};
  return j.dump(2) + "\n";
}

struct LoadedModel {
  TreeModel model;
  std::vector<std::string> warnings;
};

namespace detail {

struct ModelChecker {
  const std::vector<TreeNode>& nodes;
  const TreeParams& params;
  std::size_t next{0};

  /// Walks the subtree that must start at index next; returns its root.
  std::size_t walk(std::size_t depth, std::array<double, kNumFeatures> lo, std::array<double, kNumFeatures> hi) {
    if (next >= nodes.size()) throw CorruptModel("node list ends inside the tree");
    const std::size_t id = next++;
    const auto& n = nodes[id];
    const std::size_t total = n.counts[0] + n.counts[1] + n.counts[2];
    if (params.max_depth && depth > *params.max_depth) throw CorruptModel("tree deeper than max_depth");
    if (n.is_leaf()) {
      if (total < params.min_samples_leaf) throw CorruptModel("leaf " + std::to_string(id) + " below min_samples_leaf");
      if (n.predicted != majority_class(n.counts)) {
        throw CorruptModel("leaf " + std::to_string(id) + " does not predict its majority class");
      }
      return id;
    }
    const auto f = static_cast<std::size_t>(n.feature);
    if (!std::isfinite(n.threshold)) throw CorruptModel("non-finite threshold at node " + std::to_string(id));
    if (!(n.threshold > lo[f] && n.threshold < hi[f])) {
      throw CorruptModel("threshold at node " + std::to_string(id) + " contradicts an ancestor split");
    }
    if (n.left != next) throw CorruptModel("node " + std::to_string(id) + " is not in pre-order");
    auto left_hi = hi;
    left_hi[f] = n.threshold;
    walk(depth + 1, lo, left_hi);
    if (n.right != next) throw CorruptModel("node " + std::to_string(id) + " is not in pre-order");
    auto right_lo = lo;
    right_lo[f] = n.threshold;
    walk(depth + 1, right_lo, hi);
    const auto& l = nodes[n.left].counts;
    const auto& r = nodes[n.right].counts;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (l[c] + r[c] != n.counts[c]) throw CorruptModel("child counts do not sum at node " + std::to_string(id));
    }
    return id;
  }
};

}  // namespace detail

/// Parses and validates a model file. Content that no longer matches its tree digest loads with a warning.
[[nodiscard]] inline LoadedModel load_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw CorruptModel(std::string("not valid JSON: ") + ex.what());
  }
  try {
    if (!j.contains("format_version")) throw CorruptModel("missing format_version");
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw CorruptModel("unsupported format_version " + j.at("format_version").dump());
    }
    const auto order = j.at("class_order").get<std::vector<std::string>>();
    if (order.size() != kNumClasses) throw CorruptModel("class_order must list three classes");
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (order[c] != label_name(class_at(c))) throw CorruptModel("unexpected class_order");
    }
    if (j.contains("feature_order")) {
      const auto feats = j.at("feature_order").get<std::vector<std::string>>();
      if (feats.size() != kNumFeatures) throw CorruptModel("feature_order must list three features");
      for (std::size_t f = 0; f < kNumFeatures; ++f) {
        if (feats[f] != kFeatureNames[f]) throw CorruptModel("unexpected feature_order");
      }
    }
    TreeParams params = params_from_json(j.at("params"));
    try {
      params.validate();
    } catch (const InputError& ex) {
      throw CorruptModel(ex.what());
    }

    std::vector<TreeNode> nodes;
    for (const auto& jn : j.at("nodes")) {
      TreeNode n;
      const auto counts = jn.at("counts").get<std::vector<std::size_t>>();
      if (counts.size() != kNumClasses) throw CorruptModel("node counts must have three entries");
      std::copy(counts.begin(), counts.end(), n.counts.begin());
      if (jn.contains("feature")) {
        n.feature = jn.at("feature").get<int>();
        if (n.feature < 0 || n.feature >= static_cast<int>(kNumFeatures)) throw CorruptModel("feature index out of range");
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<std::size_t>();
        n.right = jn.at("right").get<std::size_t>();
        n.predicted = majority_class(n.counts);
      } else {
        const auto label = parse_label(jn.at("predicted").get<std::string>());
        if (!label) throw CorruptModel("unknown predicted class");
        n.predicted = *label;
      }
      nodes.push_back(n);
    }
    if (nodes.empty()) throw CorruptModel("no nodes");
    const double inf = std::numeric_limits<double>::infinity();
    detail::ModelChecker checker{nodes, params};
    checker.walk(0, {-inf, -inf, -inf}, {inf, inf, inf});
    if (checker.next != nodes.size()) throw CorruptModel("unreachable nodes after the tree");

    const auto& jf = j.at("fingerprint");
    auto parse_hex = [](const std::string& s) {
      if (s.size() != 16) throw CorruptModel("fingerprint hash must be 16 hex digits");
      std::uint64_t v = 0;
      for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw CorruptModel("fingerprint hash must be lowercase hex");
      }
      return v;
    };
    Fingerprint fp{parse_hex(jf.at("dataset_hash").get<std::string>()), jf.at("seed").get<std::uint64_t>(),
                   parse_hex(jf.at("tree_digest").get<std::string>())};
    LoadedModel out{TreeModel(std::move(nodes), params, fp), {}};
    if (tree_digest(out.model.nodes(), params) != fp.tree_digest) {
      out.warnings.push_back("fingerprint mismatch: tree content differs from the trained tree digest");
    }
    return out;
  } catch (const nlohmann::json::exception& ex) {
    throw CorruptModel(ex.what());
  }
}

[[nodiscard]] inline nlohmann::ordered_json cv_report_to_json(const CvReport& r) {
  nlohmann::ordered_json j;
  j["grid"] = nlohmann::ordered_json::array();
  for (const auto& row : r.grid) {
    j["grid"].push_back(
        {{"params", params_to_json(row.params)}, {"mean_accuracy", row.mean_accuracy}, {"fold_accuracies", row.fold_accuracies}});
  }
  j["best_index"] = r.best_index;
  j["best"] = params_to_json(r.best);
  return j;
}

}  // namespace sigclass
