#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "sigclass/evaluation.hpp"

using namespace sigclass;

namespace {

/// Routes feature 0 to NLOS below ~5, LOS up to ~15, LOS+NLOS above.
TreeModel banded_model() {
  std::vector<LabeledSample> s;
  for (int i = 0; i < 10; ++i) {
    const double t = i / 10.0;
    s.push_back({{0 + t, 0, 0}, SignalClass::NlosOnly, {"s", 0, "G01", false}});
    s.push_back({{10 + t, 0, 0}, SignalClass::LosOnly, {"s", 0, "G01", false}});
    s.push_back({{20 + t, 0, 0}, SignalClass::LosNlos, {"s", 0, "G01", false}});
  }
  return fit_samples(s, {});
}

double feature_for(SignalClass predicted) { return 0.5 + 10.0 * static_cast<double>(index_of(predicted)); }

/// n samples of class `truth`, the first `correct` of which the banded model gets right.
void add(std::vector<LabeledSample>& out, SignalClass truth, int n, int correct, SignalClass wrong) {
  for (int i = 0; i < n; ++i) {
    out.push_back({{feature_for(i < correct ? truth : wrong), 0, 0}, truth, {"s", 0, "G01", false}});
  }
}

/// Recalls 8/10, 10/10, 6/10.
Dataset worked_example(std::string tag) {
  std::vector<LabeledSample> s;
  add(s, SignalClass::NlosOnly, 10, 8, SignalClass::LosNlos);
  add(s, SignalClass::LosOnly, 10, 10, SignalClass::NlosOnly);
  add(s, SignalClass::LosNlos, 10, 6, SignalClass::NlosOnly);
  return Dataset(std::move(s), std::move(tag));
}

}  // namespace

TEST(Evaluate, WorkedExample) {
  const auto r = evaluate(banded_model(), worked_example("T1"));
  EXPECT_EQ(r.partition_tag, "T1");
  EXPECT_EQ(r.sample_count, 30u);
  EXPECT_DOUBLE_EQ(r.overall_accuracy, 0.8);
  EXPECT_DOUBLE_EQ(*r.per_class_recall[0], 0.8);
  EXPECT_DOUBLE_EQ(*r.per_class_recall[1], 1.0);
  EXPECT_DOUBLE_EQ(*r.per_class_recall[2], 0.6);
  EXPECT_EQ(r.matrix, (ConfusionMatrix{{{8, 0, 2}, {0, 10, 0}, {4, 0, 6}}}));
  // NLOS predicted 12 times, 8 correctly.
  EXPECT_DOUBLE_EQ(*r.per_class_precision[0], 8.0 / 12.0);
}

TEST(Evaluate, MissingClassHasNoRecallAndEmptyThrows) {
  std::vector<LabeledSample> s;
  add(s, SignalClass::LosOnly, 4, 3, SignalClass::NlosOnly);
  const auto r = evaluate(banded_model(), Dataset(s, "x"));
  EXPECT_FALSE(r.per_class_recall[0].has_value());
  EXPECT_FALSE(r.per_class_recall[2].has_value());
  EXPECT_DOUBLE_EQ(*r.per_class_recall[1], 0.75);
  EXPECT_FALSE(r.per_class_precision[2].has_value());
  EXPECT_THROW((void)evaluate(banded_model(), Dataset({}, "x")), EmptyDataset);
}

TEST(ComparePartitions, PooledIsEntrywiseSum) {
  std::vector<LabeledSample> s;
  add(s, SignalClass::NlosOnly, 5, 1, SignalClass::LosOnly);
  add(s, SignalClass::LosNlos, 3, 3, SignalClass::LosOnly);
  const std::vector<Dataset> parts{worked_example("T2"), Dataset(s, "T3")};
  const auto c = compare_partitions(banded_model(), parts);
  ASSERT_EQ(c.partitions.size(), 2u);
  EXPECT_EQ(c.pooled.partition_tag, "T2+T3");
  EXPECT_EQ(c.pooled.sample_count, 38u);
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      EXPECT_EQ(c.pooled.matrix[t][p], c.partitions[0].matrix[t][p] + c.partitions[1].matrix[t][p]);
    }
  }
  const double weighted = (30 * c.partitions[0].overall_accuracy + 8 * c.partitions[1].overall_accuracy) / 38;
  EXPECT_DOUBLE_EQ(c.pooled.overall_accuracy, weighted);
  EXPECT_DOUBLE_EQ(*c.pooled.per_class_recall[0], 9.0 / 15.0);
  EXPECT_THROW((void)compare_partitions(banded_model(), std::vector<Dataset>{}), InputError);
}

TEST(EvaluateProperty, PermutationInvariant) {
  SeedStream rng(3);
  const auto model = banded_model();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabeledSample> s;
    for (int i = 0, n = 1 + static_cast<int>(rng.bounded(60)); i < n; ++i) {
      s.push_back({{rng.uniform(-5.0, 25.0), 0, 0}, class_at(rng.bounded(3)), {"s", 0, "G01", false}});
    }
    const auto r = evaluate(model, Dataset(s, "p"));
    rng.shuffle(s);
    EXPECT_EQ(r, evaluate(model, Dataset(s, "p")));
    double trace = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) trace += static_cast<double>(r.matrix[c][c]);
    EXPECT_DOUBLE_EQ(r.overall_accuracy, trace / static_cast<double>(s.size()));
  }
}

TEST(ReportFormat, JsonFieldsPercentAndTable) {
  const auto r = evaluate(banded_model(), worked_example("T1"));
  const auto j = report_to_json(r);
  EXPECT_EQ(j.at("partition_tag"), "T1");
  EXPECT_EQ(j.at("n"), 30);
  EXPECT_EQ(j.at("per_class_recall").at("LOS+NLOS"), 0.6);
  EXPECT_EQ(j.at("matrix")[2][0], 4);

  EXPECT_EQ(percent(0.644712), "64.47%");
  EXPECT_EQ(percent(1.0), "100.00%");
  EXPECT_EQ(percent(0.0), "0.00%");

  const std::vector<EvalReport> rows{r};
  const auto table = report_table(rows);
  EXPECT_NE(table.find("partition"), std::string::npos);
  EXPECT_NE(table.find("80.00%"), std::string::npos);
  EXPECT_NE(table.find("60.00%"), std::string::npos);
}
