#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigclass/io.hpp"
#include "sigclass/synth.hpp"

using namespace sigclass;

namespace {

UrbanScene canyon() { return parse_scene(read_file(std::string(SIGCLASS_FIXTURE_DIR) + "/canyon.json")); }

std::vector<SatelliteSpec> canyon_sky() {
  return parse_satellite_csv(read_file(std::string(SIGCLASS_FIXTURE_DIR) + "/canyon_sky.csv"));
}

/// Canyon fixture with more receivers spread across the street.
UrbanScene wide_canyon(const std::string& id) {
  const auto base = canyon();
  std::vector<Receiver> rx;
  for (int i = 0; i < 5; ++i) rx.push_back({"rx" + std::to_string(i), {-4.0 + 4.5 * i, -20.0 + 10.0 * i, 1.5}});
  return UrbanScene(id, base.buildings(), rx);
}

}  // namespace

TEST(SampleCn0, ClassBoundsOverTenThousandDraws) {
  const auto m = default_cn0_model();
  SeedStream rng(99);
  for (auto c : kAllClasses) {
    std::size_t negative = 0;
    for (int i = 0; i < 10000; ++i) {
      auto stream = rng.child(static_cast<std::uint64_t>(i));
      const auto d = sample_cn0(m, c, rng.uniform(0.0, 90.0), rng.normal(0.0, 1.5), stream);
      EXPECT_EQ(d.cn0_lhcp_dbhz, detail::centi(d.cn0_rhcp_dbhz - d.cn0_diff_dbhz));
      if (c == SignalClass::LosOnly) {
        ASSERT_GE(d.cn0_rhcp_dbhz, 36.0);
        ASSERT_LE(d.cn0_rhcp_dbhz, 51.0);
        ASSERT_GT(d.cn0_diff_dbhz, 0.0);
      } else {
        ASSERT_GE(d.cn0_rhcp_dbhz, 25.0);
        ASSERT_LE(d.cn0_rhcp_dbhz, 51.0);
      }
      negative += d.cn0_diff_dbhz < 0.0 ? 1 : 0;
    }
    if (c == SignalClass::LosOnly) {
      EXPECT_EQ(negative, 0u);
    } else {
      EXPECT_GT(negative, 500u) << label_name(c);
    }
  }
}

TEST(SampleCn0, ExtremeSceneBiasNeverBreaksClamps) {
  const auto m = default_cn0_model();
  for (double bias : {-30.0, 30.0}) {
    SeedStream s(5);
    for (int i = 0; i < 1000; ++i) {
      const auto d = sample_cn0(m, SignalClass::LosOnly, 45.0, bias, s);
      EXPECT_GE(d.cn0_rhcp_dbhz, 36.0);
      EXPECT_LE(d.cn0_rhcp_dbhz, 51.0);
      EXPECT_GE(d.cn0_diff_dbhz, 0.5);
    }
  }
}

TEST(SampleCn0, BiasShiftsTheMean) {
  const auto m = default_cn0_model();
  auto mean_rhcp = [&](double bias) {
    SeedStream s(8);
    double sum = 0.0;
    for (int i = 0; i < 2000; ++i) sum += sample_cn0(m, SignalClass::NlosOnly, 30.0, bias, s).cn0_rhcp_dbhz;
    return sum / 2000.0;
  };
  EXPECT_GT(mean_rhcp(2.0), mean_rhcp(0.0) + 1.5);
}

TEST(SampleCn0, SameStreamSameDraw) {
  const auto m = default_cn0_model();
  SeedStream a = SeedStream(1).child("k"), b = SeedStream(1).child("k");
  const auto x = sample_cn0(m, SignalClass::LosNlos, 20.0, 0.3, a);
  const auto y = sample_cn0(m, SignalClass::LosNlos, 20.0, 0.3, b);
  EXPECT_EQ(x.cn0_rhcp_dbhz, y.cn0_rhcp_dbhz);
  EXPECT_EQ(x.cn0_diff_dbhz, y.cn0_diff_dbhz);
}

TEST(GenerateDataset, LabelsMatchGeometryRecomputedFromProvenance) {
  const std::vector<UrbanScene> scenes{wide_canyon("west"), wide_canyon("east")};
  const auto sky = canyon_sky();
  const auto d = generate_dataset(scenes, default_cn0_model(), sky, {1000, 4}, std::nullopt, 42, "P");
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d.partition_tag(), "P");
  for (const auto& s : d.samples()) {
    const auto colon = s.provenance.scene_id.find(':');
    ASSERT_NE(colon, std::string::npos);
    const auto scene_id = s.provenance.scene_id.substr(0, colon);
    const auto& scene = scene_id == "west" ? scenes[0] : scenes[1];
    const auto* rx = scene.find_receiver(s.provenance.scene_id.substr(colon + 1));
    ASSERT_NE(rx, nullptr);
    const auto sat = std::find_if(sky.begin(), sky.end(), [&](const auto& x) { return x.sat_id == s.provenance.sat_id; });
    ASSERT_NE(sat, sky.end());
    EXPECT_EQ(s.features.elevation_deg, sat->elevation_deg);
    const auto truth = label_condition(scene, rx->position, direction_from_az_el(sat->azimuth_deg, sat->elevation_deg));
    ASSERT_TRUE(truth.has_value());
    EXPECT_EQ(*truth, s.label);
    EXPECT_GE(s.provenance.epoch, 1000.0);
    EXPECT_LT(s.provenance.epoch, 1004.0);
  }
}

TEST(GenerateDataset, DeterministicAndIndependentOfSceneOrder) {
  const std::vector<UrbanScene> ab{wide_canyon("a"), wide_canyon("b")};
  const std::vector<UrbanScene> ba{wide_canyon("b"), wide_canyon("a")};
  const auto sky = canyon_sky();
  const auto m = default_cn0_model();
  const auto d1 = generate_dataset(ab, m, sky, {0, 3}, std::nullopt, 7, "x");
  const auto d2 = generate_dataset(ab, m, sky, {0, 3}, std::nullopt, 7, "x");
  EXPECT_EQ(write_dataset_csv(d1), write_dataset_csv(d2));
  EXPECT_NE(write_dataset_csv(d1), write_dataset_csv(generate_dataset(ab, m, sky, {0, 3}, std::nullopt, 8, "x")));

  auto sorted_rows = [](const Dataset& d) {
    auto text = write_dataset_csv(d);
    std::vector<std::string> rows;
    for (std::size_t p = 0, q; (q = text.find('\n', p)) != std::string::npos; p = q + 1) rows.push_back(text.substr(p, q - p));
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  EXPECT_EQ(sorted_rows(d1), sorted_rows(generate_dataset(ba, m, sky, {0, 3}, std::nullopt, 7, "x")));
}

TEST(GenerateDataset, CapsEachClassOrFails) {
  const std::vector<UrbanScene> scenes{wide_canyon("c")};
  const auto sky = canyon_sky();
  const auto full = generate_dataset(scenes, default_cn0_model(), sky, {0, 20}, std::nullopt, 1, "x");
  const auto least = *std::min_element(full.class_counts().begin(), full.class_counts().end());
  ASSERT_GT(least, 0u);
  const auto capped = generate_dataset(scenes, default_cn0_model(), sky, {0, 20}, least, 1, "x");
  EXPECT_EQ(capped.class_counts(), (ClassCounts{least, least, least}));
  EXPECT_THROW((void)generate_dataset(scenes, default_cn0_model(), sky, {0, 20}, least + 1, 1, "x"),
               InsufficientClassSamples);
  EXPECT_THROW((void)generate_dataset(scenes, default_cn0_model(), sky, {0, 0}, std::nullopt, 1, "x"), InputError);
}

TEST(Cn0ModelJson, PartialOverrideRoundTripAndValidation) {
  const auto m = cn0_model_from_json(nlohmann::json::parse(R"({"classes":{"NLOS":{"rhcp_mean":30}}})"));
  EXPECT_EQ(m.params(SignalClass::NlosOnly).rhcp_mean, 30.0);
  EXPECT_EQ(m.params(SignalClass::LosOnly), default_cn0_model().params(SignalClass::LosOnly));
  EXPECT_EQ(cn0_model_from_json(nlohmann::json::parse(cn0_model_to_json(m).dump())), m);
  EXPECT_THROW((void)cn0_model_from_json(nlohmann::json::parse(R"({"classes":{"LOS":{"diff_min":0}}})")), InputError);
  EXPECT_THROW((void)cn0_model_from_json(nlohmann::json::parse(R"({"classes":{"LOS":{"rhcp_stddev":0}}})")), InputError);
  EXPECT_THROW((void)cn0_model_from_json(nlohmann::json::parse(R"({"classes":{"LOS":{"rhcp_min":52}}})")), InputError);
  EXPECT_THROW((void)cn0_model_from_json(nlohmann::json::parse(R"({"classes":{"MAYBE":{}}})")), InputError);
  EXPECT_THROW((void)cn0_model_from_json(nlohmann::json::parse(R"({"scene_bias_stddev_db":0})")), InputError);
}

TEST(ProtocolJson, BundledProtocolAndShapeErrors) {
  const std::string dir = SIGCLASS_DATA_DIR;
  const auto p = protocol_from_json(nlohmann::json::parse(read_file(dir + "/protocol.json")), dir);
  EXPECT_EQ(p.seed, 42u);
  ASSERT_EQ(p.partitions.size(), 4u);
  EXPECT_EQ(p.partitions[0].tag, "T0");
  EXPECT_EQ(p.partitions[0].per_class_cap, 2500u);
  EXPECT_EQ(p.partitions[0].scenes.size(), p.partitions[0].satellites.size());
  EXPECT_EQ(p.model, default_cn0_model());
  EXPECT_THROW((void)protocol_from_json(nlohmann::json::parse(R"({"partitions":[]})"), "."), InputError);
  EXPECT_THROW((void)protocol_from_json(
                   nlohmann::json::parse(
                       R"({"partitions":[{"tag":"X","scenes":["a","b","c"],"satellites":["s","t"],"epochs":1}]})"),
                   "."),
               InputError);
}
