/**
 * @file scene_io.hpp
 * @brief Scene JSON files and satellite list CSVs.
 *
 * Scene: { "scene_id": str, "buildings": [ { "footprint": [[x,y],...], "height": h } ],
 *          "receivers": [ { "id": str, "pos": [x,y,z] } ] }   (meters, ENU)
 * Satellite list: sat_id,azimuth_deg,elevation_deg
 */
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sigclass/csv.hpp"
#include "sigclass/error.hpp"
#include "sigclass/geometry.hpp"
#include "sigclass/ingest.hpp"

namespace sigclass {

[[nodiscard]] inline UrbanScene scene_from_json(const nlohmann::json& j) {
  try {
    std::vector<Building> buildings;
    for (const auto& jb : j.at("buildings")) {
      Building b;
      for (const auto& v : jb.at("footprint")) {
        if (v.size() != 2) throw SceneError("footprint vertex must be [x, y]");
        b.footprint.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      }
      b.height = jb.at("height").get<double>();
      buildings.push_back(std::move(b));
    }
    std::vector<Receiver> receivers;
    for (const auto& jr : j.at("receivers")) {
      const auto& p = jr.at("pos");
      if (p.size() != 3) throw SceneError("receiver pos must be [x, y, z]");
      receivers.push_back({jr.at("id").get<std::string>(), {p.at(0).get<double>(), p.at(1).get<double>(),
                                                            p.at(2).get<double>()}});
    }
    return UrbanScene(j.at("scene_id").get<std::string>(), std::move(buildings), std::move(receivers));
  } catch (const nlohmann::json::exception& ex) {
    throw SceneError(std::string("scene: ") + ex.what());
  }
}

[[nodiscard]] inline UrbanScene parse_scene(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw SceneError(std::string("scene: ") + ex.what());
  }
  return scene_from_json(j);
}

[[nodiscard]] inline nlohmann::ordered_json scene_to_json(const UrbanScene& scene) {
  nlohmann::ordered_json j;
  j["scene_id"] = scene.scene_id();
  j["buildings"] = nlohmann::ordered_json::array();
  for (const auto& b : scene.buildings()) {
    nlohmann::ordered_json fp = nlohmann::ordered_json::array();
    for (const auto& v : b.footprint) fp.push_back({v.x, v.y});
    j["buildings"].push_back({{"footprint", fp}, {"height", b.height}});
  }
  j["receivers"] = nlohmann::ordered_json::array();
  for (const auto& r : scene.receivers()) {
    j["receivers"].push_back({{"id", r.id}, {"pos", {r.position.x, r.position.y, r.position.z}}});
  }
  return j;
}

struct SatelliteSpec {
  std::string sat_id;
  double azimuth_deg{};
  double elevation_deg{};

  friend bool operator==(const SatelliteSpec&, const SatelliteSpec&) = default;
};

inline constexpr std::string_view kSatelliteHeader = "sat_id,azimuth_deg,elevation_deg";

[[nodiscard]] inline std::vector<SatelliteSpec> parse_satellite_csv(std::string_view text) {
  std::vector<SatelliteSpec> out;
  csv::LineReader reader(text);
  if (!detail::expect_header(reader, kSatelliteHeader)) return out;
  detail::for_each_row(reader, 3, [&](const detail::FieldReader& row) {
    SatelliteSpec s;
    s.sat_id = row.sat_id(0);
    s.azimuth_deg = row.number(1, "azimuth_deg", 0.0, 360.0, true);
    s.elevation_deg = row.number(2, "elevation_deg", 0.0, 90.0, false);
    for (const auto& prev : out) {
      if (prev.sat_id == s.sat_id) throw MalformedRow(row.line_no, "duplicate sat_id " + s.sat_id);
    }
    out.push_back(std::move(s));
  });
  return out;
}

[[nodiscard]] inline std::string write_satellite_csv(const std::vector<SatelliteSpec>& sats) {
  std::string out(kSatelliteHeader);
  out += '\n';
  for (const auto& s : sats) {
    out += s.sat_id + ',' + csv::format_double(s.azimuth_deg) + ',' + csv::format_double(s.elevation_deg) + '\n';
  }
  return out;
}

}  // namespace sigclass
