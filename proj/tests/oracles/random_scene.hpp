// Random scenes of convex prisms, built both as oracle input and as a library scene.
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "geometry_oracle.hpp"
#include "sigclass/geometry.hpp"
#include "sigclass/rng.hpp"

namespace oracle {

struct RandomScene {
  std::vector<Prism> prisms;
  P3 receiver;
  sigclass::UrbanScene scene;
};

/// Up to max_buildings disjoint convex prisms and one receiver at least 0.5 m from every footprint.
inline RandomScene random_scene(sigclass::SeedStream& rng, std::size_t max_buildings) {
  std::vector<Prism> prisms;
  std::vector<std::pair<P2, double>> discs;
  const std::size_t want = 1 + static_cast<std::size_t>(rng.bounded(max_buildings));
  for (int attempt = 0; prisms.size() < want && attempt < 200; ++attempt) {
    const P2 c{rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0)};
    const double ra = rng.uniform(3.0, 15.0), rb = rng.uniform(3.0, 15.0);
    const double rot = rng.uniform(0.0, 2.0 * std::numbers::pi);
    bool clash = false;
    for (const auto& [dc, dr] : discs) clash = clash || std::hypot(c.x - dc.x, c.y - dc.y) < dr + std::max(ra, rb) + 1.0;
    if (clash) continue;
    // Vertices on an ellipse in angular order form a convex polygon.
    const int n = 3 + static_cast<int>(rng.bounded(5));
    Prism p;
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * (i + rng.uniform(0.1, 0.9)) / n;
      const double ex = ra * std::cos(t), ey = rb * std::sin(t);
      p.poly.push_back({c.x + ex * std::cos(rot) - ey * std::sin(rot), c.y + ex * std::sin(rot) + ey * std::cos(rot)});
    }
    p.height = rng.uniform(5.0, 60.0);
    discs.push_back({c, std::max(ra, rb)});
    prisms.push_back(std::move(p));
  }

  P3 rx{};
  for (;;) {
    rx = {rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), rng.uniform(0.5, 3.0)};
    bool ok = true;
    for (const auto& p : prisms) ok = ok && poly_sd(p.poly, {rx.x, rx.y}) >= 0.5;
    if (ok) break;
  }

  std::vector<sigclass::Building> buildings;
  for (const auto& p : prisms) {
    sigclass::Building b;
    for (const auto& v : p.poly) b.footprint.push_back({v.x, v.y});
    b.height = p.height;
    buildings.push_back(std::move(b));
  }
  sigclass::UrbanScene scene("random", std::move(buildings), {{"rx", {rx.x, rx.y, rx.z}}});
  return {std::move(prisms), rx, std::move(scene)};
}

struct Direction {
  double azimuth_deg;
  double elevation_deg;
};

inline Direction random_direction(sigclass::SeedStream& rng) {
  return {rng.uniform(0.0, 360.0), rng.uniform(2.0, 88.0)};
}

inline P3 to_p3(const sigclass::SatDirection& d) { return {d.v.x, d.v.y, d.v.z}; }

}  // namespace oracle
