/**
 * @file geometry.hpp
 * @brief 2.5D urban scenes and single-bounce ground-truth labeling.
 *
 * Buildings are vertical prisms standing on z = 0 with flat roofs. Satellites are
 * at infinity, so a satellite is just a unit direction in the local ENU frame.
 * A direct path is blocked when the ray toward the satellite touches any facade
 * rectangle or roof polygon; a reflected path exists when some facade admits a
 * specular bounce whose two legs are both unobstructed.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sigclass/error.hpp"
#include "sigclass/types.hpp"

namespace sigclass {

struct Vec2 {
  double x{}, y{};
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
  double x{}, y{}, z{};

  constexpr Vec3 operator+(const Vec3& o) const noexcept { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const noexcept { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const noexcept { return {x * s, y * s, z * s}; }
  [[nodiscard]] constexpr double dot(const Vec3& o) const noexcept { return x * o.x + y * o.y + z * o.z; }
  [[nodiscard]] double norm() const noexcept { return std::sqrt(dot(*this)); }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

[[nodiscard]] constexpr double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }
[[nodiscard]] constexpr Vec2 operator-(const Vec2& a, const Vec2& b) noexcept { return {a.x - b.x, a.y - b.y}; }

inline constexpr double kRayOriginEpsilon = 1e-6;  // m
inline constexpr double kContainmentTol = 1e-9;    // parametric

[[nodiscard]] inline double deg2rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }

/// Unit ENU vector toward a satellite.
struct SatDirection {
  Vec3 v;
};

/// (sin az cos el, cos az cos el, sin el); azimuth clockwise from north.
[[nodiscard]] inline SatDirection direction_from_az_el(double azimuth_deg, double elevation_deg) noexcept {
  const double az = deg2rad(azimuth_deg);
  const double el = deg2rad(elevation_deg);
  if (elevation_deg == 90.0) return {{0.0, 0.0, 1.0}};
  return {{std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)}};
}

struct Building {
  std::vector<Vec2> footprint;  // counter-clockwise, simple
  double height{};
};

struct Receiver {
  std::string id;
  Vec3 position;
};

/// One vertical wall of a building: the rectangle over footprint edge a->b from z = 0 to height.
struct Facade {
  Vec2 a, b;
  double height{};
  Vec2 normal;  // outward unit normal
  std::size_t building{};
};

/// No-signal ground truth is std::nullopt.
using GroundTruth = std::optional<SignalClass>;

[[nodiscard]] inline std::string_view ground_truth_name(const GroundTruth& g) noexcept {
  return g ? label_name(*g) : std::string_view("NONE");
}

namespace detail {

[[nodiscard]] inline double signed_area(const std::vector<Vec2>& poly) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

[[nodiscard]] inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) noexcept {
  const Vec2 ab = b - a;
  const Vec2 ap = p - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? (ap.x * ab.x + ap.y * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = ap.x - t * ab.x, dy = ap.y - t * ab.y;
  return std::sqrt(dx * dx + dy * dy);
}

[[nodiscard]] inline bool on_polygon_boundary(const Vec2& p, const std::vector<Vec2>& poly, double tol) noexcept {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]) <= tol) return true;
  }
  return false;
}

/// Crossing-number test; boundary points are not resolved here.
[[nodiscard]] inline bool crossing_inside(const Vec2& p, const std::vector<Vec2>& poly) noexcept {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

[[nodiscard]] inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) noexcept {
  const double v = cross(b - a, c - a);
  return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

[[nodiscard]] inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) noexcept {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

[[nodiscard]] inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) noexcept {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
         (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

[[nodiscard]] inline bool is_simple(const std::vector<Vec2>& poly) noexcept {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (poly[i] == poly[(i + 1) % n]) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Point-in-footprint with edges counted as inside.
[[nodiscard]] inline bool footprint_contains(const std::vector<Vec2>& poly, const Vec2& p,
                                             double edge_tol = kContainmentTol) noexcept {
  return detail::on_polygon_boundary(p, poly, edge_tol) || detail::crossing_inside(p, poly);
}

/// Immutable, validated 2.5D scene.
class UrbanScene {
 public:
  UrbanScene(std::string scene_id, std::vector<Building> buildings, std::vector<Receiver> receivers)
      : scene_id_(std::move(scene_id)), buildings_(std::move(buildings)), receivers_(std::move(receivers)) {
    for (std::size_t b = 0; b < buildings_.size(); ++b) {
      const auto& bld = buildings_[b];
      const auto where = "scene " + scene_id_ + ", building " + std::to_string(b);
      if (bld.footprint.size() < 3) throw SceneError(where + ": footprint needs at least 3 vertices");
      if (!std::isfinite(bld.height) || bld.height <= 0.0) throw SceneError(where + ": height must be > 0");
      for (const auto& v : bld.footprint) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw SceneError(where + ": non-finite vertex");
      }
      if (detail::signed_area(bld.footprint) <= 0.0) throw SceneError(where + ": footprint is not counter-clockwise");
      if (!detail::is_simple(bld.footprint)) throw SceneError(where + ": footprint is not simple");
      for (std::size_t i = 0; i < bld.footprint.size(); ++i) {
        const Vec2 a = bld.footprint[i];
        const Vec2 b2 = bld.footprint[(i + 1) % bld.footprint.size()];
        const double len = std::hypot(b2.x - a.x, b2.y - a.y);
        facades_.push_back({a, b2, bld.height, {(b2.y - a.y) / len, -(b2.x - a.x) / len}, b});
      }
    }
    for (const auto& r : receivers_) {
      const auto& p = r.position;
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        throw SceneError("scene " + scene_id_ + ": receiver " + r.id + " has a non-finite position");
      }
      for (const auto& bld : buildings_) {
        const Vec2 xy{p.x, p.y};
        if (p.z > 0.0 && p.z < bld.height && detail::crossing_inside(xy, bld.footprint) &&
            !detail::on_polygon_boundary(xy, bld.footprint, 0.0)) {
          throw SceneError("scene " + scene_id_ + ": receiver " + r.id + " is inside a building");
        }
      }
    }
  }

  [[nodiscard]] const std::string& scene_id() const noexcept { return scene_id_; }
  [[nodiscard]] const std::vector<Building>& buildings() const noexcept { return buildings_; }
  [[nodiscard]] const std::vector<Receiver>& receivers() const noexcept { return receivers_; }
  [[nodiscard]] const std::vector<Facade>& facades() const noexcept { return facades_; }

  [[nodiscard]] const Receiver* find_receiver(std::string_view id) const noexcept {
    for (const auto& r : receivers_) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }

 private:
  std::string scene_id_;
  std::vector<Building> buildings_;
  std::vector<Receiver> receivers_;
  std::vector<Facade> facades_;
};

namespace detail {

inline constexpr std::size_t kNoSkip = std::numeric_limits<std::size_t>::max();

/// Hit parameter t in (t_min, t_max] where origin + t*dir meets the facade rectangle.
[[nodiscard]] inline bool hits_facade(const Facade& f, const Vec3& o, const Vec3& d, double t_min,
                                      double t_max) noexcept {
  const double denom = f.normal.x * d.x + f.normal.y * d.y;
  if (std::abs(denom) < 1e-15) return false;
  const double t = (f.normal.x * (f.a.x - o.x) + f.normal.y * (f.a.y - o.y)) / denom;
  if (!(t > t_min && t <= t_max)) return false;
  const Vec3 q = o + d * t;
  const Vec2 e = f.b - f.a;
  const double s = ((q.x - f.a.x) * e.x + (q.y - f.a.y) * e.y) / (e.x * e.x + e.y * e.y);
  const double v = q.z / f.height;
  return s >= -kContainmentTol && s <= 1.0 + kContainmentTol && v >= -kContainmentTol && v <= 1.0 + kContainmentTol;
}

[[nodiscard]] inline bool hits_roof(const Building& b, const Vec3& o, const Vec3& d, double t_min,
                                    double t_max) noexcept {
  if (std::abs(d.z) < 1e-15) return false;
  const double t = (b.height - o.z) / d.z;
  if (!(t > t_min && t <= t_max)) return false;
  const Vec3 q = o + d * t;
  return footprint_contains(b.footprint, {q.x, q.y});
}

/// Any surface met along origin + t*dir, t in (t_min, t_max], ignoring facade index skip.
[[nodiscard]] inline bool path_obstructed(const UrbanScene& scene, const Vec3& o, const Vec3& d, double t_min,
                                          double t_max, std::size_t skip) noexcept {
  const auto& facades = scene.facades();
  for (std::size_t i = 0; i < facades.size(); ++i) {
    if (i != skip && hits_facade(facades[i], o, d, t_min, t_max)) return true;
  }
  for (const auto& b : scene.buildings()) {
    if (hits_roof(b, o, d, t_min, t_max)) return true;
  }
  return false;
}

}  // namespace detail

/// True iff receiver + t*dir (t > 1e-6) touches any facade rectangle or roof polygon.
[[nodiscard]] inline bool los_blocked(const UrbanScene& scene, const Vec3& receiver, const SatDirection& dir) noexcept {
  return detail::path_obstructed(scene, receiver, dir.v, kRayOriginEpsilon, std::numeric_limits<double>::infinity(),
                                 detail::kNoSkip);
}

/// Specular point on facade @p f for a receiver in front of it, if the mirror construction lands inside the wall.
[[nodiscard]] inline std::optional<Vec3> specular_point(const Facade& f, const Vec3& receiver,
                                                        const SatDirection& dir) noexcept {
  const Vec3 n{f.normal.x, f.normal.y, 0.0};
  const double front = n.dot(receiver - Vec3{f.a.x, f.a.y, 0.0});
  const double toward = n.dot(dir.v);
  if (front <= 0.0 || toward <= 0.0) return std::nullopt;
  const Vec3 image = receiver - n * (2.0 * front);
  const Vec3 q = image + dir.v * (front / toward);
  const Vec2 e = f.b - f.a;
  const double s = ((q.x - f.a.x) * e.x + (q.y - f.a.y) * e.y) / (e.x * e.x + e.y * e.y);
  const double v = q.z / f.height;
  if (s < -kContainmentTol || s > 1.0 + kContainmentTol || v < -kContainmentTol || v > 1.0 + kContainmentTol) {
    return std::nullopt;
  }
  return q;
}

/// True iff some facade admits an unobstructed single-bounce specular path from the satellite to the receiver.
[[nodiscard]] inline bool reflection_exists(const UrbanScene& scene, const Vec3& receiver,
                                            const SatDirection& dir) noexcept {
  const auto& facades = scene.facades();
  for (std::size_t i = 0; i < facades.size(); ++i) {
    const auto q = specular_point(facades[i], receiver, dir);
    if (!q) continue;
    const Vec3 leg = receiver - *q;
    const double len = leg.norm();
    if (len <= 2.0 * kRayOriginEpsilon) continue;
    // receiver -> wall leg, then wall -> satellite leg; the reflecting wall itself is exempt
    if (detail::path_obstructed(scene, receiver, leg * (-1.0 / len), kRayOriginEpsilon, len - kRayOriginEpsilon, i))
      continue;
    if (detail::path_obstructed(scene, *q, dir.v, kRayOriginEpsilon, std::numeric_limits<double>::infinity(), i))
      continue;
    return true;
  }
  return false;
}

[[nodiscard]] inline GroundTruth label_condition(const UrbanScene& scene, const Vec3& receiver,
                                                 const SatDirection& dir) noexcept {
  const bool blocked = los_blocked(scene, receiver, dir);
  const bool reflected = reflection_exists(scene, receiver, dir);
  if (!blocked) return reflected ? SignalClass::LosNlos : SignalClass::LosOnly;
  if (reflected) return SignalClass::NlosOnly;
  return std::nullopt;
}

}  // namespace sigclass
