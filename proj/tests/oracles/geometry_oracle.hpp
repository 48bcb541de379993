// Brute-force visibility and reflection oracle for scenes of convex prisms.
//
// Obstruction uses the exact signed distance of each prism (footprint extruded
// from z = 0 to its height). Along a ray that distance is convex in t, so a
// golden-section search finds its minimum; the ray touches the prism iff that
// minimum is <= 0. Minima within kBand of zero are reported as Ambiguous.
//
// Reflection searches each wall rectangle for the point from which the mirrored
// satellite direction passes through the receiver, by grid scan plus pattern
// search, then checks both legs with the same signed-distance test.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

enum class Tri { No, Yes, Ambiguous };

struct P2 {
  double x, y;
};
struct P3 {
  double x, y, z;
};

struct Prism {
  std::vector<P2> poly;  // convex, counter-clockwise
  double height;
};

inline constexpr double kBand = 1e-6;

inline double seg_dist(P2 p, P2 a, P2 b) {
  const double ex = b.x - a.x, ey = b.y - a.y;
  double t = ((p.x - a.x) * ex + (p.y - a.y) * ey) / (ex * ex + ey * ey);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * ex, p.y - a.y - t * ey);
}

/// Signed distance to the convex polygon; negative inside.
inline double poly_sd(const std::vector<P2>& poly, P2 p) {
  double d = std::numeric_limits<double>::infinity();
  bool inside = true;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2 a = poly[i], b = poly[(i + 1) % poly.size()];
    d = std::min(d, seg_dist(p, a, b));
    if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < 0.0) inside = false;
  }
  return inside ? -d : d;
}

inline double prism_sd(const Prism& b, P3 p) {
  const double w0 = poly_sd(b.poly, {p.x, p.y});
  const double w1 = std::max(-p.z, p.z - b.height);
  const double outside = std::hypot(std::max(w0, 0.0), std::max(w1, 0.0));
  return std::min(std::max(w0, w1), 0.0) + outside;
}

/// Minimum of prism_sd over o + t*d, t in [t0, t1] (convex in t).
inline double min_sd_on_ray(const Prism& b, P3 o, P3 d, double t0, double t1) {
  auto f = [&](double t) { return prism_sd(b, {o.x + t * d.x, o.y + t * d.y, o.z + t * d.z}); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = t0, hi = t1;
  double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
  double f1 = f(m1), f2 = f(m2);
  for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + hi); ++i) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - g * (hi - lo);
      f1 = f(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + g * (hi - lo);
      f2 = f(m2);
    }
  }
  return std::min({f(t0), f(t1), f1, f2});
}

/// Yes if the segment/ray meets some prism, No if it clears all by more than kBand.
inline Tri obstructed(const std::vector<Prism>& scene, P3 o, P3 d, double t0, double t1) {
  Tri out = Tri::No;
  for (const auto& b : scene) {
    const double m = min_sd_on_ray(b, o, d, t0, t1);
    if (m < -kBand) return Tri::Yes;
    if (m <= kBand) out = Tri::Ambiguous;
  }
  return out;
}

/// Ray far end: beyond every building top and footprint.
inline constexpr double kFar = 5000.0;

inline Tri los_blocked(const std::vector<Prism>& scene, P3 rx, P3 dir) {
  return obstructed(scene, rx, dir, 1e-6, kFar);
}

inline P3 unit(P3 v) {
  const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return {v.x / n, v.y / n, v.z / n};
}

/// One wall: footprint edge a->b of prism b_index, from z = 0 to height.
inline Tri wall_reflection(const std::vector<Prism>& scene, std::size_t b_index, std::size_t edge, P3 rx, P3 dir) {
  const Prism& b = scene[b_index];
  const P2 a = b.poly[edge], c = b.poly[(edge + 1) % b.poly.size()];
  const double len = std::hypot(c.x - a.x, c.y - a.y);
  const P3 n{(c.y - a.y) / len, -(c.x - a.x) / len, 0.0};
  const double nd = n.x * dir.x + n.y * dir.y;
  // Direction a wave from the satellite travels after a specular bounce off this wall.
  const P3 r{-dir.x + 2.0 * nd * n.x, -dir.y + 2.0 * nd * n.y, -dir.z};
  auto point = [&](double s, double v) { return P3{a.x + s * (c.x - a.x), a.y + s * (c.y - a.y), v * b.height}; };
  // Squared distance from the receiver to the reflected ray q + t*r, t >= 0:
  // a convex quadratic in (s, v), zero exactly at the specular point.
  auto residual = [&](double s, double v) {
    const P3 q = point(s, v);
    const P3 w{rx.x - q.x, rx.y - q.y, rx.z - q.z};
    const double along = w.x * r.x + w.y * r.y + w.z * r.z;
    const double px = w.x - along * r.x, py = w.y - along * r.y, pz = w.z - along * r.z;
    const double behind = std::min(along, 0.0);
    return px * px + py * py + pz * pz + behind * behind;
  };

  double best_s = 0.0, best_v = 0.0, best = std::numeric_limits<double>::infinity();
  constexpr int kGrid = 16;
  for (int i = 0; i <= kGrid; ++i) {
    for (int j = 0; j <= kGrid; ++j) {
      const double s = static_cast<double>(i) / kGrid, v = static_cast<double>(j) / kGrid;
      if (const double e = residual(s, v); e < best) best = e, best_s = s, best_v = v;
    }
  }
  // Pattern search: the step shrinks only when no neighbour improves.
  double step = 1.0 / kGrid;
  for (int it = 0; it < 4000 && step > 1e-15; ++it) {
    const double cs = best_s, cv = best_v;
    for (int i = -1; i <= 1; ++i) {
      for (int j = -1; j <= 1; ++j) {
        const double s = std::clamp(cs + step * i, 0.0, 1.0);
        const double v = std::clamp(cv + step * j, 0.0, 1.0);
        if (const double e = residual(s, v); e < best) best = e, best_s = s, best_v = v;
      }
    }
    if (best_s == cs && best_v == cv) step *= 0.5;
  }
  best = std::sqrt(best);  // meters

  const double edge_gap = std::min({best_s, 1.0 - best_s, best_v, 1.0 - best_v});
  if (best > kBand) return edge_gap <= kBand && best <= 1e-4 ? Tri::Ambiguous : Tri::No;
  const bool near_edge = edge_gap <= kBand;

  const P3 q = point(best_s, best_v);
  const double leg = std::sqrt((rx.x - q.x) * (rx.x - q.x) + (rx.y - q.y) * (rx.y - q.y) + (rx.z - q.z) * (rx.z - q.z));
  const P3 to_rx = unit({rx.x - q.x, rx.y - q.y, rx.z - q.z});
  constexpr double kLegStart = 1e-3;
  const Tri down = obstructed(scene, q, to_rx, kLegStart, leg - 1e-6);
  const Tri up = obstructed(scene, q, dir, kLegStart, kFar);
  if (down == Tri::Yes || up == Tri::Yes) return near_edge ? Tri::Ambiguous : Tri::No;
  if (near_edge || down == Tri::Ambiguous || up == Tri::Ambiguous) return Tri::Ambiguous;
  return Tri::Yes;
}

inline Tri reflection_exists(const std::vector<Prism>& scene, P3 rx, P3 dir) {
  Tri out = Tri::No;
  for (std::size_t b = 0; b < scene.size(); ++b) {
    for (std::size_t e = 0; e < scene[b].poly.size(); ++e) {
      const Tri t = wall_reflection(scene, b, e, rx, dir);
      if (t == Tri::Yes) return Tri::Yes;
      if (t == Tri::Ambiguous) out = Tri::Ambiguous;
    }
  }
  return out;
}

}  // namespace oracle
