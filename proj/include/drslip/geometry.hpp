#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "error.hpp"

namespace drslip {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

using Polygon = std::vector<Vec2>;  // counter-clockwise, no repeated vertex

inline double signed_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return a / 2.0;
}

// Monotone chain; collinear points dropped.
inline Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline Vec2 centroid(const Polygon& p) {
  const double a = signed_area(p);
  if (std::abs(a) < 1e-15) fail(ErrorKind::degenerate_geometry, "centroid of a zero-area polygon");
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 u = p[i], v = p[(i + 1) % p.size()];
    const double w = cross(u, v);
    cx += (u.x + v.x) * w;
    cy += (u.y + v.y) * w;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

// Minimum over edges of the signed distance from the edge's supporting line
// (positive inside). Inside the polygon this is the distance to the boundary;
// subtracting a margin gives the slack against the polygon inset by it.
inline double edge_clearance(const Polygon& p, Vec2 q) {
  double best = INFINITY;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 a = p[i], b = p[(i + 1) % p.size()];
    best = std::min(best, cross(b - a, q - a) / norm(b - a));
  }
  return best;
}

inline bool strictly_inside(const Polygon& p, Vec2 q) { return edge_clearance(p, q) > 0.0; }

// Sutherland-Hodgman clip of one convex polygon by another.
inline Polygon intersect_convex(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Vec2 a = clip[i], b = clip[(i + 1) % clip.size()];
    auto side = [&](Vec2 q) { return cross(b - a, q - a); };
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Vec2 p = in[j], q = in[(j + 1) % in.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
    }
  }
  return out;
}

inline double overlap_area(const Polygon& a, const Polygon& b) {
  const Polygon c = intersect_convex(a, b);
  return c.size() < 3 ? 0.0 : std::abs(signed_area(c));
}

}  // namespace drslip
