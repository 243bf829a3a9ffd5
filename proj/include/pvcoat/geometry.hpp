#pragma once

// 2D convex-polygon primitives: areas, containment, clipping, hulls and
// minimum-area rectangles. Used for rotor-disk/panel overlap and corner
// extraction.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace pvcoat::geom {

using Vec2 = Eigen::Vector2d;
using Polygon2 = std::vector<Vec2>;  // CCW unless stated otherwise

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline double signed_area(const Polygon2& poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross2(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * twice;
}

inline double area(const Polygon2& poly) { return std::abs(signed_area(poly)); }

inline void make_ccw(Polygon2& poly) {
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
}

// Convexity check for a CCW polygon; collinear runs are allowed when
// `strict` is false.
inline bool is_convex_ccw(const Polygon2& poly, bool strict = false,
                          double tol = 1e-12) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2& c = poly[(i + 2) % n];
    const double turn = cross2(b - a, c - b);
    if (turn < (strict ? tol : -tol)) return false;
  }
  return true;
}

inline bool point_in_convex(const Vec2& q, const Polygon2& poly,
                            double tol = 1e-9) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (cross2(b - a, q - a) < -tol) return false;
  }
  return true;
}

inline double point_segment_distance(const Vec2& q, const Vec2& a,
                                     const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (q - a).norm();
  const double t = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return (q - (a + t * ab)).norm();
}

inline double distance_to_boundary(const Vec2& q, const Polygon2& poly) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(q, poly[i], poly[(i + 1) % n]));
  }
  return best;
}

// Sutherland-Hodgman clip of `subject` against a convex CCW `clip` polygon.
inline Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip) {
  Polygon2 out = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % m];
    const Vec2 edge = b - a;
    Polygon2 in;
    in.swap(out);
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& cur = in[i];
      const Vec2& nxt = in[(i + 1) % n];
      const double dc = cross2(edge, cur - a);
      const double dn = cross2(edge, nxt - a);
      if (dc >= 0.0) out.push_back(cur);
      if ((dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0)) {
        out.push_back(cur + (nxt - cur) * (dc / (dc - dn)));
      }
    }
  }
  return out;
}

// Regular n-gon approximation of a disk, CCW, first vertex at angle 0.
inline Polygon2 regular_ngon(const Vec2& center, double radius, int segments) {
  Polygon2 poly;
  poly.reserve(static_cast<std::size_t>(segments));
  for (int k = 0; k < segments; ++k) {
    const double ang = 2.0 * M_PI * static_cast<double>(k) / segments;
    poly.emplace_back(center.x() + radius * std::cos(ang),
                      center.y() + radius * std::sin(ang));
  }
  return poly;
}

// Andrew monotone chain. Returns CCW hull without repeated endpoint.
inline Polygon2 convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0)
      --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

struct OrientedRect {
  Vec2 center{0.0, 0.0};
  Vec2 axis_u{1.0, 0.0};  // unit; axis_v is its +90 deg rotation
  Vec2 axis_v{0.0, 1.0};
  double half_u = 0.0;
  double half_v = 0.0;

  // CCW corner order (axis_v = rot90(axis_u) guarantees orientation).
  std::array<Vec2, 4> corners() const {
    return {center + half_u * axis_u + half_v * axis_v,
            center - half_u * axis_u + half_v * axis_v,
            center - half_u * axis_u - half_v * axis_v,
            center + half_u * axis_u - half_v * axis_v};
  }
};

// Minimum-area oriented bounding rectangle via rotating over hull edges.
// Degenerates gracefully: collinear input yields half_v == 0.
inline OrientedRect min_area_rect(const std::vector<Vec2>& pts) {
  OrientedRect rect;
  if (pts.empty()) return rect;
  const Polygon2 hull = convex_hull(pts);
  if (hull.size() == 1) {
    rect.center = hull[0];
    return rect;
  }
  if (hull.size() == 2) {
    Vec2 d = hull[1] - hull[0];
    const double len = d.norm();
    rect.axis_u = (len > 0.0) ? Vec2(d / len) : Vec2(1.0, 0.0);
    rect.axis_v = Vec2(-rect.axis_u.y(), rect.axis_u.x());
    rect.center = 0.5 * (hull[0] + hull[1]);
    rect.half_u = 0.5 * len;
    rect.half_v = 0.0;
    return rect;
  }
  double best_area = std::numeric_limits<double>::infinity();
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 dir = hull[(i + 1) % n] - hull[i];
    const double len = dir.norm();
    if (len <= 0.0) continue;
    dir /= len;
    const Vec2 perp(-dir.y(), dir.x());
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (const Vec2& p : hull) {
      const double u = p.dot(dir), v = p.dot(perp);
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    const double a = (umax - umin) * (vmax - vmin);
    if (a < best_area) {
      best_area = a;
      rect.axis_u = dir;
      rect.axis_v = perp;
      rect.half_u = 0.5 * (umax - umin);
      rect.half_v = 0.5 * (vmax - vmin);
      rect.center = 0.5 * (umin + umax) * dir + 0.5 * (vmin + vmax) * perp;
    }
  }
  return rect;
}

// Fraction of a disk's area inside a convex CCW polygon, computed by
// clipping a regular n-gon approximation of the disk. Returns exact 0/1
// when the disk is fully outside/inside.
inline double disk_polygon_overlap(const Vec2& center, double radius,
                                   const Polygon2& poly, int segments = 64) {
  if (poly.size() < 3 || radius <= 0.0) return 0.0;
  const double d = distance_to_boundary(center, poly);
  const bool inside = point_in_convex(center, poly);
  if (inside && d >= radius) return 1.0;
  if (!inside && d >= radius) return 0.0;
  const Polygon2 disk = regular_ngon(center, radius, segments);
  const Polygon2 clipped = clip_convex(disk, poly);
  if (clipped.size() < 3) return 0.0;
  const double frac = area(clipped) / area(disk);
  return std::clamp(frac, 0.0, 1.0);
}

}  // namespace pvcoat::geom
