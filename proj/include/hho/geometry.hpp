// Basic 2D geometric types and polygon utilities shared across the library.

#ifndef HHO_GEOMETRY_HPP
#define HHO_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hho {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Error thrown on invalid geometry, malformed input files or configuration
/// problems. Carries a human-readable message, usually with the offending
/// element or line index.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Axis-aligned rectangle, used to describe Cartesian grid domains.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Signed area of a polygon given by its vertex loop (positive if CCW).
inline double polygon_signed_area(const std::vector<Vec2>& loop) {
  double acc = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[(i + 1) % n];
    acc += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * acc;
}

/// Area-weighted centroid of a simple polygon (shoelace formulas).
inline Vec2 polygon_centroid(const std::vector<Vec2>& loop) {
  double area = 0.0;
  Vec2 c = Vec2::Zero();
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[(i + 1) % n];
    const double w = a.x() * b.y() - b.x() * a.y();
    area += w;
    c += w * (a + b);
  }
  area *= 0.5;
  if (std::abs(area) < 1e-300) throw Error("polygon_centroid: degenerate polygon");
  return c / (6.0 * area);
}

/// Diameter of a point set (max pairwise distance).
inline double points_diameter(const std::vector<Vec2>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

/// Convex hull (monotone chain), returned CCW without repetition.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Whether a point lies inside (or on) the convex hull of a point set,
/// up to a small tolerance relative to the hull diameter.
inline bool point_in_convex_hull(const Vec2& p, const std::vector<Vec2>& pts, double rel_tol = 1e-12) {
  const std::vector<Vec2> hull = convex_hull(pts);
  if (hull.size() < 3) return false;
  const double tol = rel_tol * points_diameter(pts);
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % n];
    const double c = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (c < -tol) return false;
  }
  return true;
}

/// Proper intersection test between open segments (a,b) and (c,d).
/// Shared endpoints do not count as intersections.
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

/// Whether a vertex loop describes a simple polygon: no repeated vertices and
/// no crossing between non-adjacent edges.
inline bool polygon_is_simple(const std::vector<Vec2>& loop) {
  const std::size_t n = loop.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((loop[i] - loop[j]).norm() < 1e-14 * (1.0 + loop[i].norm())) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n])) return false;
    }
  }
  return true;
}

} // namespace hho

#endif
