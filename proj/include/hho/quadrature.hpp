// Quadrature rules on mesh faces (Gauss-Legendre) and on polygonal elements
// (centroid fan of triangles, each carrying a collapsed tensor Gauss rule).
// Points are physical coordinates; weights carry the length/area measure.

#ifndef HHO_QUADRATURE_HPP
#define HHO_QUADRATURE_HPP

#include "hho/mesh.hpp"

#include <cmath>
#include <vector>

namespace hho {

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on
/// the Legendre recurrence. Exact for polynomials of degree 2n-1.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

/// Rule on a mesh face, exact for polynomials of the requested degree along
/// the face.
inline QuadratureRule face_quadrature(const Mesh& mesh, int iF, int exactness) {
  if (exactness < 0) throw Error("face_quadrature: negative exactness");
  const Face& f = mesh.face(iF);
  const Vec2 a = mesh.vertex(f.vertex_ids[0]);
  const Vec2 b = mesh.vertex(f.vertex_ids[1]);
  const int n = (exactness + 2) / 2; // 2n-1 >= exactness
  std::vector<double> x, w;
  gauss_legendre(std::max(n, 1), x, w);
  QuadratureRule q;
  q.points.reserve(x.size());
  q.weights.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = 0.5 * (1.0 + x[i]);
    q.points.push_back(a + s * (b - a));
    q.weights.push_back(0.5 * w[i] * f.length);
  }
  return q;
}

namespace detail {

/// Collapsed tensor Gauss rule on the triangle (p0,p1,p2), exact for total
/// degree <= exactness. Signed: a negatively oriented triangle contributes
/// negative weights, so fans of non-convex (star-shaped) polygons stay exact.
inline void append_triangle_rule(const Vec2& p0, const Vec2& p1, const Vec2& p2, int exactness,
                                 QuadratureRule& out) {
  const double signed_area =
      0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
  if (std::abs(signed_area) < 1e-300) return;
  const int n = (exactness + 3) / 2; // covers the (1-s) collapse factor
  std::vector<double> x, w;
  gauss_legendre(std::max(n, 1), x, w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = 0.5 * (1.0 + x[i]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double t = 0.5 * (1.0 + x[j]);
      const double u = s, v = t * (1.0 - s);
      out.points.push_back(p0 + u * (p1 - p0) + v * (p2 - p0));
      out.weights.push_back(0.25 * w[i] * w[j] * (1.0 - s) * 2.0 * signed_area);
    }
  }
}

} // namespace detail

/// Rule on a polygonal element, built by fan-triangulating from the centroid.
inline QuadratureRule element_quadrature(const Mesh& mesh, int iT, int exactness) {
  if (exactness < 0) throw Error("element_quadrature: negative exactness");
  const std::vector<Vec2> loop = mesh.element_loop(iT);
  if (!polygon_is_simple(loop))
    throw Error("element_quadrature: element " + std::to_string(iT) + " is not a simple polygon");
  const Vec2 g = mesh.element(iT).centroid;
  QuadratureRule q;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i)
    detail::append_triangle_rule(g, loop[i], loop[(i + 1) % n], exactness, q);
  return q;
}

} // namespace hho

#endif
