// Scaled monomial bases on elements (2D) and faces (1D), with a conditioning
// guard that switches to a Gram-Cholesky orthonormalized basis when the raw
// monomial Gram matrix becomes too ill-conditioned. L2-orthogonal projectors
// are provided on top.

#ifndef HHO_BASIS_HPP
#define HHO_BASIS_HPP

#include "hho/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <utility>
#include <vector>

namespace hho {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

inline int poly_dim_2d(int degree) { return (degree + 1) * (degree + 2) / 2; }
inline int poly_dim_1d(int degree) { return degree + 1; }

/// Basis of P^l on an element: monomials ((x-x_T)/h_T)^alpha, |alpha| <= l,
/// in degree-lexicographic order, optionally recombined by a coefficient
/// matrix (rows = functions) after orthonormalization.
class ElementBasis {
public:
  ElementBasis() = default;
  ElementBasis(int degree, const Vec2& center, double h)
      : degree_(degree), center_(center), h_(h), coeff_(Eigen::MatrixXd::Identity(poly_dim_2d(degree), poly_dim_2d(degree))) {
    powers_.reserve(poly_dim_2d(degree));
    for (int l = 0; l <= degree; ++l)
      for (int i = l; i >= 0; --i) powers_.push_back({i, l - i});
  }

  int degree() const { return degree_; }
  int dimension() const { return static_cast<int>(powers_.size()); }
  const Vec2& center() const { return center_; }
  double scale() const { return h_; }
  bool orthonormalized() const { return orthonormalized_; }

  /// Values of all basis functions at a point.
  Eigen::VectorXd eval(const Vec2& x) const { return coeff_ * raw_eval(x); }

  /// Gradients of all basis functions at a point (N x 2).
  Eigen::MatrixXd eval_gradients(const Vec2& x) const { return coeff_ * raw_gradients(x); }

  /// Value table at a list of points (nq x N).
  Eigen::MatrixXd values(const std::vector<Vec2>& pts) const {
    Eigen::MatrixXd tab(pts.size(), dimension());
    for (std::size_t q = 0; q < pts.size(); ++q) tab.row(q) = eval(pts[q]).transpose();
    return tab;
  }

  /// Gradient tables at a list of points: pair of (nq x N) for d/dx and d/dy.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradients(const std::vector<Vec2>& pts) const {
    Eigen::MatrixXd gx(pts.size(), dimension()), gy(pts.size(), dimension());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Eigen::MatrixXd g = eval_gradients(pts[q]);
      gx.row(q) = g.col(0).transpose();
      gy.row(q) = g.col(1).transpose();
    }
    return {gx, gy};
  }

  /// Replaces the basis by a Gram-Cholesky orthonormalization computed from
  /// the given quadrature rule (which must be exact at degree 2*degree).
  void orthonormalize(const QuadratureRule& qr) {
    const Eigen::MatrixXd g = gram(qr);
    const Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw Error("basis: Gram matrix not positive definite");
    coeff_ = llt.matrixL().solve(coeff_);
    orthonormalized_ = true;
  }

  /// Gram matrix under the given rule.
  Eigen::MatrixXd gram(const QuadratureRule& qr) const {
    const Eigen::MatrixXd tab = values(qr.points);
    return tab.transpose() * Eigen::Map<const Eigen::VectorXd>(qr.weights.data(), qr.size()).asDiagonal() * tab;
  }

private:
  Eigen::VectorXd raw_eval(const Vec2& x) const {
    const double xi = (x.x() - center_.x()) / h_;
    const double eta = (x.y() - center_.y()) / h_;
    Eigen::VectorXd v(dimension());
    for (int a = 0; a < dimension(); ++a)
      v[a] = ipow(xi, powers_[a][0]) * ipow(eta, powers_[a][1]);
    return v;
  }

  Eigen::MatrixXd raw_gradients(const Vec2& x) const {
    const double xi = (x.x() - center_.x()) / h_;
    const double eta = (x.y() - center_.y()) / h_;
    Eigen::MatrixXd g(dimension(), 2);
    for (int a = 0; a < dimension(); ++a) {
      const int px = powers_[a][0], py = powers_[a][1];
      g(a, 0) = px > 0 ? px * ipow(xi, px - 1) * ipow(eta, py) / h_ : 0.0;
      g(a, 1) = py > 0 ? py * ipow(xi, px) * ipow(eta, py - 1) / h_ : 0.0;
    }
    return g;
  }

  static double ipow(double b, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }

  int degree_ = 0;
  Vec2 center_ = Vec2::Zero();
  double h_ = 1.0;
  Eigen::MatrixXd coeff_;
  std::vector<std::array<int, 2>> powers_;
  bool orthonormalized_ = false;
};

/// Basis of P^l on a face: monomials s^j in the arc-length coordinate
/// s = (x - midpoint).tangent / (h_F/2), shared by both adjacent elements.
class FaceBasis {
public:
  FaceBasis() = default;
  FaceBasis(int degree, const Vec2& a, const Vec2& b)
      : degree_(degree), mid_(0.5 * (a + b)), half_((b - a).norm() / 2.0), tangent_((b - a).normalized()) {}

  FaceBasis(int degree, const Mesh& mesh, int iF)
      : FaceBasis(degree, mesh.vertex(mesh.face(iF).vertex_ids[0]), mesh.vertex(mesh.face(iF).vertex_ids[1])) {}

  int degree() const { return degree_; }
  int dimension() const { return degree_ + 1; }

  double coordinate(const Vec2& x) const { return (x - mid_).dot(tangent_) / half_; }

  Eigen::VectorXd eval(const Vec2& x) const {
    const double s = coordinate(x);
    Eigen::VectorXd v(dimension());
    double p = 1.0;
    for (int j = 0; j <= degree_; ++j) {
      v[j] = p;
      p *= s;
    }
    return v;
  }

  Eigen::MatrixXd values(const std::vector<Vec2>& pts) const {
    Eigen::MatrixXd tab(pts.size(), dimension());
    for (std::size_t q = 0; q < pts.size(); ++q) tab.row(q) = eval(pts[q]).transpose();
    return tab;
  }

  Eigen::MatrixXd gram(const QuadratureRule& qr) const {
    const Eigen::MatrixXd tab = values(qr.points);
    return tab.transpose() * Eigen::Map<const Eigen::VectorXd>(qr.weights.data(), qr.size()).asDiagonal() * tab;
  }

private:
  int degree_ = 0;
  Vec2 mid_ = Vec2::Zero();
  double half_ = 1.0;
  Vec2 tangent_ = Vec2::UnitX();
};

/// Condition threshold beyond which element bases are orthonormalized.
constexpr double kGramConditionGuard = 1e8;

/// Builds the element basis of the given degree with the conditioning guard:
/// if the monomial Gram condition number exceeds the guard, the basis is
/// orthonormalized in place. The rule must integrate degree 2*degree exactly.
inline ElementBasis make_element_basis(const Mesh& mesh, int iT, int degree, const QuadratureRule& qr,
                                       bool guard = true) {
  const Element& el = mesh.element(iT);
  ElementBasis basis(degree, el.centroid, el.diameter);
  if (guard) {
    const Eigen::MatrixXd g = basis.gram(qr);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    if (lmin <= 0.0 || lmax / lmin > kGramConditionGuard) basis.orthonormalize(qr);
  }
  return basis;
}

/// L2-orthogonal projection of a scalar field on the element basis.
inline Eigen::VectorXd l2_project_element(const ScalarField& f, const ElementBasis& basis,
                                          const QuadratureRule& qr) {
  const Eigen::MatrixXd tab = basis.values(qr.points);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.dimension());
  for (int q = 0; q < qr.size(); ++q) rhs += qr.weights[q] * f(qr.points[q]) * tab.row(q).transpose();
  const Eigen::MatrixXd g = tab.transpose() * Eigen::Map<const Eigen::VectorXd>(qr.weights.data(), qr.size()).asDiagonal() * tab;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  if (ldlt.info() != Eigen::Success) throw Error("l2_project_element: singular Gram matrix");
  return ldlt.solve(rhs);
}

/// Componentwise projection of a vector field; returns the two coefficient
/// vectors stacked [component 0; component 1].
inline Eigen::VectorXd l2_project_element(const VectorField& f, const ElementBasis& basis,
                                          const QuadratureRule& qr) {
  Eigen::VectorXd out(2 * basis.dimension());
  out.head(basis.dimension()) = l2_project_element([&](const Vec2& x) { return f(x).x(); }, basis, qr);
  out.tail(basis.dimension()) = l2_project_element([&](const Vec2& x) { return f(x).y(); }, basis, qr);
  return out;
}

inline Eigen::VectorXd l2_project_face(const ScalarField& f, const FaceBasis& basis, const QuadratureRule& qr) {
  const Eigen::MatrixXd tab = basis.values(qr.points);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.dimension());
  for (int q = 0; q < qr.size(); ++q) rhs += qr.weights[q] * f(qr.points[q]) * tab.row(q).transpose();
  const Eigen::MatrixXd g = tab.transpose() * Eigen::Map<const Eigen::VectorXd>(qr.weights.data(), qr.size()).asDiagonal() * tab;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  if (ldlt.info() != Eigen::Success) throw Error("l2_project_face: singular Gram matrix");
  return ldlt.solve(rhs);
}

inline Eigen::VectorXd l2_project_face(const VectorField& f, const FaceBasis& basis, const QuadratureRule& qr) {
  Eigen::VectorXd out(2 * basis.dimension());
  out.head(basis.dimension()) = l2_project_face([&](const Vec2& x) { return f(x).x(); }, basis, qr);
  out.tail(basis.dimension()) = l2_project_face([&](const Vec2& x) { return f(x).y(); }, basis, qr);
  return out;
}

/// Quadrature exactness defaults used across the scheme.
struct ExactnessDefaults {
  static int element(int k) { return std::max(2 * (k + 1), 4 * k); }
  static int face(int k) { return std::max(2 * (k + 1), 3 * k + 1); }
  static int data(int k) { return element(k) + 2; } ///< forcing / exact-solution integrals
};

} // namespace hho

#endif
