// Element-local reconstruction operators acting on the hybrid vector
// (v_T, (v_F)_{F in F_T}):
//   - gradient reconstruction into matrix-valued polynomials of degree l,
//   - velocity reconstruction into P^{k+1} (gradient best-fit + mean match),
//   - divergence reconstruction (trace of the gradient),
//   - difference-based stabilisation,
//   - directional derivative driven by a hybrid advective field.
// All operators are dense matrices over the local scalar/vector dof layout.
// A Discretization object caches per-element tables so global assembly and
// all audits act on identical bases and quadratures.

#ifndef HHO_LOCAL_OPS_HPP
#define HHO_LOCAL_OPS_HPP

#include "hho/parallel.hpp"
#include "hho/space.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>

namespace hho {

/// Shared data for one face: basis, quadrature and mass matrix. Both adjacent
/// elements use the same tables, which keeps interface terms single-valued.
struct FaceOps {
  FaceBasis basis;
  QuadratureRule qr;
  Eigen::VectorXd w;   ///< quadrature weights
  Eigen::MatrixXd Psi; ///< basis values at quadrature points (nq x (k+1))
  Eigen::MatrixXd MF;  ///< face mass matrix
  Eigen::LLT<Eigen::MatrixXd> MF_llt;
  double h = 0.0; ///< face diameter = length
};

/// Per-(element,face) trace tables of the element basis.
struct ElementFaceTables {
  int iF = -1;       ///< global face index
  Vec2 n;            ///< outward normal n_TF
  Eigen::MatrixXd Phi; ///< element basis values at face quadrature points (nq x N_{k+1})
  Eigen::MatrixXd Gn;  ///< normal derivatives of element basis at face points (nq x N_{k+1})
  Eigen::MatrixXd Tr;  ///< face-basis coefficients of the trace of a degree-k element polynomial ((k+1) x N_k)
};

/// Cached element data: basis of degree k+1, quadrature tables and the
/// state-independent local operator matrices.
struct ElementOps {
  int iT = -1;
  int k = 0;
  LocalDofLayout layout;
  ElementBasis basis; ///< degree k+1; the leading N_k functions span P^k

  QuadratureRule qr;
  Eigen::VectorXd w;
  Eigen::MatrixXd Phi, Dx, Dy; ///< value/gradient tables (nq x N_{k+1})

  Eigen::MatrixXd M;      ///< scalar mass, degree k+1 basis
  Eigen::MatrixXd K;      ///< scalar stiffness, degree k+1 basis
  Eigen::VectorXd intPhi; ///< integrals of the basis functions
  double measure = 0.0;

  std::vector<ElementFaceTables> face_tables;

  // scalar-layout operators (columns over [elem N_k | face blocks (k+1)])
  Eigen::MatrixXd CG0, CG1; ///< gradient reconstruction blocks at degree k (N_k x n_scal)
  Eigen::MatrixXd R;        ///< velocity reconstruction (N_{k+1} x n_scal)
  Eigen::MatrixXd S;        ///< stabilisation (n_scal x n_scal)

  // vector-layout operators
  Eigen::MatrixXd Dk;     ///< divergence reconstruction (N_k x n_loc)
  Eigen::MatrixXd Avisc;  ///< grad-reconstruction Galerkin + stabilisation (n_loc x n_loc)
  Eigen::MatrixXd B;      ///< pressure coupling -(D_k v, q)_T, mean-adapted pressure basis (n_loc x N_k)
  Eigen::MatrixXd Bbnd;   ///< boundary term (v_F.n, q)_F of the coupling, filled on boundary faces only
  Eigen::VectorXd mu;     ///< means of the leading N_k basis functions relative to the constant mode

  int n_scal() const { return layout.n_elem_scalar + layout.n_faces() * layout.n_face_scalar; }

  /// Scalar-layout index -> vector-layout index for one component.
  int vec_index(int s, int comp) const {
    const int Nk = layout.n_elem_scalar, nf = layout.n_face_scalar;
    if (s < Nk) return comp * Nk + s;
    const int i = (s - Nk) / nf, off = (s - Nk) % nf;
    return layout.face_offset(i, comp) + off;
  }

  /// Spreads a scalar-layout matrix to the vector layout, one copy per component.
  Eigen::MatrixXd expand_scalar(const Eigen::MatrixXd& Ms) const {
    Eigen::MatrixXd Mv = Eigen::MatrixXd::Zero(layout.size(), layout.size());
    const int n = n_scal();
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Mv(vec_index(i, c), vec_index(j, c)) += Ms(i, j);
    return Mv;
  }

  /// Restriction of a vector-layout local vector to one component (scalar layout).
  Eigen::VectorXd scalar_component(const Eigen::VectorXd& v, int comp) const {
    Eigen::VectorXd out(n_scal());
    for (int i = 0; i < n_scal(); ++i) out[i] = v[vec_index(i, comp)];
    return out;
  }

  /// Pressure basis change: mean-adapted coefficients -> basis coefficients.
  Eigen::VectorXd pressure_to_basis(const Eigen::VectorXd& adapted) const {
    Eigen::VectorXd mono = adapted;
    mono[0] = adapted[0] - mu.tail(mu.size() - 1).dot(adapted.tail(adapted.size() - 1));
    return mono;
  }

  /// Pressure basis change: basis coefficients -> mean-adapted coefficients.
  Eigen::VectorXd pressure_from_basis(const Eigen::VectorXd& mono) const {
    Eigen::VectorXd adapted = mono;
    adapted[0] = mono[0] + mu.tail(mu.size() - 1).dot(mono.tail(mono.size() - 1));
    return adapted;
  }

  /// Integral of the pressure over the element, from adapted coefficients.
  double pressure_integral_coefficient() const { return intPhi[0]; }
};

namespace detail {

inline Eigen::MatrixXd weighted_inner(const Eigen::MatrixXd& A, const Eigen::VectorXd& w,
                                      const Eigen::MatrixXd& B) {
  return A.transpose() * w.asDiagonal() * B;
}

} // namespace detail

/// Builds the cached tables and operators for one element.
inline ElementOps build_element_ops(const Mesh& mesh, int k, int iT, const std::vector<FaceOps>& face_ops) {
  ElementOps ops;
  ops.iT = iT;
  ops.k = k;
  ops.layout = LocalDofLayout(mesh, k, iT);
  const int Nk = ops.layout.n_elem_scalar;
  const int NR = poly_dim_2d(k + 1);
  const int nfs = ops.layout.n_face_scalar;

  ops.qr = element_quadrature(mesh, iT, ExactnessDefaults::element(k));
  ops.w = Eigen::Map<const Eigen::VectorXd>(ops.qr.weights.data(), ops.qr.size());
  ops.basis = make_element_basis(mesh, iT, k + 1, ops.qr);
  ops.Phi = ops.basis.values(ops.qr.points);
  std::tie(ops.Dx, ops.Dy) = ops.basis.gradients(ops.qr.points);

  ops.M = detail::weighted_inner(ops.Phi, ops.w, ops.Phi);
  ops.K = detail::weighted_inner(ops.Dx, ops.w, ops.Dx) + detail::weighted_inner(ops.Dy, ops.w, ops.Dy);
  ops.intPhi = ops.Phi.transpose() * ops.w;
  ops.measure = mesh.element(iT).measure;

  const int n_scal = ops.n_scal();
  const int n_loc = ops.layout.size();

  // face trace tables
  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const int iF = ops.layout.faces[i];
    const FaceOps& fop = face_ops[iF];
    ElementFaceTables t;
    t.iF = iF;
    t.n = mesh.outward_normal(iF, iT);
    t.Phi = ops.basis.values(fop.qr.points);
    const auto [gx, gy] = ops.basis.gradients(fop.qr.points);
    t.Gn = gx * t.n.x() + gy * t.n.y();
    t.Tr = fop.MF_llt.solve(detail::weighted_inner(fop.Psi, fop.w, t.Phi.leftCols(Nk)));
    ops.face_tables.push_back(std::move(t));
  }

  const Eigen::LDLT<Eigen::MatrixXd> Mk_ldlt(ops.M.topLeftCorner(Nk, Nk));
  if (Mk_ldlt.info() != Eigen::Success)
    throw Error("element " + std::to_string(iT) + ": singular mass matrix");

  // gradient reconstruction blocks at degree k
  Eigen::MatrixXd B0 = Eigen::MatrixXd::Zero(Nk, n_scal);
  Eigen::MatrixXd B1 = Eigen::MatrixXd::Zero(Nk, n_scal);
  B0.leftCols(Nk) = detail::weighted_inner(ops.Phi.leftCols(Nk), ops.w, ops.Dx.leftCols(Nk));
  B1.leftCols(Nk) = detail::weighted_inner(ops.Phi.leftCols(Nk), ops.w, ops.Dy.leftCols(Nk));
  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const ElementFaceTables& t = ops.face_tables[i];
    const FaceOps& fop = face_ops[t.iF];
    const Eigen::MatrixXd face_elem = detail::weighted_inner(t.Phi.leftCols(Nk), fop.w, t.Phi.leftCols(Nk));
    const Eigen::MatrixXd face_face = detail::weighted_inner(t.Phi.leftCols(Nk), fop.w, fop.Psi);
    const int c0 = Nk + i * nfs;
    B0.leftCols(Nk) -= t.n.x() * face_elem;
    B1.leftCols(Nk) -= t.n.y() * face_elem;
    B0.middleCols(c0, nfs) += t.n.x() * face_face;
    B1.middleCols(c0, nfs) += t.n.y() * face_face;
  }
  ops.CG0 = Mk_ldlt.solve(B0);
  ops.CG1 = Mk_ldlt.solve(B1);

  // velocity reconstruction: gradient best-fit with the constant mode pinned
  // by the mean condition
  Eigen::MatrixXd A = ops.K;
  A.row(0) = ops.intPhi.transpose();
  Eigen::MatrixXd Brhs = Eigen::MatrixXd::Zero(NR, n_scal);
  Brhs.block(1, 0, NR - 1, Nk) = ops.K.block(1, 0, NR - 1, Nk);
  Brhs.block(0, 0, 1, Nk) = ops.intPhi.head(Nk).transpose();
  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const ElementFaceTables& t = ops.face_tables[i];
    const FaceOps& fop = face_ops[t.iF];
    const Eigen::MatrixXd gn_elem = detail::weighted_inner(t.Gn, fop.w, t.Phi.leftCols(Nk));
    const Eigen::MatrixXd gn_face = detail::weighted_inner(t.Gn, fop.w, fop.Psi);
    Brhs.block(1, 0, NR - 1, Nk) -= gn_elem.bottomRows(NR - 1);
    Brhs.block(1, Nk + i * nfs, NR - 1, nfs) += gn_face.bottomRows(NR - 1);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> Alu(A);
  ops.R = Alu.solve(Brhs);

  // stabilisation: differences between the re-interpolated reconstruction and
  // the hybrid unknowns
  Eigen::MatrixXd PRk = Mk_ldlt.solve(ops.M.topRows(Nk)); // projection P^{k+1} -> P^k
  Eigen::MatrixXd deltaT = PRk * ops.R;                   // (Nk x n_scal)
  deltaT.leftCols(Nk) -= Eigen::MatrixXd::Identity(Nk, Nk);
  ops.S = Eigen::MatrixXd::Zero(n_scal, n_scal);
  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const ElementFaceTables& t = ops.face_tables[i];
    const FaceOps& fop = face_ops[t.iF];
    Eigen::MatrixXd deltaTF = fop.MF_llt.solve(detail::weighted_inner(fop.Psi, fop.w, t.Phi)) * ops.R;
    deltaTF.middleCols(Nk + i * nfs, nfs) -= Eigen::MatrixXd::Identity(nfs, nfs);
    const Eigen::MatrixXd Z = deltaTF - t.Tr * deltaT;
    ops.S += (1.0 / fop.h) * Z.transpose() * fop.MF * Z;
  }

  // divergence reconstruction and pressure coupling
  ops.Dk = Eigen::MatrixXd::Zero(Nk, n_loc);
  for (int sidx = 0; sidx < n_scal; ++sidx) {
    ops.Dk.col(ops.vec_index(sidx, 0)) += ops.CG0.col(sidx);
    ops.Dk.col(ops.vec_index(sidx, 1)) += ops.CG1.col(sidx);
  }

  ops.mu = ops.intPhi.head(Nk) / ops.intPhi[0];
  Eigen::MatrixXd CT = Eigen::MatrixXd::Identity(Nk, Nk); // adapted -> basis coefficients
  for (int a = 1; a < Nk; ++a) CT(0, a) = -ops.mu[a];
  const Eigen::MatrixXd Bmono = -(ops.M.topLeftCorner(Nk, Nk) * ops.Dk).transpose();
  ops.B = Bmono * CT;

  ops.Bbnd = Eigen::MatrixXd::Zero(n_loc, Nk);
  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const ElementFaceTables& t = ops.face_tables[i];
    if (!mesh.face(t.iF).is_boundary()) continue;
    const FaceOps& fop = face_ops[t.iF];
    const Eigen::MatrixXd face_press = detail::weighted_inner(fop.Psi, fop.w, t.Phi.leftCols(Nk)); // (nfs x Nk)
    for (int c = 0; c < 2; ++c)
      ops.Bbnd.block(ops.layout.face_offset(i, c), 0, nfs, Nk) += t.n[c] * face_press;
  }
  ops.Bbnd = ops.Bbnd * CT;

  // viscous contribution: R^T K R per component + stabilisation
  const Eigen::MatrixXd Ascal = ops.R.transpose() * ops.K * ops.R + ops.S;
  ops.Avisc = ops.expand_scalar(Ascal);

  return ops;
}

/// Gradient reconstruction blocks at an arbitrary degree (used by audits with
/// degree 2k). Tests are expressed in a dedicated basis of degree ell; the
/// columns act on the production scalar dof layout.
struct GradientReconstruction {
  int ell = 0;
  ElementBasis test_basis; ///< degree >= ell; leading N_ell functions are the tests
  Eigen::MatrixXd CG0, CG1; ///< (N_ell x n_scal)

  /// Full matrix-valued operator (rows: components (i,j) of the matrix
  /// polynomial, row-major; size 4*N_ell x n_loc).
  Eigen::MatrixXd full_matrix(const ElementOps& ops) const {
    const int Ne = CG0.rows();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(4 * Ne, ops.layout.size());
    for (int s = 0; s < ops.n_scal(); ++s)
      for (int comp = 0; comp < 2; ++comp) {
        const int col = ops.vec_index(s, comp);
        G.block((2 * comp + 0) * Ne, col, Ne, 1) += CG0.col(s);
        G.block((2 * comp + 1) * Ne, col, Ne, 1) += CG1.col(s);
      }
    return G;
  }

  /// Divergence rows: trace of the gradient reconstruction (N_ell x n_loc).
  Eigen::MatrixXd divergence(const ElementOps& ops) const {
    const int Ne = CG0.rows();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(Ne, ops.layout.size());
    for (int s = 0; s < ops.n_scal(); ++s) {
      D.col(ops.vec_index(s, 0)) += CG0.col(s);
      D.col(ops.vec_index(s, 1)) += CG1.col(s);
    }
    return D;
  }
};

inline GradientReconstruction gradient_reconstruction(const Mesh& mesh, const ElementOps& ops,
                                                      const std::vector<FaceOps>& face_ops, int ell) {
  GradientReconstruction g;
  g.ell = ell;
  const int Nk = ops.layout.n_elem_scalar;
  const int Ne = poly_dim_2d(ell);
  const int nfs = ops.layout.n_face_scalar;
  const int deg = std::max(ell, 1);
  g.test_basis = make_element_basis(mesh, ops.iT, deg, ops.qr);

  const Eigen::MatrixXd PhiT = g.test_basis.values(ops.qr.points).leftCols(Ne);
  const Eigen::MatrixXd Me = detail::weighted_inner(PhiT, ops.w, PhiT);
  Eigen::MatrixXd B0 = Eigen::MatrixXd::Zero(Ne, ops.n_scal());
  Eigen::MatrixXd B1 = Eigen::MatrixXd::Zero(Ne, ops.n_scal());
  B0.leftCols(Nk) = detail::weighted_inner(PhiT, ops.w, ops.Dx.leftCols(Nk));
  B1.leftCols(Nk) = detail::weighted_inner(PhiT, ops.w, ops.Dy.leftCols(Nk));
  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const ElementFaceTables& t = ops.face_tables[i];
    const FaceOps& fop = face_ops[t.iF];
    const Eigen::MatrixXd PhiTF = g.test_basis.values(fop.qr.points).leftCols(Ne);
    const Eigen::MatrixXd face_elem = detail::weighted_inner(PhiTF, fop.w, t.Phi.leftCols(Nk));
    const Eigen::MatrixXd face_face = detail::weighted_inner(PhiTF, fop.w, fop.Psi);
    B0.leftCols(Nk) -= t.n.x() * face_elem;
    B1.leftCols(Nk) -= t.n.y() * face_elem;
    B0.middleCols(Nk + i * nfs, nfs) += t.n.x() * face_face;
    B1.middleCols(Nk + i * nfs, nfs) += t.n.y() * face_face;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(Me);
  g.CG0 = ldlt.solve(B0);
  g.CG1 = ldlt.solve(B1);
  return g;
}

/// Directional derivative reconstruction: matrix mapping a local vector v to
/// the coefficients of G_w v in the vector-valued degree-k element basis
/// (component-major). Exists for audits and identity tests; production
/// assembly of the convective form never materialises it.
inline Eigen::MatrixXd directional_derivative(const ElementOps& ops, const std::vector<FaceOps>& face_ops,
                                              const Eigen::VectorXd& w_loc) {
  const int Nk = ops.layout.n_elem_scalar;
  const int nfs = ops.layout.n_face_scalar;
  const int n_loc = ops.layout.size();

  // advective field values at element quadrature points
  Eigen::VectorXd W1 = ops.Phi.leftCols(Nk) * w_loc.segment(0, Nk);
  Eigen::VectorXd W2 = ops.Phi.leftCols(Nk) * w_loc.segment(Nk, Nk);

  // rhs over tests (component i, coefficient a): scalar block structure
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(2 * Nk, n_loc);
  Eigen::VectorXd wq = ops.w;
  // element columns: (w_T . grad phi_b) tested against phi_a, same component
  Eigen::MatrixXd conv = ops.Phi.leftCols(Nk).transpose() *
                         (wq.asDiagonal() * (W1.asDiagonal() * ops.Dx.leftCols(Nk) + W2.asDiagonal() * ops.Dy.leftCols(Nk)));
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < Nk; ++b) rhs.block(c * Nk, ops.vec_index(b, c), Nk, 1) += conv.col(b);

  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const ElementFaceTables& t = ops.face_tables[i];
    const FaceOps& fop = face_ops[t.iF];
    const int nqF = fop.qr.size();
    Eigen::VectorXd wn(nqF);
    for (int q = 0; q < nqF; ++q) {
      const double w1 = fop.Psi.row(q).dot(w_loc.segment(ops.layout.face_offset(i, 0), nfs));
      const double w2 = fop.Psi.row(q).dot(w_loc.segment(ops.layout.face_offset(i, 1), nfs));
      wn[q] = w1 * t.n.x() + w2 * t.n.y();
    }
    const Eigen::VectorXd fw = fop.w.cwiseProduct(wn);
    const Eigen::MatrixXd face_face = t.Phi.leftCols(Nk).transpose() * fw.asDiagonal() * fop.Psi;
    const Eigen::MatrixXd face_elem = t.Phi.leftCols(Nk).transpose() * fw.asDiagonal() * t.Phi.leftCols(Nk);
    for (int c = 0; c < 2; ++c) {
      rhs.block(c * Nk, ops.layout.face_offset(i, c), Nk, nfs) += face_face;
      for (int b = 0; b < Nk; ++b) rhs.block(c * Nk, ops.vec_index(b, c), Nk, 1) -= face_elem.col(b);
    }
  }

  const Eigen::LDLT<Eigen::MatrixXd> Mk_ldlt(ops.M.topLeftCorner(Nk, Nk));
  Eigen::MatrixXd out(2 * Nk, n_loc);
  out.topRows(Nk) = Mk_ldlt.solve(rhs.topRows(Nk));
  out.bottomRows(Nk) = Mk_ldlt.solve(rhs.bottomRows(Nk));
  return out;
}

/// Gram matrix of the local discrete H1-like norm on the vector layout:
/// ||grad v_T||^2 + sum_F h_F^{-1} ||v_F - v_T||_F^2.
inline Eigen::MatrixXd local_norm_matrix(const ElementOps& ops, const std::vector<FaceOps>& face_ops) {
  const int Nk = ops.layout.n_elem_scalar;
  const int nfs = ops.layout.n_face_scalar;
  const int n_scal = ops.n_scal();
  Eigen::MatrixXd Ns = Eigen::MatrixXd::Zero(n_scal, n_scal);
  Ns.topLeftCorner(Nk, Nk) = ops.K.topLeftCorner(Nk, Nk);
  for (int i = 0; i < ops.layout.n_faces(); ++i) {
    const ElementFaceTables& t = ops.face_tables[i];
    const FaceOps& fop = face_ops[t.iF];
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(nfs, n_scal);
    gamma.middleCols(Nk + i * nfs, nfs) = Eigen::MatrixXd::Identity(nfs, nfs);
    gamma.leftCols(Nk) -= t.Tr;
    Ns += (1.0 / fop.h) * gamma.transpose() * fop.MF * gamma;
  }
  return ops.expand_scalar(Ns);
}

inline double local_norm_1T(const ElementOps& ops, const std::vector<FaceOps>& face_ops,
                            const Eigen::VectorXd& v_loc) {
  const Eigen::MatrixXd N = local_norm_matrix(ops, face_ops);
  return std::sqrt(std::max(0.0, v_loc.dot(N * v_loc)));
}

/// Caches the per-face and per-element tables for a mesh and degree. All
/// global machinery (assembly, interpolation, error norms, audits) reads
/// from here so every consumer sees identical bases.
class Discretization {
public:
  Discretization(const Mesh& mesh, int k) : mesh_(&mesh), k_(k), global_(mesh, k) {
    face_ops_.resize(mesh.n_faces());
    for (int iF = 0; iF < mesh.n_faces(); ++iF) {
      FaceOps& f = face_ops_[iF];
      f.basis = FaceBasis(k, mesh, iF);
      f.qr = face_quadrature(mesh, iF, ExactnessDefaults::face(k));
      f.w = Eigen::Map<const Eigen::VectorXd>(f.qr.weights.data(), f.qr.size());
      f.Psi = f.basis.values(f.qr.points);
      f.MF = f.Psi.transpose() * f.w.asDiagonal() * f.Psi;
      f.MF_llt.compute(f.MF);
      if (f.MF_llt.info() != Eigen::Success)
        throw Error("face " + std::to_string(iF) + ": singular mass matrix");
      f.h = mesh.face(iF).length;
    }
    elem_ops_.resize(mesh.n_elements());
    parallel_for(mesh.n_elements(), [&](int iT) { elem_ops_[iT] = build_element_ops(mesh, k, iT, face_ops_); });
  }

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return k_; }
  const GlobalDofLayout& global() const { return global_; }
  const ElementOps& element(int iT) const { return elem_ops_[iT]; }
  const FaceOps& face(int iF) const { return face_ops_[iF]; }
  const std::vector<FaceOps>& face_ops() const { return face_ops_; }

  /// Interpolation onto the hybrid space: element and face L2-projections of
  /// a vector field. Pressure blocks are left at zero.
  HhoVector interpolate(const VectorField& v) const {
    HhoVector out(global_);
    const int Nk = global_.n_elem_scalar;
    parallel_for(mesh_->n_elements(), [&](int iT) {
      const ElementOps& ops = elem_ops_[iT];
      const QuadratureRule qr = element_quadrature(*mesh_, iT, ExactnessDefaults::data(k_));
      const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(qr.weights.data(), qr.size());
      const Eigen::MatrixXd tab = ops.basis.values(qr.points).leftCols(Nk);
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(Nk, 2);
      for (int q = 0; q < qr.size(); ++q) {
        const Vec2 val = v(qr.points[q]);
        rhs.col(0) += w[q] * val.x() * tab.row(q).transpose();
        rhs.col(1) += w[q] * val.y() * tab.row(q).transpose();
      }
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(ops.M.topLeftCorner(Nk, Nk));
      out.elem_block(iT).head(Nk) = ldlt.solve(rhs.col(0));
      out.elem_block(iT).tail(Nk) = ldlt.solve(rhs.col(1));
    });
    parallel_for(mesh_->n_faces(), [&](int iF) {
      const FaceOps& fop = face_ops_[iF];
      const QuadratureRule qr = face_quadrature(*mesh_, iF, ExactnessDefaults::face(k_) + 2);
      out.face_block(iF) = l2_project_face(v, fop.basis, qr);
    });
    return out;
  }

  /// Elementwise L2-projection of a scalar field onto the pressure space,
  /// stored in the mean-adapted pressure basis.
  void project_pressure(const ScalarField& p, HhoVector& state) const {
    const int Nk = global_.n_elem_scalar;
    parallel_for(mesh_->n_elements(), [&](int iT) {
      const ElementOps& ops = elem_ops_[iT];
      const QuadratureRule qr = element_quadrature(*mesh_, iT, ExactnessDefaults::data(k_));
      const Eigen::MatrixXd tab = ops.basis.values(qr.points).leftCols(Nk);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(Nk);
      for (int q = 0; q < qr.size(); ++q) rhs += qr.weights[q] * p(qr.points[q]) * tab.row(q).transpose();
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(ops.M.topLeftCorner(Nk, Nk));
      state.pressure_block(iT) = ops.pressure_from_basis(ldlt.solve(rhs));
    });
  }

  /// Value of the broken element velocity polynomial at a point of element iT.
  Vec2 eval_velocity(const HhoVector& state, int iT, const Vec2& x) const {
    const ElementOps& ops = elem_ops_[iT];
    const int Nk = global_.n_elem_scalar;
    const Eigen::VectorXd phi = ops.basis.eval(x).head(Nk);
    return Vec2(phi.dot(state.elem_block(iT).head(Nk)), phi.dot(state.elem_block(iT).tail(Nk)));
  }

  /// Value of the broken pressure at a point of element iT.
  double eval_pressure(const HhoVector& state, int iT, const Vec2& x) const {
    const ElementOps& ops = elem_ops_[iT];
    const int Nk = global_.n_elem_scalar;
    const Eigen::VectorXd mono = ops.pressure_to_basis(state.pressure_block(iT));
    return ops.basis.eval(x).head(Nk).dot(mono);
  }

  /// Integral of the broken pressure over the domain.
  double pressure_integral(const HhoVector& state) const {
    double acc = 0.0;
    for (int iT = 0; iT < mesh_->n_elements(); ++iT)
      acc += elem_ops_[iT].pressure_integral_coefficient() * state.pressure_block(iT)[0];
    return acc;
  }

  /// Discrete H1-like norm over the hybrid velocity unknowns, including the
  /// boundary penalty part h_F^{-1} ||v_F||_F^2.
  double norm_1h(const HhoVector& v) const {
    double acc = 0.0;
    for (int iT = 0; iT < mesh_->n_elements(); ++iT) {
      const ElementOps& ops = elem_ops_[iT];
      const Eigen::VectorXd vloc = v.local_velocity(ops.layout, iT);
      const Eigen::MatrixXd N = local_norm_matrix(ops, face_ops_);
      acc += vloc.dot(N * vloc);
    }
    for (int iF = 0; iF < mesh_->n_faces(); ++iF) {
      if (!mesh_->face(iF).is_boundary()) continue;
      const FaceOps& fop = face_ops_[iF];
      const int nfs = global_.n_face_scalar;
      const Eigen::VectorXd vF = v.face_block(iF);
      acc += (vF.head(nfs).dot(fop.MF * vF.head(nfs)) + vF.tail(nfs).dot(fop.MF * vF.tail(nfs))) / fop.h;
    }
    return std::sqrt(std::max(0.0, acc));
  }

private:
  const Mesh* mesh_;
  int k_;
  GlobalDofLayout global_;
  std::vector<FaceOps> face_ops_;
  std::vector<ElementOps> elem_ops_;
};

} // namespace hho

#endif
