// Boundary-condition modes, the convective stabilisation family rho, the
// local face Peclet number, and global evaluators of the viscous bilinear
// form, the pressure-velocity coupling and the Temam-type convective
// trilinear form. Assembly uses dedicated element kernels; the evaluators
// here define the forms and back the identity tests.

#ifndef HHO_FORMS_HPP
#define HHO_FORMS_HPP

#include "hho/local_ops.hpp"

#include <cmath>
#include <optional>

namespace hho {

enum class BcMode { Strong, WeakSkew, WeakSymmetric, WeakIncomplete };

inline bool is_weak(BcMode m) { return m != BcMode::Strong; }

/// Sign of the Nitsche adjoint term: +1 skew, -1 symmetric, 0 incomplete.
inline double nitsche_sign(BcMode m) {
  switch (m) {
  case BcMode::WeakSkew: return 1.0;
  case BcMode::WeakSymmetric: return -1.0;
  case BcMode::WeakIncomplete: return 0.0;
  case BcMode::Strong: break;
  }
  throw Error("nitsche_sign: strong mode has no Nitsche terms");
}

enum class RhoKind { Centered, Upwind, Theta, ScharfetterGummel };

namespace detail {
// quintic bump profile: P(0)=0, P(1)=1, flat endpoints
inline double quintic_ramp(double t) { return ((6.0 * t - 15.0) * t + 10.0) * t * t * t; }
inline double quintic_ramp_deriv(double t) {
  const double u = t * (1.0 - t);
  return 30.0 * u * u;
}
} // namespace detail

/// Convective stabilisation profile: the penalty is (nu/h_F) rho(Pe).
/// Centered 0; Upwind |s|/2; Theta blends centered (|s|<=1/2) into upwind
/// (|s|>=1); Scharfetter-Gummel (s/2)coth(s/2)-1 with a series guard.
inline double rho_eval(RhoKind kind, double s) {
  switch (kind) {
  case RhoKind::Centered: return 0.0;
  case RhoKind::Upwind: return 0.5 * std::abs(s);
  case RhoKind::Theta: {
    const double r = std::abs(s);
    if (r <= 0.5) return 0.0;
    if (r >= 1.0) return 0.5 * r;
    return 0.5 * r * detail::quintic_ramp(2.0 * r - 1.0);
  }
  case RhoKind::ScharfetterGummel: {
    if (std::abs(s) < 1e-4) return s * s / 12.0;
    return 0.5 * s / std::tanh(0.5 * s) - 1.0;
  }
  }
  return 0.0;
}

/// Almost-everywhere derivative of rho; the Upwind kink uses rho'(0)=0.
inline double rho_deriv(RhoKind kind, double s) {
  switch (kind) {
  case RhoKind::Centered: return 0.0;
  case RhoKind::Upwind: return s > 0.0 ? 0.5 : (s < 0.0 ? -0.5 : 0.0);
  case RhoKind::Theta: {
    const double r = std::abs(s);
    double d = 0.0;
    if (r >= 1.0) d = 0.5;
    else if (r > 0.5) {
      const double t = 2.0 * r - 1.0;
      d = r * detail::quintic_ramp_deriv(t) + 0.5 * detail::quintic_ramp(t);
    }
    return s >= 0.0 ? d : -d;
  }
  case RhoKind::ScharfetterGummel: {
    if (std::abs(s) < 1e-4) return s / 6.0 - s * s * s / 180.0;
    const double sh = std::sinh(0.5 * s);
    return 0.5 / std::tanh(0.5 * s) - 0.25 * s / (sh * sh);
  }
  }
  return 0.0;
}

inline RhoKind rho_kind_from_string(const std::string& s) {
  if (s == "none" || s == "centered") return RhoKind::Centered;
  if (s == "upwind") return RhoKind::Upwind;
  if (s == "theta") return RhoKind::Theta;
  if (s == "sg") return RhoKind::ScharfetterGummel;
  throw Error("unknown convective stabilisation '" + s + "'");
}

/// Local oriented Peclet numbers h_F (w_F . n_TF) / nu at the face
/// quadrature points. w_face is the face coefficient block [x-part; y-part].
inline Eigen::VectorXd peclet_values(const FaceOps& fop, const Vec2& n_TF, const Eigen::VectorXd& w_face,
                                     double nu) {
  if (!(nu > 0.0)) throw Error("peclet: viscosity must be positive");
  const int nfs = fop.basis.dimension();
  Eigen::VectorXd pe(fop.qr.size());
  for (int q = 0; q < fop.qr.size(); ++q) {
    const double wn =
        fop.Psi.row(q).dot(w_face.head(nfs)) * n_TF.x() + fop.Psi.row(q).dot(w_face.tail(nfs)) * n_TF.y();
    pe[q] = fop.h * wn / nu;
  }
  return pe;
}

// ---------------------------------------------------------------------------
// Global form evaluators
// ---------------------------------------------------------------------------

/// Viscous bilinear form: sum of element contributions plus, in weak modes,
/// the Nitsche boundary terms (consistency, adjoint with the mode's sign,
/// and eta-weighted penalty). Bilinear part only; boundary data enters the
/// residual separately.
inline double viscous_form(const Discretization& disc, const HhoVector& u, const HhoVector& v, BcMode mode,
                           double eta = 1.0) {
  const Mesh& mesh = disc.mesh();
  const int NR = poly_dim_2d(disc.degree() + 1);
  const int nfs = disc.global().n_face_scalar;
  double acc = 0.0;
  for (int iT = 0; iT < mesh.n_elements(); ++iT) {
    const ElementOps& ops = disc.element(iT);
    const Eigen::VectorXd uloc = u.local_velocity(ops.layout, iT);
    const Eigen::VectorXd vloc = v.local_velocity(ops.layout, iT);
    acc += uloc.dot(ops.Avisc * vloc);
    if (!is_weak(mode)) continue;
    const double sigma = nitsche_sign(mode);
    for (int i = 0; i < ops.layout.n_faces(); ++i) {
      const ElementFaceTables& t = ops.face_tables[i];
      if (!mesh.face(t.iF).is_boundary()) continue;
      const FaceOps& fop = disc.face(t.iF);
      Eigen::Matrix<double, Eigen::Dynamic, 2> ru(NR, 2), rv(NR, 2);
      for (int c = 0; c < 2; ++c) {
        ru.col(c) = ops.R * ops.scalar_component(uloc, c);
        rv.col(c) = ops.R * ops.scalar_component(vloc, c);
      }
      for (int q = 0; q < fop.qr.size(); ++q) {
        const double wq = fop.w[q];
        for (int c = 0; c < 2; ++c) {
          const double gun = t.Gn.row(q).dot(ru.col(c));
          const double gvn = t.Gn.row(q).dot(rv.col(c));
          const double uF = fop.Psi.row(q).dot(u.face_block(t.iF).segment(c * nfs, nfs));
          const double vF = fop.Psi.row(q).dot(v.face_block(t.iF).segment(c * nfs, nfs));
          acc += wq * (-gun * vF + sigma * uF * gvn + eta / fop.h * uF * vF);
        }
      }
    }
  }
  return acc;
}

/// Pressure-velocity coupling b_h(v, q): element part through the divergence
/// reconstruction plus, in weak modes, the boundary term (v_F.n, q)_F.
/// The pressure state q is read from the pressure blocks of `q_state`.
inline double coupling_form(const Discretization& disc, const HhoVector& v, const HhoVector& q_state,
                            BcMode mode) {
  double acc = 0.0;
  for (int iT = 0; iT < disc.mesh().n_elements(); ++iT) {
    const ElementOps& ops = disc.element(iT);
    const Eigen::VectorXd vloc = v.local_velocity(ops.layout, iT);
    acc += vloc.dot(ops.B * q_state.pressure_block(iT));
    if (is_weak(mode)) acc += vloc.dot(ops.Bbnd * q_state.pressure_block(iT));
  }
  return acc;
}

/// Convective trilinear form with Temam's device, evaluated through the
/// expanded skew-symmetric reformulation
///   1/2 sum_T [ (w_T.grad v_T, z_T) - (v_T, w_T.grad z_T)
///               + sum_F ((w_F.n)(v_F.z_T - z_F.v_T), 1)_F ].
/// Boundary contributions are already absorbed; the expression is valid for
/// both strong and weak boundary treatments.
inline double convective_form(const Discretization& disc, const HhoVector& w, const HhoVector& v,
                              const HhoVector& z) {
  const int Nk = disc.global().n_elem_scalar;
  const int nfs = disc.global().n_face_scalar;
  double acc = 0.0;
  for (int iT = 0; iT < disc.mesh().n_elements(); ++iT) {
    const ElementOps& ops = disc.element(iT);
    const auto wT = w.elem_block(iT), vT = v.elem_block(iT), zT = z.elem_block(iT);
    const Eigen::MatrixXd& Phi = ops.Phi;
    const Eigen::MatrixXd& Dxm = ops.Dx;
    const Eigen::MatrixXd& Dym = ops.Dy;
    for (int q = 0; q < ops.qr.size(); ++q) {
      Vec2 wv, vv, zv;
      Mat2 gv, gz;
      for (int c = 0; c < 2; ++c) {
        wv[c] = Phi.row(q).head(Nk).dot(wT.segment(c * Nk, Nk));
        vv[c] = Phi.row(q).head(Nk).dot(vT.segment(c * Nk, Nk));
        zv[c] = Phi.row(q).head(Nk).dot(zT.segment(c * Nk, Nk));
        gv(c, 0) = Dxm.row(q).head(Nk).dot(vT.segment(c * Nk, Nk));
        gv(c, 1) = Dym.row(q).head(Nk).dot(vT.segment(c * Nk, Nk));
        gz(c, 0) = Dxm.row(q).head(Nk).dot(zT.segment(c * Nk, Nk));
        gz(c, 1) = Dym.row(q).head(Nk).dot(zT.segment(c * Nk, Nk));
      }
      acc += 0.5 * ops.w[q] * ((gv * wv).dot(zv) - (gz * wv).dot(vv));
    }
    for (int i = 0; i < ops.layout.n_faces(); ++i) {
      const ElementFaceTables& t = ops.face_tables[i];
      const FaceOps& fop = disc.face(t.iF);
      for (int q = 0; q < fop.qr.size(); ++q) {
        Vec2 wF, vF, zF, vTq, zTq;
        for (int c = 0; c < 2; ++c) {
          wF[c] = fop.Psi.row(q).dot(w.face_block(t.iF).segment(c * nfs, nfs));
          vF[c] = fop.Psi.row(q).dot(v.face_block(t.iF).segment(c * nfs, nfs));
          zF[c] = fop.Psi.row(q).dot(z.face_block(t.iF).segment(c * nfs, nfs));
          vTq[c] = t.Phi.row(q).head(Nk).dot(vT.segment(c * Nk, Nk));
          zTq[c] = t.Phi.row(q).head(Nk).dot(zT.segment(c * Nk, Nk));
        }
        acc += 0.5 * fop.w[q] * (wF.dot(t.n)) * (vF.dot(zTq) - zF.dot(vTq));
      }
    }
  }
  return acc;
}

/// Primal definition of the convective trilinear form, with the directional
/// derivative and the degree-2k divergence reconstruction materialised.
/// Strong layouts drop the explicit boundary sum. Audit-only.
inline double convective_form_primal(const Discretization& disc, const HhoVector& w, const HhoVector& v,
                                     const HhoVector& z, bool weak_layout) {
  const Mesh& mesh = disc.mesh();
  const int k = disc.degree();
  const int Nk = disc.global().n_elem_scalar;
  const int nfs = disc.global().n_face_scalar;
  double acc = 0.0;
  for (int iT = 0; iT < mesh.n_elements(); ++iT) {
    const ElementOps& ops = disc.element(iT);
    const Eigen::VectorXd wloc = w.local_velocity(ops.layout, iT);
    const Eigen::VectorXd vloc = v.local_velocity(ops.layout, iT);
    const Eigen::VectorXd zloc = z.local_velocity(ops.layout, iT);

    // (G_w v, z_T)_T via the materialised directional derivative
    const Eigen::MatrixXd Gw = directional_derivative(ops, disc.face_ops(), wloc);
    const Eigen::VectorXd gwv = Gw * vloc;
    const Eigen::MatrixXd Mk = ops.M.topLeftCorner(Nk, Nk);
    for (int c = 0; c < 2; ++c)
      acc += gwv.segment(c * Nk, Nk).dot(Mk * z.elem_block(iT).segment(c * Nk, Nk));

    // 1/2 (D_2k w, v_T . z_T)_T with the degree-2k divergence materialised
    const GradientReconstruction g2k = gradient_reconstruction(mesh, ops, disc.face_ops(), 2 * k);
    const Eigen::VectorXd dw = g2k.divergence(ops) * wloc;
    const Eigen::MatrixXd PhiH = g2k.test_basis.values(ops.qr.points).leftCols(poly_dim_2d(2 * k));
    for (int q = 0; q < ops.qr.size(); ++q) {
      Vec2 vv, zv;
      for (int c = 0; c < 2; ++c) {
        vv[c] = ops.Phi.row(q).head(Nk).dot(v.elem_block(iT).segment(c * Nk, Nk));
        zv[c] = ops.Phi.row(q).head(Nk).dot(z.elem_block(iT).segment(c * Nk, Nk));
      }
      acc += 0.5 * ops.w[q] * PhiH.row(q).dot(dw) * vv.dot(zv);
    }

    // 1/2 sum_F ((w_F.n)(v_F - v_T).(z_F - z_T), 1)_F
    for (int i = 0; i < ops.layout.n_faces(); ++i) {
      const ElementFaceTables& t = ops.face_tables[i];
      const FaceOps& fop = disc.face(t.iF);
      for (int q = 0; q < fop.qr.size(); ++q) {
        Vec2 wF, dv, dz;
        for (int c = 0; c < 2; ++c) {
          const double vF = fop.Psi.row(q).dot(v.face_block(t.iF).segment(c * nfs, nfs));
          const double zF = fop.Psi.row(q).dot(z.face_block(t.iF).segment(c * nfs, nfs));
          const double vT = t.Phi.row(q).head(Nk).dot(v.elem_block(iT).segment(c * Nk, Nk));
          const double zT = t.Phi.row(q).head(Nk).dot(z.elem_block(iT).segment(c * Nk, Nk));
          wF[c] = fop.Psi.row(q).dot(w.face_block(t.iF).segment(c * nfs, nfs));
          dv[c] = vF - vT;
          dz[c] = zF - zT;
        }
        acc += 0.5 * fop.w[q] * wF.dot(t.n) * dv.dot(dz);
      }
    }
  }
  if (weak_layout) {
    for (int iF = 0; iF < mesh.n_faces(); ++iF) {
      if (!mesh.face(iF).is_boundary()) continue;
      const FaceOps& fop = disc.face(iF);
      const Vec2 nF = mesh.face(iF).normal;
      for (int q = 0; q < fop.qr.size(); ++q) {
        Vec2 wF, vF, zF;
        for (int c = 0; c < 2; ++c) {
          wF[c] = fop.Psi.row(q).dot(w.face_block(iF).segment(c * nfs, nfs));
          vF[c] = fop.Psi.row(q).dot(v.face_block(iF).segment(c * nfs, nfs));
          zF[c] = fop.Psi.row(q).dot(z.face_block(iF).segment(c * nfs, nfs));
        }
        acc -= 0.5 * fop.w[q] * wF.dot(nF) * vF.dot(zF);
      }
    }
  }
  return acc;
}

/// Convective stabilisation form j_h(w; v, z): face penalties scaled by
/// (nu/h_F) rho(Pe(w_F)), evaluated pointwise at the face quadrature nodes,
/// plus the boundary penalisation in weak modes (with homogeneous data).
inline double convective_stab_form(const Discretization& disc, const HhoVector& w, const HhoVector& v,
                                   const HhoVector& z, RhoKind kind, double nu, BcMode mode,
                                   bool boundary_stab = true) {
  const Mesh& mesh = disc.mesh();
  const int Nk = disc.global().n_elem_scalar;
  const int nfs = disc.global().n_face_scalar;
  double acc = 0.0;
  for (int iT = 0; iT < mesh.n_elements(); ++iT) {
    const ElementOps& ops = disc.element(iT);
    for (int i = 0; i < ops.layout.n_faces(); ++i) {
      const ElementFaceTables& t = ops.face_tables[i];
      const FaceOps& fop = disc.face(t.iF);
      const Eigen::VectorXd pe = peclet_values(fop, t.n, w.face_block(t.iF), nu);
      for (int q = 0; q < fop.qr.size(); ++q) {
        Vec2 dv, dz;
        for (int c = 0; c < 2; ++c) {
          dv[c] = fop.Psi.row(q).dot(v.face_block(t.iF).segment(c * nfs, nfs)) -
                  t.Phi.row(q).head(Nk).dot(v.elem_block(iT).segment(c * Nk, Nk));
          dz[c] = fop.Psi.row(q).dot(z.face_block(t.iF).segment(c * nfs, nfs)) -
                  t.Phi.row(q).head(Nk).dot(z.elem_block(iT).segment(c * Nk, Nk));
        }
        acc += fop.w[q] * (nu / fop.h) * rho_eval(kind, pe[q]) * dv.dot(dz);
      }
    }
  }
  if (is_weak(mode) && boundary_stab) {
    for (int iF = 0; iF < mesh.n_faces(); ++iF) {
      if (!mesh.face(iF).is_boundary()) continue;
      const FaceOps& fop = disc.face(iF);
      const Vec2 nF = mesh.face(iF).normal;
      const Eigen::VectorXd pe = peclet_values(fop, nF, w.face_block(iF), nu);
      for (int q = 0; q < fop.qr.size(); ++q) {
        Vec2 vF, zF;
        for (int c = 0; c < 2; ++c) {
          vF[c] = fop.Psi.row(q).dot(v.face_block(iF).segment(c * nfs, nfs));
          zF[c] = fop.Psi.row(q).dot(z.face_block(iF).segment(c * nfs, nfs));
        }
        acc += fop.w[q] * (nu / fop.h) * rho_eval(kind, pe[q]) * vF.dot(zF);
      }
    }
  }
  return acc;
}

} // namespace hho

#endif
