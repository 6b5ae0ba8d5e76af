// Degree-of-freedom layouts for the hybrid velocity space (element and face
// polynomials of degree k) paired with elementwise pressures, and the state
// vector over those unknowns.
//
// Vector-valued blocks are component-major: [all x-coeffs | all y-coeffs].
// Element pressure coefficients are stored in a mean-adapted basis whose
// first function is the constant 1 and whose remaining functions have zero
// mean on the element; this is what static condensation splits on.

#ifndef HHO_SPACE_HPP
#define HHO_SPACE_HPP

#include "hho/basis.hpp"
#include "hho/mesh.hpp"

#include <Eigen/Dense>

namespace hho {

/// Per-element layout of the local hybrid vector
/// [element velocity | face velocity blocks in ascending global face index].
struct LocalDofLayout {
  int k = 0;
  int n_elem_scalar = 0;  ///< dim P^k(T)
  int n_face_scalar = 0;  ///< dim P^k(F) = k+1
  std::vector<int> faces; ///< global face indices, ascending

  LocalDofLayout() = default;
  LocalDofLayout(const Mesh& mesh, int k_, int iT)
      : k(k_), n_elem_scalar(poly_dim_2d(k_)), n_face_scalar(poly_dim_1d(k_)), faces(mesh.element(iT).face_ids) {}

  int n_faces() const { return static_cast<int>(faces.size()); }
  int elem_block_size() const { return 2 * n_elem_scalar; }
  int face_block_size() const { return 2 * n_face_scalar; }
  int size() const { return elem_block_size() + n_faces() * face_block_size(); }
  int pressure_size() const { return n_elem_scalar; }
  int size_with_pressure() const { return size() + pressure_size(); }

  int elem_offset(int comp = 0) const { return comp * n_elem_scalar; }
  int face_offset(int local_face, int comp = 0) const {
    return elem_block_size() + local_face * face_block_size() + comp * n_face_scalar;
  }
  int pressure_offset() const { return size(); }

  /// Index of a local face within this element, by global face id.
  int local_face_index(int iF) const {
    for (int i = 0; i < n_faces(); ++i)
      if (faces[i] == iF) return i;
    throw Error("LocalDofLayout: face not adjacent to element");
  }
};

/// Global layout: all element velocity blocks, then all face velocity blocks,
/// then all pressure blocks.
struct GlobalDofLayout {
  int k = 0;
  int n_elements = 0;
  int n_faces = 0;
  int n_elem_scalar = 0;
  int n_face_scalar = 0;

  GlobalDofLayout() = default;
  GlobalDofLayout(const Mesh& mesh, int k_)
      : k(k_), n_elements(mesh.n_elements()), n_faces(mesh.n_faces()), n_elem_scalar(poly_dim_2d(k_)),
        n_face_scalar(poly_dim_1d(k_)) {}

  int elem_block_size() const { return 2 * n_elem_scalar; }
  int face_block_size() const { return 2 * n_face_scalar; }
  int pressure_block_size() const { return n_elem_scalar; }

  int n_elem_dofs() const { return n_elements * elem_block_size(); }
  int n_face_dofs() const { return n_faces * face_block_size(); }
  int n_pressure_dofs() const { return n_elements * pressure_block_size(); }
  int size() const { return n_elem_dofs() + n_face_dofs() + n_pressure_dofs(); }

  int elem_offset(int iT) const { return iT * elem_block_size(); }
  int face_offset(int iF) const { return n_elem_dofs() + iF * face_block_size(); }
  int pressure_offset(int iT) const { return n_elem_dofs() + n_face_dofs() + iT * pressure_block_size(); }
};

/// Coefficient vector over the hybrid velocity space and the broken pressure
/// space. Pressure blocks use the mean-adapted basis (see header note).
class HhoVector {
public:
  HhoVector() = default;
  HhoVector(const GlobalDofLayout& layout) : layout_(layout), data_(Eigen::VectorXd::Zero(layout.size())) {}

  const GlobalDofLayout& layout() const { return layout_; }
  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }

  auto elem_block(int iT) { return data_.segment(layout_.elem_offset(iT), layout_.elem_block_size()); }
  auto elem_block(int iT) const { return data_.segment(layout_.elem_offset(iT), layout_.elem_block_size()); }
  auto face_block(int iF) { return data_.segment(layout_.face_offset(iF), layout_.face_block_size()); }
  auto face_block(int iF) const { return data_.segment(layout_.face_offset(iF), layout_.face_block_size()); }
  auto pressure_block(int iT) { return data_.segment(layout_.pressure_offset(iT), layout_.pressure_block_size()); }
  auto pressure_block(int iT) const {
    return data_.segment(layout_.pressure_offset(iT), layout_.pressure_block_size());
  }

  /// Local hybrid velocity vector (v_T, (v_F)_{F in F_T}) for one element.
  Eigen::VectorXd local_velocity(const LocalDofLayout& loc, int iT) const {
    Eigen::VectorXd v(loc.size());
    v.head(loc.elem_block_size()) = elem_block(iT);
    for (int i = 0; i < loc.n_faces(); ++i)
      v.segment(loc.face_offset(i), loc.face_block_size()) = face_block(loc.faces[i]);
    return v;
  }

  /// Scatter-add of a local hybrid velocity increment.
  void add_local_velocity(const LocalDofLayout& loc, int iT, const Eigen::VectorXd& v) {
    elem_block(iT) += v.head(loc.elem_block_size());
    for (int i = 0; i < loc.n_faces(); ++i)
      face_block(loc.faces[i]) += v.segment(loc.face_offset(i), loc.face_block_size());
  }

  HhoVector& operator+=(const HhoVector& o) {
    data_ += o.data_;
    return *this;
  }
  HhoVector& operator-=(const HhoVector& o) {
    data_ -= o.data_;
    return *this;
  }
  HhoVector& operator*=(double a) {
    data_ *= a;
    return *this;
  }
  friend HhoVector operator-(HhoVector a, const HhoVector& b) { return a -= b; }
  friend HhoVector operator+(HhoVector a, const HhoVector& b) { return a += b; }

private:
  GlobalDofLayout layout_;
  Eigen::VectorXd data_;
};

} // namespace hho

#endif
