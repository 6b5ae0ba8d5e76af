// Polygonal mesh: elements, faces with two-sided adjacency, generation of
// Cartesian grids, text-format I/O and validation diagnostics.

#ifndef HHO_MESH_HPP
#define HHO_MESH_HPP

#include "hho/geometry.hpp"

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hho {

struct Element {
  std::vector<int> vertex_ids; ///< CCW vertex loop
  std::vector<int> face_ids;   ///< sorted by global face index
  Vec2 centroid = Vec2::Zero();
  double diameter = 0.0;
  double measure = 0.0;
};

struct Face {
  std::array<int, 2> vertex_ids{-1, -1}; ///< oriented as in the first element's loop
  int elem_left = -1;                    ///< lower-indexed adjacent element
  int elem_right = -1;                   ///< -1 on the boundary
  Vec2 normal = Vec2::Zero();            ///< unit, points out of elem_left
  Vec2 midpoint = Vec2::Zero();
  double length = 0.0;

  bool is_boundary() const { return elem_right < 0; }
};

struct ValidationReport {
  std::vector<std::string> violations;
  double regularity_ratio = 0.0; ///< min over T of min_F h_F / h_T

  bool ok() const { return violations.empty(); }
};

/// Immutable planar polygonal mesh. Faces are deduplicated edges carrying
/// adjacency and a fixed unit normal; the stored normal points out of the
/// lower-indexed adjacent element so assembly is reproducible across runs.
class Mesh {
public:
  static constexpr int dim = 2;

  /// Builds a mesh from a vertex list and per-element CCW vertex loops.
  /// With strict=true, malformed elements (non-simple loops, clockwise
  /// orientation) are rejected with the element index in the message.
  static Mesh build(std::vector<Vec2> vertices, const std::vector<std::vector<int>>& loops,
                    bool strict = true) {
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.elements_.resize(loops.size());

    std::map<std::pair<int, int>, int> edge_index;
    for (std::size_t ie = 0; ie < loops.size(); ++ie) {
      const std::vector<int>& loop = loops[ie];
      if (loop.size() < 3) throw Error("mesh: element " + std::to_string(ie) + " has fewer than 3 vertices");
      std::vector<Vec2> pts;
      pts.reserve(loop.size());
      for (int iv : loop) {
        if (iv < 0 || iv >= static_cast<int>(m.vertices_.size()))
          throw Error("mesh: element " + std::to_string(ie) + " references unknown vertex " + std::to_string(iv));
        pts.push_back(m.vertices_[iv]);
      }
      if (strict) {
        if (!polygon_is_simple(pts))
          throw Error("mesh: element " + std::to_string(ie) + " is not a simple polygon");
        if (polygon_signed_area(pts) <= 0.0)
          throw Error("mesh: element " + std::to_string(ie) + " has clockwise or degenerate orientation");
      }

      Element& el = m.elements_[ie];
      el.vertex_ids = loop;
      el.measure = polygon_signed_area(pts);
      el.centroid = std::abs(el.measure) > 0 ? polygon_centroid(pts) : Vec2::Zero();
      el.diameter = points_diameter(pts);

      const std::size_t n = loop.size();
      for (std::size_t i = 0; i < n; ++i) {
        const int a = loop[i], b = loop[(i + 1) % n];
        const std::pair<int, int> key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        auto it = edge_index.find(key);
        if (it == edge_index.end()) {
          Face f;
          f.vertex_ids = {a, b};
          f.elem_left = static_cast<int>(ie);
          const Vec2 pa = m.vertices_[a], pb = m.vertices_[b];
          f.length = (pb - pa).norm();
          if (f.length <= 0.0) throw Error("mesh: zero-length face in element " + std::to_string(ie));
          f.midpoint = 0.5 * (pa + pb);
          const Vec2 t = (pb - pa) / f.length;
          f.normal = Vec2(t.y(), -t.x()); // outward of a CCW loop
          edge_index.emplace(key, static_cast<int>(m.faces_.size()));
          m.faces_.push_back(f);
        } else {
          Face& f = m.faces_[it->second];
          if (f.elem_right >= 0)
            throw Error("mesh: face shared by more than two elements near element " + std::to_string(ie));
          f.elem_right = static_cast<int>(ie);
        }
      }
    }

    for (std::size_t iF = 0; iF < m.faces_.size(); ++iF) {
      m.elements_[m.faces_[iF].elem_left].face_ids.push_back(static_cast<int>(iF));
      if (m.faces_[iF].elem_right >= 0)
        m.elements_[m.faces_[iF].elem_right].face_ids.push_back(static_cast<int>(iF));
    }
    for (Element& el : m.elements_) std::sort(el.face_ids.begin(), el.face_ids.end());

    m.h_ = 0.0;
    for (const Element& el : m.elements_) m.h_ = std::max(m.h_, el.diameter);
    return m;
  }

  /// Uniform nx-by-ny quadrilateral grid of an axis-aligned rectangle.
  static Mesh cartesian(int nx, int ny, const Rect& domain = Rect{}) {
    if (nx < 1 || ny < 1) throw Error("cartesian: nx and ny must be >= 1");
    if (domain.width() <= 0.0 || domain.height() <= 0.0) throw Error("cartesian: degenerate domain");
    const double dx = domain.width() / nx, dy = domain.height() / ny;
    std::vector<Vec2> vertices;
    vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        vertices.emplace_back(domain.x0 + i * dx, domain.y0 + j * dy);
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::vector<int>> loops;
    loops.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        loops.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    return build(std::move(vertices), loops);
  }

  /// Reads the POLYMESH text format:
  ///   POLYMESH 2
  ///   V
  ///   x y            (V lines)
  ///   E
  ///   m i1 ... im    (E lines, 0-based CCW vertex indices)
  static Mesh load_polymesh(const std::string& path, bool strict = true) {
    std::ifstream in(path);
    if (!in) throw Error("load_polymesh: cannot open '" + path + "'");
    return read_polymesh(in, strict);
  }

  static Mesh read_polymesh(std::istream& in, bool strict = true) {
    std::string tag;
    int dimension = 0;
    if (!(in >> tag >> dimension) || tag != "POLYMESH" || dimension != 2)
      throw Error("polymesh: bad header, expected 'POLYMESH 2'");
    std::size_t nv = 0;
    if (!(in >> nv)) throw Error("polymesh: missing vertex count");
    std::vector<Vec2> vertices(nv);
    for (std::size_t i = 0; i < nv; ++i)
      if (!(in >> vertices[i].x() >> vertices[i].y()))
        throw Error("polymesh: malformed vertex " + std::to_string(i));
    std::size_t ne = 0;
    if (!(in >> ne)) throw Error("polymesh: missing element count");
    std::vector<std::vector<int>> loops(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      std::size_t nloc = 0;
      if (!(in >> nloc) || nloc < 3) throw Error("polymesh: malformed element " + std::to_string(e));
      loops[e].resize(nloc);
      for (std::size_t i = 0; i < nloc; ++i)
        if (!(in >> loops[e][i])) throw Error("polymesh: malformed element " + std::to_string(e));
    }
    return build(std::move(vertices), loops, strict);
  }

  void save_polymesh(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("save_polymesh: cannot open '" + path + "'");
    write_polymesh(out);
  }

  void write_polymesh(std::ostream& out) const {
    out << "POLYMESH 2\n" << vertices_.size() << "\n";
    out.precision(17);
    for (const Vec2& v : vertices_) out << v.x() << " " << v.y() << "\n";
    out << elements_.size() << "\n";
    for (const Element& el : elements_) {
      out << el.vertex_ids.size();
      for (int iv : el.vertex_ids) out << " " << iv;
      out << "\n";
    }
  }

  /// Reports violations of the mesh invariants together with the regularity
  /// ratio min_T min_{F in F_T} h_F / h_T. Purely diagnostic.
  ValidationReport validate() const {
    ValidationReport rep;
    rep.regularity_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t ie = 0; ie < elements_.size(); ++ie) {
      const Element& el = elements_[ie];
      std::vector<Vec2> pts;
      for (int iv : el.vertex_ids) pts.push_back(vertices_[iv]);
      if (!polygon_is_simple(pts))
        rep.violations.push_back("element " + std::to_string(ie) + ": vertex loop is not simple");
      const double signed_area = polygon_signed_area(pts);
      if (signed_area <= 0.0)
        rep.violations.push_back("element " + std::to_string(ie) + ": orientation is not counterclockwise");
      if (el.measure <= 0.0)
        rep.violations.push_back("element " + std::to_string(ie) + ": non-positive measure");
      if (el.diameter <= 0.0)
        rep.violations.push_back("element " + std::to_string(ie) + ": non-positive diameter");
      if (!point_in_convex_hull(el.centroid, pts))
        rep.violations.push_back("element " + std::to_string(ie) + ": centroid outside convex hull");

      // closed polygon: sum of |F| n_TF vanishes
      Vec2 closure = Vec2::Zero();
      double perimeter = 0.0;
      for (int iF : el.face_ids) {
        closure += faces_[iF].length * outward_normal(iF, static_cast<int>(ie));
        perimeter += faces_[iF].length;
        rep.regularity_ratio = std::min(rep.regularity_ratio, faces_[iF].length / el.diameter);
      }
      if (closure.norm() > 1e-13 * perimeter)
        rep.violations.push_back("element " + std::to_string(ie) + ": face normals do not close");
    }
    for (std::size_t iF = 0; iF < faces_.size(); ++iF) {
      const Face& f = faces_[iF];
      if (f.length <= 0.0) rep.violations.push_back("face " + std::to_string(iF) + ": non-positive length");
      if (f.elem_left < 0) rep.violations.push_back("face " + std::to_string(iF) + ": missing adjacency");
      if (std::abs(f.normal.norm() - 1.0) > 1e-13)
        rep.violations.push_back("face " + std::to_string(iF) + ": normal is not unit");
    }
    return rep;
  }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Element& element(int i) const { return elements_[i]; }
  const Face& face(int i) const { return faces_[i]; }
  const Vec2& vertex(int i) const { return vertices_[i]; }
  int n_elements() const { return static_cast<int>(elements_.size()); }
  int n_faces() const { return static_cast<int>(faces_.size()); }
  double h() const { return h_; }

  int n_boundary_faces() const {
    int n = 0;
    for (const Face& f : faces_) n += f.is_boundary() ? 1 : 0;
    return n;
  }

  /// Unit normal to face iF pointing out of element iT.
  Vec2 outward_normal(int iF, int iT) const {
    const Face& f = faces_[iF];
    return f.elem_left == iT ? f.normal : Vec2(-f.normal);
  }

  /// Vertex loop of an element as coordinates.
  std::vector<Vec2> element_loop(int iT) const {
    std::vector<Vec2> pts;
    pts.reserve(elements_[iT].vertex_ids.size());
    for (int iv : elements_[iT].vertex_ids) pts.push_back(vertices_[iv]);
    return pts;
  }

private:
  std::vector<Vec2> vertices_;
  std::vector<Element> elements_;
  std::vector<Face> faces_;
  double h_ = 0.0;
};

} // namespace hho

#endif
