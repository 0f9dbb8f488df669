// Polygon representation, admissibility report and triangulated sub-meshes.
//
// A Polygon is an immutable counter-clockwise simple loop with derived
// per-edge data (unit outward normal, length, affine parametrization).
// SubMesh is a conforming triangulation obtained by ear clipping followed
// by uniform midpoint refinement; it keeps a map from boundary nodes back
// to the polygon edge that carries them.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polyhdiv/errors.hpp"

namespace polyhdiv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const;
  double operator[](int i) const { return i == 0 ? x : y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Edge {
  Vec2 start;
  Vec2 end;
  Vec2 normal;    // unit outward normal
  Vec2 tangent;   // unit tangent, start -> end
  double length = 0.0;

  // Affine parametrization t in [0,1] |-> point on the edge.
  Vec2 point(double t) const { return start + (end - start) * t; }
  Vec2 midpoint() const { return point(0.5); }
};

class Polygon {
public:
  // Vertices are normalized to counter-clockwise order; throws GeometryError
  // on degenerate or self-intersecting input.
  explicit Polygon(std::vector<Vec2> vertices);

  int n_faces() const { return static_cast<int>(edges_.size()); }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int j) const { return edges_.at(j); }

  double area() const { return area_; }
  double diameter() const { return diameter_; }
  Vec2 centroid() const { return centroid_; }

  bool contains(const Vec2& p, double tol = 0.0) const;

private:
  std::vector<Vec2> vertices_;
  std::vector<Edge> edges_;
  double area_ = 0.0;
  double diameter_ = 0.0;
  Vec2 centroid_;
};

struct AdmissibilityReport {
  std::vector<int> axis_parallel_edges;   // within tol_angle of an axis
  std::vector<int> near_parallel_edges;   // within warn_angle, not flagged above
  double aspect_ratio = 0.0;              // circumscribed / inscribed radius
  bool ok_for_coordinate_dofs = false;
};

// Tags a boundary node of the sub-mesh. Polygon vertices keep their vertex
// index; other boundary nodes carry the owning edge and its parameter.
struct BoundaryNode {
  int node = -1;
  int vertex = -1;  // polygon vertex index, or -1
  int edge = -1;    // owning polygon edge (for vertex nodes: the edge starting there)
  double t = 0.0;
};

struct BoundarySegment {
  int tri = -1;        // owning triangle
  int local_edge = -1; // edge (local_edge, local_edge+1) of that triangle
  int edge = -1;       // polygon edge
  double t0 = 0.0;     // parameter range on the polygon edge
  double t1 = 0.0;
  int n0 = -1;         // mesh nodes at t0 / t1
  int n1 = -1;
};

class SubMesh {
public:
  SubMesh(const Polygon& polygon, double h_target);

  const Polygon& polygon() const { return polygon_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return tris_; }
  double h() const { return h_; }
  int refinement_level() const { return levels_; }

  // Boundary structure
  const std::vector<BoundaryNode>& boundary_nodes() const { return bnodes_; }
  const std::vector<std::vector<BoundarySegment>>& boundary_segments() const {
    return bsegs_;
  }
  bool is_boundary_node(int n) const { return bindex_[n] >= 0; }
  const BoundaryNode& boundary_node(int n) const { return bnodes_[bindex_[n]]; }

  double triangle_area(int t) const;
  // Triangle containing p (barycentric tolerance relative to diameter);
  // throws DomainError when p lies outside the polygon.
  int locate(const Vec2& p, std::array<double, 3>* bary) const;

private:
  Polygon polygon_;  // owned copy; fields refer back to it
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<BoundaryNode> bnodes_;
  std::vector<int> bindex_;  // node -> index into bnodes_, or -1
  std::vector<std::vector<BoundarySegment>> bsegs_;  // per polygon edge, sorted by t0
  double h_ = 0.0;
  int levels_ = 0;

  void refine();
  void finalize(double h_target);
};

// Reads {"vertices": [[x, y], ...]} from a JSON document.
Polygon load_polygon(const std::string& path);
Polygon polygon_from_json_text(const std::string& text);

AdmissibilityReport check_admissibility(const Polygon& p, double tol_angle = 1e-9,
                                        double warn_angle = 1e-3);

SubMesh triangulate(const Polygon& p, double h_target);

}  // namespace polyhdiv
