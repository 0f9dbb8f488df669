#include "polyhdiv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace polyhdiv {

double Vec2::norm() const { return std::hypot(x, y); }

namespace {

double signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % n];
    a += p.cross(q);
  }
  return 0.5 * a;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q - p).cross(r - p);
  };
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 &&
      o3 != 0 && o4 != 0) {
    return true;
  }
  return false;
}

}  // namespace

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const int n = static_cast<int>(vertices_.size());
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");

  double scale = 0.0;
  for (const Vec2& v : vertices_) scale = std::max(scale, std::max(std::abs(v.x), std::abs(v.y)));
  if (scale == 0.0) scale = 1.0;

  for (int i = 0; i < n; ++i) {
    const Vec2 d = vertices_[(i + 1) % n] - vertices_[i];
    if (d.norm() <= 1e-14 * scale) {
      throw GeometryError("duplicate consecutive vertices at index " + std::to_string(i));
    }
  }

  if (signed_area(vertices_) < 0.0) {
    std::reverse(vertices_.begin(), vertices_.end());
  }
  area_ = signed_area(vertices_);
  if (area_ <= 0.0) throw GeometryError("polygon has non-positive area");

  // Simplicity: no two non-adjacent edges may cross.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n])) {
        throw GeometryError("self-intersecting polygon (edges " + std::to_string(i) +
                            " and " + std::to_string(j) + ")");
      }
    }
  }

  edges_.resize(n);
  Vec2 c{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    Edge& e = edges_[i];
    e.start = vertices_[i];
    e.end = vertices_[(i + 1) % n];
    const Vec2 d = e.end - e.start;
    e.length = d.norm();
    e.tangent = d * (1.0 / e.length);
    // CCW loop: rotating the tangent by -90 degrees points outward.
    e.normal = Vec2{e.tangent.y, -e.tangent.x};
    c = c + (e.start + e.end) * (e.start.cross(e.end));
  }
  centroid_ = c * (1.0 / (6.0 * area_));

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      diameter_ = std::max(diameter_, (vertices_[i] - vertices_[j]).norm());
    }
  }
}

bool Polygon::contains(const Vec2& p, double tol) const {
  // Winding by ray casting with an edge-distance tolerance.
  const int n = n_faces();
  bool inside = false;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xint) inside = !inside;
    }
  }
  if (inside || tol <= 0.0) return inside;
  for (const Edge& e : edges_) {
    const double s = std::clamp((p - e.start).dot(e.tangent) / e.length, 0.0, 1.0);
    if ((p - e.point(s)).norm() <= tol) return true;
  }
  return false;
}

Polygon polygon_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw GeometryError(std::string("cannot parse polygon document: ") + e.what());
  }
  if (!doc.contains("vertices") || !doc["vertices"].is_array()) {
    throw GeometryError("polygon document lacks a \"vertices\" array");
  }
  std::vector<Vec2> verts;
  for (const auto& item : doc["vertices"]) {
    if (!item.is_array() || item.size() != 2) {
      throw GeometryError("vertex entries must be [x, y] pairs");
    }
    verts.emplace_back(item[0].get<double>(), item[1].get<double>());
  }
  return Polygon(std::move(verts));
}

Polygon load_polygon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open polygon file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return polygon_from_json_text(buf.str());
}

AdmissibilityReport check_admissibility(const Polygon& p, double tol_angle,
                                        double warn_angle) {
  AdmissibilityReport rep;
  for (int j = 0; j < p.n_faces(); ++j) {
    const Vec2 t = p.edge(j).tangent;
    // Angle to the nearest axis direction.
    const double ang = std::min(std::abs(std::atan2(t.y, t.x)),
                                std::abs(std::atan2(t.x, t.y)));
    const double dev = std::min({ang, std::abs(M_PI - ang), std::abs(M_PI / 2 - ang)});
    if (dev <= tol_angle) {
      rep.axis_parallel_edges.push_back(j);
    } else if (dev <= warn_angle) {
      rep.near_parallel_edges.push_back(j);
    }
  }
  const Vec2 c = p.centroid();
  double rmax = 0.0;
  double rmin = std::numeric_limits<double>::max();
  for (const Vec2& v : p.vertices()) rmax = std::max(rmax, (v - c).norm());
  for (const Edge& e : p.edges()) {
    const double s = std::clamp((c - e.start).dot(e.tangent) / e.length, 0.0, 1.0);
    rmin = std::min(rmin, (c - e.point(s)).norm());
  }
  rep.aspect_ratio = rmax / rmin;
  rep.ok_for_coordinate_dofs = rep.axis_parallel_edges.empty();
  return rep;
}

namespace {

// Ear clipping of a simple CCW polygon; returns triangles as vertex indices.
std::vector<std::array<int, 3>> ear_clip(const Polygon& poly) {
  std::vector<int> idx(poly.n_faces());
  for (int i = 0; i < poly.n_faces(); ++i) idx[i] = i;
  const std::vector<Vec2>& v = poly.vertices();

  auto tri_contains = [&](int a, int b, int c, int q) {
    const Vec2& A = v[a];
    const Vec2& B = v[b];
    const Vec2& C = v[c];
    const Vec2& P = v[q];
    const double d1 = (B - A).cross(P - A);
    const double d2 = (C - B).cross(P - B);
    const double d3 = (A - C).cross(P - C);
    return d1 >= 0 && d2 >= 0 && d3 >= 0;
  };

  std::vector<std::array<int, 3>> tris;
  int guard = 0;
  while (idx.size() > 3) {
    const int m = static_cast<int>(idx.size());
    bool clipped = false;
    for (int i = 0; i < m; ++i) {
      const int ia = idx[(i + m - 1) % m];
      const int ib = idx[i];
      const int ic = idx[(i + 1) % m];
      if ((v[ib] - v[ia]).cross(v[ic] - v[ib]) <= 0) continue;  // reflex corner
      bool ear = true;
      for (int j = 0; j < m; ++j) {
        const int q = idx[j];
        if (q == ia || q == ib || q == ic) continue;
        if (tri_contains(ia, ib, ic, q)) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      tris.push_back({ia, ib, ic});
      idx.erase(idx.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped || ++guard > 4 * poly.n_faces() * poly.n_faces()) {
      throw MeshError("ear clipping failed; polygon may be degenerate");
    }
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

}  // namespace

SubMesh::SubMesh(const Polygon& polygon, double h_target) : polygon_(polygon) {
  if (h_target <= 0.0) throw MeshError("h_target must be positive");
  nodes_ = polygon.vertices();
  tris_ = ear_clip(polygon);

  const int n = polygon.n_faces();
  bindex_.assign(nodes_.size(), -1);
  for (int i = 0; i < n; ++i) {
    BoundaryNode bn;
    bn.node = i;
    bn.vertex = i;
    bn.edge = i;  // edge starting at this vertex
    bn.t = 0.0;
    bindex_[i] = static_cast<int>(bnodes_.size());
    bnodes_.push_back(bn);
  }
  // Boundary P1-edge -> polygon edge, maintained through refinement.
  std::map<std::pair<int, int>, int> bedge;
  for (int i = 0; i < n; ++i) bedge[{i, (i + 1) % n}] = i;

  auto edge_param = [&](int node, int edge) -> double {
    const BoundaryNode& bn = bnodes_[bindex_[node]];
    if (bn.vertex >= 0) {
      if (bn.vertex == edge + 1 || (edge == n - 1 && bn.vertex == 0)) return 1.0;
      return 0.0;
    }
    return bn.t;
  };

  auto compute_h = [&]() {
    double h = 0.0;
    for (const auto& t : tris_) {
      for (int e = 0; e < 3; ++e) {
        h = std::max(h, (nodes_[t[e]] - nodes_[t[(e + 1) % 3]]).norm());
      }
    }
    return h;
  };

  h_ = compute_h();
  while (h_ > h_target) {
    std::map<std::pair<int, int>, int> midpoint;
    std::map<std::pair<int, int>, int> new_bedge;
    auto mid = [&](int a, int b) -> int {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find({key.first, key.second});
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(nodes_.size());
      nodes_.push_back((nodes_[a] + nodes_[b]) * 0.5);
      bindex_.push_back(-1);
      midpoint[{key.first, key.second}] = id;
      auto be = bedge.find({a, b});
      if (be == bedge.end()) be = bedge.find({b, a});
      if (be != bedge.end()) {
        const int e = be->second;
        BoundaryNode bn;
        bn.node = id;
        bn.edge = e;
        bn.t = 0.5 * (edge_param(a, e) + edge_param(b, e));
        bindex_[id] = static_cast<int>(bnodes_.size());
        bnodes_.push_back(bn);
        // orientation follows the stored boundary edge
        const int first = (be->first.first == a && be->first.second == b) ? a : b;
        const int second = (first == a) ? b : a;
        new_bedge[{first, id}] = e;
        new_bedge[{id, second}] = e;
      }
      return id;
    };

    std::vector<std::array<int, 3>> next;
    next.reserve(4 * tris_.size());
    for (const auto& t : tris_) {
      const int m01 = mid(t[0], t[1]);
      const int m12 = mid(t[1], t[2]);
      const int m20 = mid(t[2], t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m01, m12, m20});
    }
    tris_ = std::move(next);
    for (auto& [k, e] : bedge) {
      if (midpoint.find(std::minmax(k.first, k.second)) == midpoint.end()) {
        new_bedge[k] = e;  // untouched boundary edge (cannot happen after full split)
      }
    }
    bedge = std::move(new_bedge);
    h_ = compute_h();
    ++levels_;
    if (levels_ > 24) throw MeshError("refinement failed to reach target size");
  }

  finalize(h_target);

  // Boundary segments per polygon edge, from the final boundary edge map.
  bsegs_.assign(n, {});
  std::map<std::pair<int, int>, std::pair<int, int>> tri_of_edge;  // (a,b)->(tri,local)
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
    for (int e = 0; e < 3; ++e) {
      tri_of_edge[{tris_[t][e], tris_[t][(e + 1) % 3]}] = {t, e};
    }
  }
  for (const auto& [k, e] : bedge) {
    auto it = tri_of_edge.find({k.first, k.second});
    if (it == tri_of_edge.end()) it = tri_of_edge.find({k.second, k.first});
    if (it == tri_of_edge.end()) throw MeshError("boundary edge lost during refinement");
    BoundarySegment seg;
    seg.tri = it->second.first;
    seg.local_edge = it->second.second;
    seg.edge = e;
    seg.n0 = k.first;
    seg.n1 = k.second;
    seg.t0 = edge_param(k.first, e);
    seg.t1 = edge_param(k.second, e);
    if (seg.t0 > seg.t1) {
      std::swap(seg.t0, seg.t1);
      std::swap(seg.n0, seg.n1);
    }
    bsegs_[e].push_back(seg);
  }
  for (auto& list : bsegs_) {
    std::sort(list.begin(), list.end(),
              [](const BoundarySegment& a, const BoundarySegment& b) { return a.t0 < b.t0; });
  }
}

void SubMesh::finalize(double /*h_target*/) {
  const double poly_area = polygon_.area();
  double total = 0.0;
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
    const double a = triangle_area(t);
    if (a < 1e-14 * poly_area) {
      throw MeshError("degenerate triangle " + std::to_string(t));
    }
    total += a;
  }
  if (std::abs(total - poly_area) > 1e-12 * poly_area) {
    throw MeshError("triangulated area does not match polygon area");
  }
}

double SubMesh::triangle_area(int t) const {
  const auto& tri = tris_[t];
  return 0.5 * (nodes_[tri[1]] - nodes_[tri[0]]).cross(nodes_[tri[2]] - nodes_[tri[0]]);
}

int SubMesh::locate(const Vec2& p, std::array<double, 3>* bary) const {
  const double tol = 1e-10 * polygon_.diameter();
  int best = -1;
  double best_violation = std::numeric_limits<double>::max();
  std::array<double, 3> best_bary{};
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
    const auto& tri = tris_[t];
    const Vec2& a = nodes_[tri[0]];
    const Vec2& b = nodes_[tri[1]];
    const Vec2& c = nodes_[tri[2]];
    const double det = (b - a).cross(c - a);
    const double l1 = (p - a).cross(c - a) / det;
    const double l2 = (b - a).cross(p - a) / det;
    const double l0 = 1.0 - l1 - l2;
    const double violation = -std::min({l0, l1, l2});
    if (violation < best_violation) {
      best_violation = violation;
      best = t;
      best_bary = {l0, l1, l2};
    }
    if (violation <= 0.0) break;
  }
  const double diam_rel = best_violation * polygon_.diameter();
  if (diam_rel > tol && !polygon_.contains(p, tol)) {
    throw DomainError("point outside polygon");
  }
  if (bary) *bary = best_bary;
  return best;
}

SubMesh triangulate(const Polygon& p, double h_target) { return SubMesh(p, h_target); }

}  // namespace polyhdiv
