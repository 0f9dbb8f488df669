#include "polyhdiv/poisson.hpp"

#include <algorithm>
#include <cmath>

namespace polyhdiv {

DiscreteField::DiscreteField(std::shared_ptr<const PoissonSolver> solver,
                             Eigen::VectorXd coeffs)
    : solver_(std::move(solver)), coeffs_(std::move(coeffs)) {}

PoissonSolver::PoissonSolver(std::shared_ptr<const SubMesh> mesh, int fe_order,
                             int volume_exactness)
    : mesh_(std::move(mesh)), order_(fe_order) {
  if (order_ < 1) throw SolveError("finite element order must be >= 1");
  n_local_ = (order_ + 1) * (order_ + 2) / 2;
  if (volume_exactness < 0) volume_exactness = 2 * order_ + 2;
  ref_rule_ = triangle_quadrature(volume_exactness);
  build_reference();
  build_nodes();
  assemble();
}

void PoissonSolver::build_reference() {
  const int r = order_;
  for (int j = 0; j <= r; ++j) {
    for (int i = 0; i <= r - j; ++i) {
      ref_nodes_.push_back({static_cast<double>(i) / r, static_cast<double>(j) / r});
    }
  }
  ref_monos_ = monomial_basis(SpaceDesc::Pt(r));
  Eigen::MatrixXd V(n_local_, n_local_);
  for (int n = 0; n < n_local_; ++n) {
    for (int m = 0; m < n_local_; ++m) V(n, m) = ref_monos_[m].eval(ref_nodes_[n]);
  }
  coeff_ = V.inverse();

  const int nq = static_cast<int>(ref_rule_.weights.size());
  shape_at_quad_.resize(nq, n_local_);
  grad_at_quad_.resize(nq);
  for (int q = 0; q < nq; ++q) {
    const Vec2 p = ref_rule_.nodes[q];
    shape_at_quad_.row(q) = shape_values(p.x, p.y).transpose();
    grad_at_quad_[q] = shape_gradients(p.x, p.y);
  }
}

Eigen::VectorXd PoissonSolver::shape_values(double xi, double eta) const {
  Eigen::VectorXd mono(n_local_);
  for (int m = 0; m < n_local_; ++m) mono(m) = ref_monos_[m].eval({xi, eta});
  return coeff_.transpose() * mono;
}

Eigen::MatrixXd PoissonSolver::shape_gradients(double xi, double eta) const {
  Eigen::MatrixXd dm(n_local_, 2);
  for (int m = 0; m < n_local_; ++m) {
    const auto& mo = ref_monos_[m];
    dm(m, 0) = mo.a1 == 0 ? 0.0
                          : mo.a1 * Monomial2D{mo.a1 - 1, mo.a2}.eval({xi, eta});
    dm(m, 1) = mo.a2 == 0 ? 0.0
                          : mo.a2 * Monomial2D{mo.a1, mo.a2 - 1}.eval({xi, eta});
  }
  return coeff_.transpose() * dm;  // (nloc x 2)
}

void PoissonSolver::build_nodes() {
  const SubMesh& mesh = *mesh_;
  const auto& tris = mesh.triangles();
  const int r = order_;

  node_pos_ = mesh.nodes();
  bc_tag_.assign(node_pos_.size(), {});
  // P1 vertex tags
  for (size_t n = 0; n < mesh.nodes().size(); ++n) {
    if (mesh.is_boundary_node(static_cast<int>(n))) {
      const BoundaryNode& bn = mesh.boundary_node(static_cast<int>(n));
      BoundaryTag tag;
      tag.on_boundary = true;
      tag.vertex = bn.vertex;
      tag.edge = bn.edge;
      tag.t = bn.t;
      bc_tag_[n] = tag;
    }
  }

  // Boundary P1 edges with their parameter ranges.
  struct BSeg {
    int edge;
    double ta, tb;  // params at node a (min id) and node b (max id)
  };
  std::map<std::pair<int, int>, BSeg> bseg;
  const int nfaces = mesh.polygon().n_faces();
  auto vertex_param_on_edge = [&](int vertex, int edge) {
    return (vertex == (edge + 1) % nfaces) ? 1.0 : 0.0;
  };
  for (int e = 0; e < nfaces; ++e) {
    for (const BoundarySegment& s : mesh.boundary_segments()[e]) {
      const int a = std::min(s.n0, s.n1);
      const int b = std::max(s.n0, s.n1);
      const double ta = (a == s.n0) ? s.t0 : s.t1;
      const double tb = (a == s.n0) ? s.t1 : s.t0;
      bseg[{a, b}] = {e, ta, tb};
    }
  }

  std::map<std::array<int, 3>, int> edge_node;  // (min, max, step) -> node
  tri_nodes_.assign(tris.size(), std::vector<int>(n_local_, -1));
  geom_.resize(tris.size());

  auto get_edge_node = [&](int na, int nb, int q) -> int {
    const int lo = std::min(na, nb);
    const int hi = std::max(na, nb);
    const int step = (lo == na) ? q : r - q;
    const std::array<int, 3> key{lo, hi, step};
    auto it = edge_node.find(key);
    if (it != edge_node.end()) return it->second;
    const int id = static_cast<int>(node_pos_.size());
    node_pos_.push_back(node_pos_[lo] +
                        (node_pos_[hi] - node_pos_[lo]) * (static_cast<double>(step) / r));
    BoundaryTag tag;
    auto bs = bseg.find({lo, hi});
    if (bs != bseg.end()) {
      tag.on_boundary = true;
      tag.edge = bs->second.edge;
      double tlo = bs->second.ta;
      double thi = bs->second.tb;
      // Params of the endpoints on the polygon edge; vertices report the
      // parameter for this particular edge.
      if (bc_tag_[lo].vertex >= 0) tlo = vertex_param_on_edge(bc_tag_[lo].vertex, tag.edge);
      if (bc_tag_[hi].vertex >= 0) thi = vertex_param_on_edge(bc_tag_[hi].vertex, tag.edge);
      tag.t = tlo + (thi - tlo) * (static_cast<double>(step) / r);
    }
    bc_tag_.push_back(tag);
    edge_node[key] = id;
    return id;
  };

  for (size_t t = 0; t < tris.size(); ++t) {
    const int A = tris[t][0];
    const int B = tris[t][1];
    const int C = tris[t][2];
    TriGeom g;
    g.a = mesh.nodes()[A];
    g.ab = mesh.nodes()[B] - g.a;
    g.ac = mesh.nodes()[C] - g.a;
    g.det = g.ab.cross(g.ac);
    Eigen::Matrix2d J;
    J << g.ab.x, g.ac.x, g.ab.y, g.ac.y;
    g.inv_jt = J.inverse().transpose();
    geom_[t] = g;

    int local = 0;
    for (int j = 0; j <= r; ++j) {
      for (int i = 0; i <= r - j; ++i, ++local) {
        int id;
        if (i == 0 && j == 0) {
          id = A;
        } else if (i == r && j == 0) {
          id = B;
        } else if (i == 0 && j == r) {
          id = C;
        } else if (j == 0) {
          id = get_edge_node(A, B, i);
        } else if (i + j == r) {
          id = get_edge_node(B, C, j);
        } else if (i == 0) {
          id = get_edge_node(A, C, j);
        } else {
          id = static_cast<int>(node_pos_.size());
          node_pos_.push_back(g.a + g.ab * (static_cast<double>(i) / r) +
                              g.ac * (static_cast<double>(j) / r));
          bc_tag_.push_back({});
        }
        tri_nodes_[t][local] = id;
      }
    }
  }

  interior_index_.assign(node_pos_.size(), -1);
  for (size_t n = 0; n < node_pos_.size(); ++n) {
    if (!bc_tag_[n].on_boundary) {
      interior_index_[n] = static_cast<int>(interior_nodes_.size());
      interior_nodes_.push_back(static_cast<int>(n));
    }
  }
}

void PoissonSolver::assemble() {
  const int nq = quad_size();
  const QuadratureRule grad_rule = triangle_quadrature(std::max(0, 2 * (order_ - 1)));
  std::vector<Eigen::MatrixXd> grads(grad_rule.weights.size());
  for (size_t q = 0; q < grad_rule.weights.size(); ++q) {
    grads[q] = shape_gradients(grad_rule.nodes[q].x, grad_rule.nodes[q].y);
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(tri_nodes_.size() * n_local_ * n_local_);
  for (size_t t = 0; t < tri_nodes_.size(); ++t) {
    const TriGeom& g = geom_[t];
    Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(n_local_, n_local_);
    for (size_t q = 0; q < grad_rule.weights.size(); ++q) {
      Eigen::MatrixXd gphys = grads[q] * g.inv_jt.transpose();  // (nloc x 2)
      ke += grad_rule.weights[q] * g.det * gphys * gphys.transpose();
    }
    for (int i = 0; i < n_local_; ++i) {
      for (int j = 0; j < n_local_; ++j) {
        trip.emplace_back(tri_nodes_[t][i], tri_nodes_[t][j], ke(i, j));
      }
    }
  }
  const int N = n_nodes();
  stiffness_.resize(N, N);
  stiffness_.setFromTriplets(trip.begin(), trip.end());

  // Interior block factorization.
  const int ni = static_cast<int>(interior_nodes_.size());
  std::vector<Eigen::Triplet<double>> itrip;
  for (int col = 0; col < stiffness_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it; ++it) {
      const int ri = interior_index_[it.row()];
      const int ci = interior_index_[it.col()];
      if (ri >= 0 && ci >= 0) itrip.emplace_back(ri, ci, it.value());
    }
  }
  Eigen::SparseMatrix<double> kii(ni, ni);
  kii.setFromTriplets(itrip.begin(), itrip.end());
  ldlt_.compute(kii);
  if (ldlt_.info() != Eigen::Success) {
    throw SolveError("factorization of the interior stiffness block failed");
  }
  (void)nq;
}

double PoissonSolver::boundary_value(const PoissonProblem& prob,
                                     const BoundaryTag& tag) const {
  const int n = mesh_->polygon().n_faces();
  if (prob.boundary_fn) {
    // position of the node
    const Vec2 p = (tag.vertex >= 0) ? mesh_->polygon().vertices()[tag.vertex]
                                     : mesh_->polygon().edge(tag.edge).point(tag.t);
    return prob.boundary_fn(p);
  }
  double v = prob.whole_boundary_constant ? prob.constant_value : 0.0;
  if (tag.vertex >= 0) {
    // A vertex belongs to the edge starting there and the edge ending there;
    // every data-carrying incident edge contributes its one-sided value.
    const int e_start = tag.vertex;             // t = 0
    const int e_end = (tag.vertex + n - 1) % n; // t = 1
    auto it = prob.boundary.find(e_start);
    if (it != prob.boundary.end()) v += it->second.eval(-1.0);
    it = prob.boundary.find(e_end);
    if (it != prob.boundary.end()) v += it->second.eval(1.0);
    return v;
  }
  auto it = prob.boundary.find(tag.edge);
  if (it != prob.boundary.end()) v += it->second.eval(2.0 * tag.t - 1.0);
  return v;
}

DiscreteField PoissonSolver::solve(const PoissonProblem& prob) const {
  const int N = n_nodes();
  const int ni = static_cast<int>(interior_nodes_.size());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(N);

  for (int n = 0; n < N; ++n) {
    if (bc_tag_[n].on_boundary) u(n) = boundary_value(prob, bc_tag_[n]);
  }

  // Load vector: Delta u = p has weak form (grad u, grad v) = -(p, v).
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  if (prob.rhs.total_degree() >= 0) {
    for (size_t t = 0; t < tri_nodes_.size(); ++t) {
      const TriGeom& g = geom_[t];
      Eigen::VectorXd be = Eigen::VectorXd::Zero(n_local_);
      for (int q = 0; q < quad_size(); ++q) {
        const Vec2 p = quad_point(static_cast<int>(t), q);
        be += (-quad_weight(static_cast<int>(t), q) * prob.rhs.eval(p)) *
              shape_at_quad_.row(q).transpose();
      }
      for (int i = 0; i < n_local_; ++i) b(tri_nodes_[t][i]) += be(i);
      (void)g;
    }
  }

  // Restrict to interior, moving boundary data to the right-hand side.
  Eigen::VectorXd bi(ni);
  for (int i = 0; i < ni; ++i) bi(i) = b(interior_nodes_[i]);
  Eigen::VectorXd ku = stiffness_ * u;
  for (int i = 0; i < ni; ++i) bi(i) -= ku(interior_nodes_[i]);

  const Eigen::VectorXd ui = ldlt_.solve(bi);
  if (ldlt_.info() != Eigen::Success) throw SolveError("linear solve failed");
  for (int i = 0; i < ni; ++i) u(interior_nodes_[i]) += ui(i);

  // Interior residual guards against assembly mistakes.
  Eigen::VectorXd res = stiffness_ * u - b;
  double rnorm = 0.0;
  double bscale = std::max(1.0e-300, b.norm() + (stiffness_ * u).norm());
  for (int i = 0; i < ni; ++i) rnorm += res(interior_nodes_[i]) * res(interior_nodes_[i]);
  rnorm = std::sqrt(rnorm);
  if (rnorm > 1e-10 * std::max(1.0, bscale)) {
    throw SolveError("interior residual too large: " + std::to_string(rnorm));
  }

  return DiscreteField(shared_from_this(), std::move(u));
}

Vec2 PoissonSolver::quad_point(int tri, int q) const {
  const TriGeom& g = geom_[tri];
  const Vec2 r = ref_rule_.nodes[q];
  return g.a + g.ab * r.x + g.ac * r.y;
}

double PoissonSolver::quad_weight(int tri, int q) const {
  return ref_rule_.weights[q] * geom_[tri].det;
}

double DiscreteField::value_at_quad(int tri, int q) const {
  const auto& nodes = solver_->tri_nodes_[tri];
  double v = 0.0;
  for (int i = 0; i < solver_->n_local_; ++i) {
    v += solver_->shape_at_quad_(q, i) * coeffs_(nodes[i]);
  }
  return v;
}

Vec2 DiscreteField::gradient_at_quad(int tri, int q) const {
  const auto& nodes = solver_->tri_nodes_[tri];
  const auto& g = solver_->geom_[tri];
  Eigen::RowVector2d acc = Eigen::RowVector2d::Zero();
  for (int i = 0; i < solver_->n_local_; ++i) {
    acc += coeffs_(nodes[i]) * solver_->grad_at_quad_[q].row(i);
  }
  const Eigen::Vector2d phys = g.inv_jt * acc.transpose();
  return {phys(0), phys(1)};
}

double DiscreteField::evaluate(const Vec2& p) const {
  std::array<double, 3> bary{};
  const int tri = solver_->mesh().locate(p, &bary);
  const Eigen::VectorXd phi = solver_->shape_values(bary[1], bary[2]);
  const auto& nodes = solver_->tri_nodes_[tri];
  double v = 0.0;
  for (int i = 0; i < solver_->n_local_; ++i) v += phi(i) * coeffs_(nodes[i]);
  return v;
}

Vec2 DiscreteField::evaluate_gradient(const Vec2& p) const {
  std::array<double, 3> bary{};
  const int tri = solver_->mesh().locate(p, &bary);
  const Eigen::MatrixXd dphi = solver_->shape_gradients(bary[1], bary[2]);
  const auto& nodes = solver_->tri_nodes_[tri];
  Eigen::RowVector2d acc = Eigen::RowVector2d::Zero();
  for (int i = 0; i < solver_->n_local_; ++i) acc += coeffs_(nodes[i]) * dphi.row(i);
  const Eigen::Vector2d phys = solver_->geom_[tri].inv_jt * acc.transpose();
  return {phys(0), phys(1)};
}

double DiscreteField::trace_on_edge(int edge, double t) const {
  const auto& segs = solver_->mesh().boundary_segments().at(edge);
  if (segs.empty()) throw DomainError("edge has no boundary segments");
  // Find the segment whose parameter range contains t.
  int lo = 0;
  int hi = static_cast<int>(segs.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (t <= segs[mid].t1) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const BoundarySegment& s = segs[lo];
  const Vec2 p = solver_->mesh().polygon().edge(edge).point(t);
  const auto& g = solver_->geom_[s.tri];
  // Invert the affine map for the reference coordinates.
  const Vec2 d = p - g.a;
  const double xi = d.cross(g.ac) / g.det * 1.0;
  const double eta = g.ab.cross(d) / g.det;
  const Eigen::VectorXd phi = solver_->shape_values(xi, eta);
  const auto& nodes = solver_->tri_nodes_[s.tri];
  double v = 0.0;
  for (int i = 0; i < solver_->n_local_; ++i) v += phi(i) * coeffs_(nodes[i]);
  return v;
}

DiscreteField solve_poisson(std::shared_ptr<const SubMesh> mesh,
                            const PoissonProblem& prob, int fe_order) {
  auto solver = std::make_shared<PoissonSolver>(std::move(mesh), fe_order);
  return solver->solve(prob);
}

}  // namespace polyhdiv
