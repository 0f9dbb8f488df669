// Lagrange finite-element solver for the Poisson problems that define the
// discretisation spaces: Delta u = p in K, u = g on the boundary, with
// polynomial right-hand side and face-wise polynomial boundary data imposed
// strongly at boundary nodes.
//
// A PoissonSolver owns the P_r space on a SubMesh and the factorization of
// the interior stiffness block; individual problems reuse it. DiscreteField
// is an immutable coefficient vector over that space.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "polyhdiv/geometry.hpp"
#include "polyhdiv/polyspace.hpp"

namespace polyhdiv {

struct PoissonProblem {
  Poly2 rhs;                                  // Delta u = rhs
  std::map<int, Poly1> boundary;              // edge -> data in mapped s in [-1,1]
  bool whole_boundary_constant = false;       // u = constant_value on all of dK
  double constant_value = 0.0;
  // Overrides the polynomial data when set (used for manufactured solutions).
  std::function<double(const Vec2&)> boundary_fn;
};

class PoissonSolver;

class DiscreteField {
public:
  DiscreteField() = default;
  DiscreteField(std::shared_ptr<const PoissonSolver> solver, Eigen::VectorXd coeffs);

  double evaluate(const Vec2& p) const;
  Vec2 evaluate_gradient(const Vec2& p) const;
  double trace_on_edge(int edge, double t) const;

  // Fast accessors over the solver's cached volume quadrature.
  double value_at_quad(int tri, int q) const;
  Vec2 gradient_at_quad(int tri, int q) const;

  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  const PoissonSolver& solver() const { return *solver_; }

private:
  std::shared_ptr<const PoissonSolver> solver_;
  Eigen::VectorXd coeffs_;
};

class PoissonSolver : public std::enable_shared_from_this<PoissonSolver> {
public:
  // volume_exactness controls the cached triangle quadrature; it must cover
  // every integrand later formed against fields of this space.
  PoissonSolver(std::shared_ptr<const SubMesh> mesh, int fe_order,
                int volume_exactness = -1);

  DiscreteField solve(const PoissonProblem& prob) const;

  const SubMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const SubMesh> mesh_ptr() const { return mesh_; }
  int fe_order() const { return order_; }
  int n_nodes() const { return static_cast<int>(node_pos_.size()); }
  int n_local() const { return n_local_; }
  const Vec2& node_position(int i) const { return node_pos_[i]; }
  bool node_on_boundary(int i) const { return bc_tag_[i].on_boundary; }

  // Cached volume quadrature (identical reference rule on every triangle).
  int quad_size() const { return static_cast<int>(ref_rule_.weights.size()); }
  Vec2 quad_point(int tri, int q) const;
  double quad_weight(int tri, int q) const;

  struct BoundaryTag {
    bool on_boundary = false;
    int vertex = -1;  // polygon vertex, or -1
    int edge = -1;    // owning polygon edge for edge nodes
    double t = 0.0;
  };
  const BoundaryTag& boundary_tag(int i) const { return bc_tag_[i]; }

private:
  friend class DiscreteField;

  std::shared_ptr<const SubMesh> mesh_;
  int order_;
  int n_local_;

  std::vector<Vec2> node_pos_;
  std::vector<std::vector<int>> tri_nodes_;
  std::vector<BoundaryTag> bc_tag_;
  std::vector<int> interior_index_;  // node -> interior dof index or -1
  std::vector<int> interior_nodes_;

  // Reference element data.
  std::vector<Vec2> ref_nodes_;
  std::vector<Monomial2D> ref_monos_;
  Eigen::MatrixXd coeff_;  // monomial coefficients of shape functions

  QuadratureRule ref_rule_;
  Eigen::MatrixXd shape_at_quad_;           // (nq x nloc)
  std::vector<Eigen::MatrixXd> grad_at_quad_;  // per q: (nloc x 2), reference gradients

  Eigen::SparseMatrix<double> stiffness_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;

  struct TriGeom {
    Vec2 a;
    Vec2 ab;
    Vec2 ac;
    double det = 0.0;
    Eigen::Matrix2d inv_jt;
  };
  std::vector<TriGeom> geom_;

  void build_reference();
  void build_nodes();
  void assemble();

  Eigen::VectorXd shape_values(double xi, double eta) const;
  Eigen::MatrixXd shape_gradients(double xi, double eta) const;
  double boundary_value(const PoissonProblem& prob, const BoundaryTag& tag) const;
};

// Convenience wrapper matching the operation-level API.
DiscreteField solve_poisson(std::shared_ptr<const SubMesh> mesh,
                            const PoissonProblem& prob, int fe_order);

}  // namespace polyhdiv
