// Assembly of the determination (transfer) matrix, its structured inversion
// into the nodal basis, and classification of the dual basis functions.
//
// The matrix is block lower-triangular: normal DOFs see only the boundary
// generators of their own edge (exact, since traces come from boundary
// data), internal DOFs see everything. Inversion works block-wise so the
// exact zero structure survives in the dual coefficients.
#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "polyhdiv/dofs.hpp"
#include "polyhdiv/hkspace.hpp"

namespace polyhdiv {

struct TransferMatrix {
  Eigen::MatrixXd matrix;  // rows: DOFs (normal edge-major, then internal); cols: generators
  int n_normal = 0;
  int n_internal = 0;
  int n_boundary_gens = 0;
  double condition = 0.0;  // sigma_max / sigma_min
};

enum class DualClass { Normal, Internal, DegenerateNormal };
std::string to_string(DualClass c);

class NodalBasis {
public:
  std::shared_ptr<const SpaceBasis> space;
  DofSet dofs;
  TransferMatrix transfer;
  Eigen::MatrixXd coeff;  // generators x DOFs; column i = dual function phi_i
  double condition = 0.0;
  double kronecker_defect = 0.0;  // max |sigma_i(phi_j) - delta_ij| re-evaluated from T
  std::vector<DualClass> classification;
  std::vector<double> trace_scale;  // per dual: max |phi.n| over edges (quadrature points)
  double tol_zero = 1e-4;

  int size() const { return static_cast<int>(coeff.cols()); }

  Vec2 eval(int i, const Vec2& p) const;
  // Exact vector trace of the dual function on an edge (from generator data).
  Vec2 trace(int i, int edge, double t) const;
  double normal_trace(int i, int edge, double t) const;
  double divergence_at_quad(int i, int tri, int q) const;
  DofField as_dof_field(int i) const;

  int degenerate_count_on_edge(int edge) const;
  double interior_l2_norm(int i) const;
};

TransferMatrix assemble_transfer_matrix(const SpaceBasis& space, const DofSet& dofs);

// Inverts the transfer matrix (throws UnisolvenceError when the condition
// number exceeds 1e12 or a block is singular) and classifies the duals with
// the relative threshold tol_zero.
NodalBasis build_nodal_basis(std::shared_ptr<const SpaceBasis> space, const DofSet& dofs,
                             double tol_zero = 1e-4);

void classify(NodalBasis& nb, double tol_zero);

}  // namespace polyhdiv
