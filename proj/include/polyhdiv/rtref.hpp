// Classical Raviart-Thomas element RT_k on a triangle, computed through
// exact polynomial arithmetic and quadrature of known degree. Serves as the
// round-off-accurate oracle that calibrates the Poisson-based elements.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "polyhdiv/element.hpp"
#include "polyhdiv/geometry.hpp"
#include "polyhdiv/polyspace.hpp"

namespace polyhdiv {

struct RtSpace {
  int k = 0;
  std::vector<VectorPoly2> basis;  // (P_k)^2 first, then x * P_[k]
  int dim() const { return static_cast<int>(basis.size()); }
};

RtSpace rt_space_basis(int k);

class RtElement {
public:
  int k = 0;
  Polygon triangle;
  RtSpace space;
  Eigen::MatrixXd transfer;  // DOFs x basis members
  Eigen::MatrixXd coeff;     // basis members x DOFs
  double kronecker_defect = 0.0;
  int n_normal = 0;          // 3 (k+1), edge-major

  explicit RtElement(const Polygon& tri) : triangle(tri) {}

  VectorPoly2 dual(int i) const;
  // Exact 1D restriction of the dual's normal component to an edge.
  Poly1 normal_trace_poly(int i, int edge) const;
  double divergence_fit_residual(int i) const;  // tail above total degree k
  bool is_internal(int i) const { return i >= n_normal; }
};

RtElement rt_nodal_basis(int k, const Polygon& tri);

struct RtComparisonReport {
  int k = 0;
  std::vector<int> cross_rank;  // per edge: rank of the trace cross-Gram
  bool ok = false;              // every edge has rank k+1
};

// Compares per-edge normal-trace spans of RT_k with an H_k element built on
// the same triangle with (l1, l2) = (-1, k).
RtComparisonReport rt_compare_normal_traces(const RtElement& rt, const NodalBasis& hk);

}  // namespace polyhdiv
