// Degrees of freedom: per-edge normal moments / point values for the
// configurations Ia and Ib (general and reduced settings) and internal
// moments against the symmetric projection space.
//
// Normal moments integrate exact boundary traces in arc-length measure;
// internal moments use the composite triangle quadrature of the sub-mesh.
#pragma once

#include <functional>
#include <vector>

#include "polyhdiv/hkspace.hpp"

namespace polyhdiv {

enum class DofKind { CoordinateMoment, GlobalNormalMoment, PointNormalValue, InternalMoment };
std::string to_string(DofKind k);

struct Dof {
  DofKind kind = DofKind::GlobalNormalMoment;
  int edge = -1;
  int component = -1;       // CoordinateMoment: tested component / normal factor
  EdgePolynomial kernel;    // GlobalNormalMoment kernel in the mapped parameter
  double point_t = 0.5;     // PointNormalValue sample parameter
  VectorPoly2 internal_kernel;
};

struct DofSet {
  ElementSpec spec;
  std::vector<Dof> normal;    // edge-major, fixed order within each edge
  std::vector<Dof> internal;  // ProjectionSpaceP order
  std::vector<int> edge_offset;
  int per_edge = 0;

  int size() const { return static_cast<int>(normal.size() + internal.size()); }
  const Dof& at(int i) const {
    return i < static_cast<int>(normal.size()) ? normal[i]
                                               : internal[i - normal.size()];
  }
};

// A field that degrees of freedom can be evaluated on. Boundary moments use
// edge_value (vector trace at edge parameter t); internal moments prefer the
// quadrature accessor and fall back to point evaluation.
struct DofField {
  std::function<Vec2(int edge, double t)> edge_value;
  std::function<Vec2(const Vec2&)> value;
  std::function<Vec2(int tri, int q)> value_at_quad;  // optional fast path
};

DofField dof_field_from_generator(const Generator& g, const Polygon& p);

// Per-edge normal DOFs. The general setting (l1 = 0) uses two coordinate
// moments, the low-order global slot (Ia: constant kernel, Ib: midpoint
// value of q.n) and k mean-deflated higher kernels; l1 = -1 uses the k+1
// undeflated kernels; the reduced setting uses the low-order slot plus k
// undeflated kernels.
std::vector<Dof> make_normal_dofs(const Polygon& p, const ElementSpec& spec);
std::vector<Dof> make_internal_dofs(const ElementSpec& spec);
std::vector<Dof> internal_dofs_from_pairs(const ElementSpec& spec,
                                          const std::vector<VectorPoly2>& pairs);
DofSet make_dof_set(const Polygon& p, const ElementSpec& spec);

double eval_dof(const Dof& dof, const DofField& q, const Polygon& p,
                const PoissonSolver* solver, int edge_exactness = -1);

struct DofValidationReport {
  bool counts_ok = false;
  bool conditions1_ok = false;
  bool conditions3_ok = false;
  std::vector<int> dependent_edges;  // edges whose kernel system is rank deficient
  std::vector<std::string> violations;
  bool ok() const {
    return counts_ok && conditions1_ok && conditions3_ok && dependent_edges.empty();
  }
};

DofValidationReport validate_dof_set(const DofSet& dofs, const SpaceBasis& space);

}  // namespace polyhdiv
