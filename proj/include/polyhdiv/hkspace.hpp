// Generator basis of the discretisation space H_k(K) = (A_k)^2 (+) x B_k.
//
// Every generator is one solved Poisson problem tagged by block:
//   ABoundary : e_i * lift of (edge polynomial * indicator of one face)
//   AInterior : e_i * solve{Delta u in Q_m1, u = 0 on dK}
//   BBoundary : x * harmonic lift of (edge polynomial * indicator)
//   BInterior : x * solve{Delta u in Q_[m2], u = 0 on dK}
// Boundary traces of generators are known exactly from their data; the
// finite element field realizes the interior.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyhdiv/geometry.hpp"
#include "polyhdiv/poisson.hpp"
#include "polyhdiv/polyspace.hpp"

namespace polyhdiv {

enum class Setting { General, Reduced };
enum class NormalConfig { Ia, Ib };

std::string to_string(Setting s);
std::string to_string(NormalConfig c);

struct ElementSpec {
  int k = 0;
  int l1 = 0;
  int l2 = 0;
  int m1 = -1;
  int m2 = -1;
  Setting setting = Setting::General;
  NormalConfig config = NormalConfig::Ib;
  ProjectorKind projector = ProjectorKind::Hermite;
  double h_target = 0.0;  // <= 0: diameter / 16
  int fe_order = 0;       // <= 0: max(2, k + 1)

  // General 2D series: (l1, l2, m1, m2) = (0, k, k-1, k-1).
  static ElementSpec general(int k);
  // Reduced setting: constant boundary block in A_k, l2 = k, m1 = m2 = k-1.
  static ElementSpec reduced(int k);
  // Triangle comparison against Raviart-Thomas: (l1, l2) = (-1, k).
  static ElementSpec rt_like(int k);

  int effective_fe_order() const { return fe_order > 0 ? fe_order : std::max(2, k + 1); }
  double effective_h(const Polygon& p) const {
    return h_target > 0 ? h_target : p.diameter() / 16.0;
  }
  void validate() const;  // Conditions Set 1 and supported ranges
};

enum class GeneratorBlock { ABoundary, AInterior, BBoundary, BInterior };
std::string to_string(GeneratorBlock b);

struct Generator {
  GeneratorBlock block = GeneratorBlock::ABoundary;
  int edge = -1;        // boundary blocks; -1 for interior or whole-boundary
  int component = -1;   // A blocks: 0 or 1
  int poly_index = -1;  // index of the edge polynomial or volume monomial
  // Exact boundary data: the scalar factor u restricted to each edge.
  // Boundary generators carry data on one edge (or a global constant).
  std::map<int, Poly1> boundary_data;  // edge -> poly in mapped s
  bool constant_boundary = false;      // reduced A block: u = 1 on dK
  Poly2 rhs;                           // Laplacian datum
  DiscreteField field;                 // scalar FE realization of u

  // Exact vector trace on an edge (zero when the generator carries no data
  // there); `point` must be edge.point(t).
  Vec2 trace(const Edge& e, int edge_index, double t) const;
  // Vector value at an interior point through the FE field.
  Vec2 value(const Vec2& p) const;
  Vec2 value_at_quad(int tri, int q) const;
  double divergence_at_quad(int tri, int q) const;
};

struct SpaceBasis {
  ElementSpec spec;
  std::shared_ptr<const SubMesh> mesh;
  std::shared_ptr<const PoissonSolver> solver;
  std::vector<Generator> generators;   // element generators, edge-major boundary first
  // Reduced setting only: the two constant-boundary lifts e_i * H(1). They
  // are genuine members of the constructed space but are not paired with
  // degrees of freedom (see the dimension discrepancy handling).
  std::vector<Generator> extra_constant_generators;

  int n_boundary_generators = 0;  // leading entries of `generators`
  // Per-edge slice of the boundary generators: edge j occupies
  // [edge_offset[j], edge_offset[j] + per_edge) in `generators`.
  std::vector<int> edge_offset;
  int per_edge = 0;

  // Gram data over all constructed generators (element + extra).
  Eigen::MatrixXd gram;
  int gram_rank = 0;
  double gram_smin = 0.0;
  double gram_smax = 0.0;

  int total_constructed() const {
    return static_cast<int>(generators.size() + extra_constant_generators.size());
  }
};

// Deterministic generator enumeration (shared by the space builder and the
// archive reader, which reconstructs exact traces without re-solving).
struct GeneratorLayout {
  std::vector<Generator> generators;  // fields unset
  std::vector<Generator> extra_constant_generators;
  std::vector<PoissonProblem> problems;
  std::vector<PoissonProblem> extra_problems;
  int n_boundary = 0;
  std::vector<int> edge_offset;
  int per_edge = 0;
};
GeneratorLayout enumerate_generators(const Polygon& p, const ElementSpec& spec);

// Eq.-(10) dimension with d = 2 and the empty-space conventions at -1.
int dimension(const ElementSpec& spec, int n_faces);
// Closed-form dimension announced for the reduced series; it disagrees
// with the constructed block count and is reported for comparison only.
int reduced_series_dimension_formula(int k, int n_faces);
// Trace dimension per face.
int boundary_trace_dimension(const ElementSpec& spec);

SpaceBasis build_space(const Polygon& p, const ElementSpec& spec);

}  // namespace polyhdiv
