// Executable property suite: dimension bookkeeping, unisolvence, internal
// vanishing, trace degrees, degeneration census, the two-cell H(div)
// conformity glue test, divergence consistency, conditioning comparison and
// refinement studies, aggregated into a serializable report.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyhdiv/element.hpp"

namespace polyhdiv {

struct Thresholds {
  double tol_kron = 1e-6;             // recorded Kronecker defect bound
  double kron_saturation = 1e-9;      // defects below this count as converged
  double tol_cond = 1e10;             // transfer-matrix condition bound
  double tol_internal_vanish = 1e-6;  // boundary magnitude of internal duals
  double tol_trace_fit = 1e-6;        // relative residual of the degree fit
  double tol_conformity = 1e-6;       // relative normal-trace jump
  double tol_divergence = 1e-6;       // relative Stokes identity defect
  double tol_degenerate = 1e-4;       // classification threshold (relative)
  double degenerate_interior_min = 1e-3;  // vs median normal-dual interior norm
  double refine_factor = 1.5;         // required decay per h-halving
  double div_stability = 0.1;         // allowed relative drift of ||div||
  double gram_rank_rtol = 1e-8;       // smallest/largest Gram singular value
  double span_rank_rtol = 1e-8;       // per-edge trace span rank test
  std::uint64_t seed = 0;             // randomized probes
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct RefinementRow {
  double h = 0.0;
  double kron_recorded = 0.0;
  double kron_transport = 0.0;  // vs the reference (finest + 1) realization
  double internal_vanish = 0.0;
  double div_norm_drift = 0.0;  // max relative change vs previous level
  double condition = 0.0;
};

struct VerificationReport {
  std::string polygon_source;
  ElementSpec spec;
  Thresholds thresholds;
  std::vector<CheckResult> checks;
  std::vector<RefinementRow> refinement;
  std::map<std::string, double> condition_numbers;
  std::string error_kind;  // nonempty when the element could not be built
  std::string error_message;

  bool all_pass() const;
  std::string to_json() const;
};

struct SuiteOptions {
  Thresholds thresholds;
  bool refinement_study = false;
  bool conditioning_compare = false;
  int glue_edge = -1;  // -1: longest edge
};

// Individual checks (usable directly by tests and the acceptance suite).
CheckResult check_internal_vanishing(const NodalBasis& nb, const Thresholds& thr);
CheckResult check_trace_degree(const NodalBasis& nb, const Thresholds& thr,
                               int fit_degree = -1);
CheckResult check_trace_span(const NodalBasis& nb, const Thresholds& thr);
CheckResult check_degeneration_census(const NodalBasis& nb, const Thresholds& thr);
CheckResult check_divergence(const NodalBasis& nb, const Thresholds& thr);

struct GlueResult {
  double max_rel_jump = 0.0;
  int dofs_checked = 0;
  int partner_edge = -1;
};
// Normal-trace continuity across a shared edge; the cells must carry the
// same ElementSpec and the edges must coincide with opposite orientation.
// negate_one flips one matched DOF value as a negative control.
GlueResult check_interface_conformity(const NodalBasis& cell1, int edge1,
                                      const NodalBasis& cell2, int edge2,
                                      bool negate_one = false);

// Reflects the polygon across the chosen edge and shears it along that edge,
// producing a dissimilar admissible neighbor that shares the edge exactly.
Polygon make_glue_partner(const Polygon& p, int edge, double shear);

VerificationReport run_suite(const Polygon& p, const ElementSpec& spec,
                             const SuiteOptions& opts = {});

// Batched volume statistics per dual basis function.
struct DualVolumeStats {
  std::vector<double> l2_norm;
  std::vector<double> div_l2;
  std::vector<double> div_integral;
  std::vector<double> flux_fe;    // boundary integral of the FE trace
  std::vector<double> flux_data;  // boundary integral of the exact data trace
};
DualVolumeStats dual_volume_stats(const NodalBasis& nb);

}  // namespace polyhdiv
