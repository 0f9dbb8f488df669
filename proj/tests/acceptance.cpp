// Acceptance suite: one pass/fail line per criterion, all tolerances pinned.
// Runs at the default desk-scale resolution (h = diameter/16, FE order
// max(2, k+1)) on the canonical non-convex 9-gon.
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "polyhdiv/archive.hpp"
#include "polyhdiv/rtref.hpp"
#include "polyhdiv/verify.hpp"

using namespace polyhdiv;

namespace {

struct Criterion {
  int id;
  std::string label;
  bool pass;
  std::string detail;
};

std::vector<Criterion> results;

void record(int id, const std::string& label, bool pass, const std::string& detail) {
  results.push_back({id, label, pass, detail});
  std::printf("%s criterion %2d (%s): %s\n", pass ? "PASS" : "FAIL", id, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

struct Key {
  int k;
  Setting setting;
  NormalConfig config;
  bool operator<(const Key& o) const {
    return std::tie(k, setting, config) < std::tie(o.k, o.setting, o.config);
  }
};

Polygon pentagon() {
  return Polygon(
      {{0.15, 0.10}, {1.05, 0.55}, {1.15, 1.25}, {0.25, 1.35}, {-0.35, 0.75}});
}

Polygon quadrilateral() {
  return Polygon({{0.15, 0.10}, {0.45, -0.55}, {1.35, -0.25}, {1.05, 0.55}});
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : POLYHDIV_DATA_DIR;
  const Polygon ninegon = load_polygon(data_dir + "/ninegon.json");
  const Thresholds thr;

  // --- Elements at default resolution for every k / setting / config -------
  std::map<Key, NodalBasis> elements;
  std::string build_errors;
  for (int k : {0, 1, 2}) {
    for (Setting setting : {Setting::General, Setting::Reduced}) {
      for (NormalConfig config : {NormalConfig::Ia, NormalConfig::Ib}) {
        ElementSpec spec = setting == Setting::General ? ElementSpec::general(k)
                                                       : ElementSpec::reduced(k);
        spec.config = config;
        try {
          auto space = std::make_shared<SpaceBasis>(build_space(ninegon, spec));
          elements.emplace(Key{k, setting, config},
                           build_nodal_basis(space, make_dof_set(ninegon, spec),
                                             thr.tol_degenerate));
        } catch (const Error& e) {
          build_errors += std::string(" [k=") + std::to_string(k) + " " +
                          to_string(setting) + " " + to_string(config) + ": " +
                          e.what() + "]";
        }
      }
    }
  }

  // --- 1. Dimension counts -------------------------------------------------
  {
    bool pass = build_errors.empty();
    std::string detail;
    const int expected[3] = {27, 39, 56};
    for (int k : {0, 1, 2}) {
      const auto it = elements.find({k, Setting::General, NormalConfig::Ib});
      if (it == elements.end()) {
        pass = false;
        break;
      }
      const NodalBasis& nb = it->second;
      const int dim = dimension(ElementSpec::general(k), ninegon.n_faces());
      const int gens = static_cast<int>(nb.space->generators.size());
      const int rank = nb.space->gram_rank;
      if (dim != expected[k] || gens != dim || nb.size() != dim || rank != dim) {
        pass = false;
      }
      detail += "k=" + std::to_string(k) + ": dim " + std::to_string(dim) +
                " = generators " + std::to_string(gens) + " = DOFs " +
                std::to_string(nb.size()) + " = Gram rank " + std::to_string(rank) +
                (k < 2 ? "; " : "");
    }
    record(1, "dimension counts", pass, detail + build_errors);
  }

  // --- 2. Unisolvence (condition, Kronecker, refinement decrease) ----------
  {
    bool pass = build_errors.empty();
    double worst_cond = 0.0;
    double worst_kron = 0.0;
    for (const auto& [key, nb] : elements) {
      worst_cond = std::max(worst_cond, nb.condition);
      worst_kron = std::max(worst_kron, nb.kronecker_defect);
      if (!(nb.condition < thr.tol_cond) || !(nb.kronecker_defect <= thr.tol_kron)) {
        pass = false;
      }
    }
    // Refinement ladders (levels diameter/8, /16, /32; reference /64).
    std::string ladder_note;
    for (Setting setting : {Setting::General, Setting::Reduced}) {
      ElementSpec spec = setting == Setting::General ? ElementSpec::general(2)
                                                     : ElementSpec::reduced(2);
      std::vector<Eigen::MatrixXd> coeffs;
      std::vector<double> rec;
      for (int divisor : {8, 16, 32, 64}) {
        ElementSpec s = spec;
        s.h_target = ninegon.diameter() / divisor;
        auto space = std::make_shared<SpaceBasis>(build_space(ninegon, s));
        const NodalBasis nb =
            build_nodal_basis(space, make_dof_set(ninegon, s), thr.tol_degenerate);
        coeffs.push_back(nb.coeff);
        rec.push_back(nb.kronecker_defect);
      }
      const int n = static_cast<int>(coeffs[3].rows());
      ElementSpec sref = spec;
      sref.h_target = ninegon.diameter() / 64;
      auto rspace = std::make_shared<SpaceBasis>(build_space(ninegon, sref));
      const NodalBasis rnb =
          build_nodal_basis(rspace, make_dof_set(ninegon, sref), thr.tol_degenerate);
      std::vector<double> transport;
      for (int l = 0; l < 3; ++l) {
        transport.push_back((rnb.transfer.matrix * coeffs[l] -
                             Eigen::MatrixXd::Identity(n, n))
                                .cwiseAbs()
                                .maxCoeff());
      }
      for (int l = 0; l < 3; ++l) {
        if (rec[l] > thr.tol_kron) pass = false;
        if (l > 0) {
          const bool decayed = rec[l] <= rec[l - 1] / thr.refine_factor ||
                               rec[l] <= thr.kron_saturation;
          const bool transport_decayed = transport[l] <= transport[l - 1] / thr.refine_factor;
          if (!decayed || !transport_decayed) pass = false;
        }
      }
      ladder_note += std::string(setting == Setting::General ? "general" : "reduced") +
                     " transport " + fmt(transport[0]) + "->" + fmt(transport[1]) +
                     "->" + fmt(transport[2]) + "; ";
    }
    record(2, "unisolvence", pass,
           "max condition " + fmt(worst_cond) + " < 1e10, max recorded defect " +
               fmt(worst_kron) + " <= 1e-6 (saturation floor " +
               fmt(thr.kron_saturation) + "); " + ladder_note + build_errors);
  }

  // --- 3. Internal vanishing ------------------------------------------------
  {
    bool pass = build_errors.empty();
    double worst = 0.0;
    for (const auto& [key, nb] : elements) {
      const CheckResult c = check_internal_vanishing(nb, thr);
      worst = std::max(worst, c.measured);
      if (!c.pass) pass = false;
    }
    record(3, "internal vanishing", pass,
           "max relative boundary magnitude of internal duals " + fmt(worst) +
               " <= 1e-6 (exact zeros by the data-based block inversion; "
               "monotone under refinement by saturation)");
  }

  // --- 4. Trace polynomial degree and span ----------------------------------
  {
    bool pass = build_errors.empty();
    double worst_fit = 0.0;
    double worst_span = 1.0;
    for (const auto& [key, nb] : elements) {
      const CheckResult fit = check_trace_degree(nb, thr);
      const CheckResult span = check_trace_span(nb, thr);
      worst_fit = std::max(worst_fit, fit.measured);
      worst_span = std::min(worst_span, span.measured);
      if (!fit.pass || !span.pass) pass = false;
    }
    record(4, "trace polynomial degree", pass,
           "worst relative degree-max(l1,l2) fit residual " + fmt(worst_fit) +
               " <= 1e-6; per-edge span of Q_k(f) with min relative singular value " +
               fmt(worst_span));
  }

  // --- 5. Degeneration census ------------------------------------------------
  {
    bool pass = build_errors.empty();
    std::string detail;
    for (const auto& [key, nb] : elements) {
      const CheckResult c = check_degeneration_census(nb, thr);
      if (!c.pass) {
        pass = false;
        detail += "[k=" + std::to_string(key.k) + " " + to_string(key.setting) + " " +
                  to_string(key.config) + " fails] ";
      }
    }
    record(5, "degeneration census", pass,
           detail.empty()
               ? "general: exactly 2 degenerate-normal duals per edge; reduced: 0; "
                 "degenerate interior L2 >= 1e-3 x median"
               : detail);
  }

  // --- 6. Ib scaling -----------------------------------------------------------
  {
    bool pass = true;
    std::string detail;
    const NodalBasis& ia = elements.at({0, Setting::General, NormalConfig::Ia});
    const NodalBasis& ib = elements.at({0, Setting::General, NormalConfig::Ib});
    double worst_ib = 0.0;
    double constancy = 0.0;
    std::vector<double> ia_values;
    for (int j = 0; j < ninegon.n_faces(); ++j) {
      const int slot = ia.dofs.edge_offset[j] + 2;  // low-order global slot
      worst_ib = std::max(worst_ib, std::abs(ib.normal_trace(slot, j, 0.5) - 1.0));
      double lo = 1e300, hi = -1e300;
      for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double via = ia.normal_trace(slot, j, t);
        const double vib = ib.normal_trace(slot, j, t);
        constancy = std::max(constancy, std::abs(vib - ib.normal_trace(slot, j, 0.5)));
        lo = std::min(lo, via);
        hi = std::max(hi, via);
      }
      constancy = std::max(constancy, hi - lo);
      ia_values.push_back(ia.normal_trace(slot, j, 0.5));
    }
    double lo = ia_values[0], hi = ia_values[0];
    for (double v : ia_values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double spread = (hi - lo) / std::abs(hi);
    if (worst_ib > 1e-6 || constancy > 1e-6 || spread <= 0.01) pass = false;
    record(6, "Ib scaling", pass,
           "k=0 Ib duals: |trace - 1| at sample point " + fmt(worst_ib) +
               ", constancy defect " + fmt(constancy) +
               "; Ia constant traces spread across edges " + fmt(spread) + " > 1%");
  }

  // --- 7. H(div) conformity glue test -----------------------------------------
  {
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    const Polygon pent = pentagon();
    const Polygon quad = quadrilateral();
    for (int k : {0, 1, 2}) {
      for (Setting setting : {Setting::General, Setting::Reduced}) {
        ElementSpec spec =
            setting == Setting::General ? ElementSpec::general(k) : ElementSpec::reduced(k);
        try {
          auto s1 = std::make_shared<SpaceBasis>(build_space(pent, spec));
          const NodalBasis c1 =
              build_nodal_basis(s1, make_dof_set(pent, spec), thr.tol_degenerate);
          auto s2 = std::make_shared<SpaceBasis>(build_space(quad, spec));
          const NodalBasis c2 =
              build_nodal_basis(s2, make_dof_set(quad, spec), thr.tol_degenerate);
          const GlueResult glue = check_interface_conformity(c1, 0, c2, 3);
          worst = std::max(worst, glue.max_rel_jump);
          if (glue.max_rel_jump > thr.tol_conformity || glue.dofs_checked == 0) {
            pass = false;
          }
        } catch (const Error& e) {
          pass = false;
          detail += std::string("[k=") + std::to_string(k) + " " + to_string(setting) +
                    ": " + e.what() + "] ";
        }
      }
    }
    record(7, "interface conformity", pass,
           "pentagon|quadrilateral shared edge, k in {0,1,2}, both settings: max "
           "relative normal-trace jump " +
               fmt(worst) + " <= 1e-6 " + detail);
  }

  // --- 8. RT oracle -------------------------------------------------------------
  {
    bool pass = true;
    std::string detail;
    const Polygon tri = load_polygon(data_dir + "/triangle.json");
    const int dims[3] = {3, 8, 15};
    double worst_kron = 0.0;
    double worst_trace = 0.0;
    double worst_div = 0.0;
    for (int k : {0, 1, 2}) {
      const RtElement rt = rt_nodal_basis(k, tri);
      if (rt.space.dim() != dims[k]) pass = false;
      worst_kron = std::max(worst_kron, rt.kronecker_defect);
      double scale = 0.0;
      for (int i = 0; i < rt.space.dim(); ++i) {
        for (int e = 0; e < 3; ++e) {
          const Poly1 tr = rt.normal_trace_poly(i, e);
          for (double c : tr.coeffs()) {
            scale = std::max(scale, std::abs(c));
          }
        }
      }
      for (int i = 0; i < rt.space.dim(); ++i) {
        worst_div = std::max(worst_div, rt.divergence_fit_residual(i));
        if (rt.is_internal(i)) {
          for (int e = 0; e < 3; ++e) {
            const Poly1 tr = rt.normal_trace_poly(i, e);
          for (double c : tr.coeffs()) {
              worst_trace = std::max(worst_trace, std::abs(c) / scale);
            }
          }
        }
      }
      // trace-span comparison against the Poisson-based element
      ElementSpec spec = ElementSpec::rt_like(k);
      auto space = std::make_shared<SpaceBasis>(build_space(tri, spec));
      const NodalBasis hk =
          build_nodal_basis(space, make_dof_set(tri, spec), thr.tol_degenerate);
      const RtComparisonReport rep = rt_compare_normal_traces(rt, hk);
      if (!rep.ok) {
        pass = false;
        detail += "[k=" + std::to_string(k) + " span mismatch] ";
      }
    }
    if (worst_kron > 1e-12 || worst_trace > 1e-12 || worst_div > 1e-12) pass = false;
    record(8, "RT oracle", pass,
           "dims 3/8/15; Kronecker " + fmt(worst_kron) +
               ", internal trace vanishing " + fmt(worst_trace) + ", div in P_k " +
               fmt(worst_div) + " (all <= 1e-12); per-edge spans match rank k+1 " +
               detail);
  }

  // --- 9. Conditioning ordering ---------------------------------------------
  {
    bool pass = true;
    std::string detail;
    for (NormalConfig config : {NormalConfig::Ia, NormalConfig::Ib}) {
      const NodalBasis& herm = elements.at({2, Setting::General, config});
      ElementSpec mono = ElementSpec::general(2);
      mono.config = config;
      mono.projector = ProjectorKind::Monomial;
      auto mspace = std::make_shared<SpaceBasis>(build_space(ninegon, mono));
      const NodalBasis mnb =
          build_nodal_basis(mspace, make_dof_set(ninegon, mono), thr.tol_degenerate);
      if (!(herm.condition <= mnb.condition * (1.0 + 1e-9))) pass = false;
      detail += to_string(config) + ": hermite " + fmt(herm.condition) +
                " <= monomial " + fmt(mnb.condition) + "; ";
    }
    record(9, "conditioning ordering", pass, detail);
  }

  // --- 10. Admissibility enforcement -------------------------------------------
  {
    bool pass = true;
    std::string detail;
    const Polygon square = load_polygon(data_dir + "/square.json");
    ElementSpec ia = ElementSpec::general(1);
    ia.config = NormalConfig::Ia;
    try {
      make_normal_dofs(square, ia);
      pass = false;
      detail += "square+Ia did not raise; ";
    } catch (const AdmissibilityError&) {
      detail += "square+Ia -> AdmissibilityError; ";
    }
    ElementSpec bad = ElementSpec::general(1);
    bad.l1 = 1;
    try {
      dimension(bad, 9);
      pass = false;
      detail += "l1=1 did not raise; ";
    } catch (const AdmissibilityError&) {
      detail += "l1=1 -> Conditions Set 1 violation; ";
    }
    // duplicated kernels: reported as dependent and rejected at inversion
    const NodalBasis& good = elements.at({1, Setting::General, NormalConfig::Ia});
    DofSet broken = good.dofs;
    broken.normal[3] = broken.normal[4];
    const DofValidationReport vrep = validate_dof_set(broken, *good.space);
    if (vrep.ok()) {
      pass = false;
      detail += "duplicated kernel not reported; ";
    } else {
      detail += "duplicated kernel -> independence failure";
    }
    bool threw = false;
    try {
      build_nodal_basis(good.space, broken, thr.tol_degenerate);
    } catch (const UnisolvenceError&) {
      threw = true;
    }
    if (!threw) {
      pass = false;
      detail += " (but inversion did not reject it)";
    }
    record(10, "admissibility enforcement", pass, detail);
  }

  // --- 11. Reduced-dimension discrepancy handling ------------------------------
  {
    bool pass = true;
    const NodalBasis& nb = elements.at({2, Setting::Reduced, NormalConfig::Ib});
    const int announced = reduced_series_dimension_formula(2, ninegon.n_faces());
    const int constructed = nb.space->total_constructed();
    const int rank = nb.space->gram_rank;
    if (announced != 30 || constructed != 40 || rank != constructed) pass = false;
    if (announced == constructed) pass = false;  // the discrepancy must be visible
    record(11, "reduced-dimension discrepancy", pass,
           "series formula " + std::to_string(announced) + " vs constructed " +
               std::to_string(constructed) + " (flagged, never reconciled); Gram rank " +
               std::to_string(rank) + " governs and matches the constructed count; "
               "element pairs " +
               std::to_string(nb.size()) + " DOFs with the non-constant generators");
  }

  int failures = 0;
  for (const Criterion& c : results) {
    if (!c.pass) ++failures;
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", results.size() - failures,
              results.size());
  return failures;
}
