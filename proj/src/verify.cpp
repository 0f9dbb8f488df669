#include "polyhdiv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace polyhdiv {

bool VerificationReport::all_pass() const {
  if (!error_kind.empty()) return false;
  for (const CheckResult& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string VerificationReport::to_json() const {
  nlohmann::json doc;
  doc["polygon"] = polygon_source;
  doc["spec"] = {{"k", spec.k},
                 {"l1", spec.l1},
                 {"l2", spec.l2},
                 {"m1", spec.m1},
                 {"m2", spec.m2},
                 {"setting", to_string(spec.setting)},
                 {"config", to_string(spec.config)},
                 {"projector", to_string(spec.projector)},
                 {"h_target", spec.h_target},
                 {"fe_order", spec.fe_order}};
  doc["thresholds"] = {{"tol_kron", thresholds.tol_kron},
                       {"kron_saturation", thresholds.kron_saturation},
                       {"tol_cond", thresholds.tol_cond},
                       {"tol_internal_vanish", thresholds.tol_internal_vanish},
                       {"tol_trace_fit", thresholds.tol_trace_fit},
                       {"tol_conformity", thresholds.tol_conformity},
                       {"tol_divergence", thresholds.tol_divergence},
                       {"tol_degenerate", thresholds.tol_degenerate},
                       {"degenerate_interior_min", thresholds.degenerate_interior_min},
                       {"refine_factor", thresholds.refine_factor},
                       {"div_stability", thresholds.div_stability},
                       {"gram_rank_rtol", thresholds.gram_rank_rtol},
                       {"span_rank_rtol", thresholds.span_rank_rtol},
                       {"seed", thresholds.seed}};
  doc["checks"] = nlohmann::json::array();
  for (const CheckResult& c : checks) {
    doc["checks"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"measured", c.measured},
                             {"threshold", c.threshold},
                             {"note", c.note}});
  }
  doc["refinement"] = nlohmann::json::array();
  for (const RefinementRow& r : refinement) {
    doc["refinement"].push_back({{"h", r.h},
                                 {"kron_recorded", r.kron_recorded},
                                 {"kron_transport", r.kron_transport},
                                 {"internal_vanish", r.internal_vanish},
                                 {"div_norm_drift", r.div_norm_drift},
                                 {"condition", r.condition}});
  }
  doc["condition_numbers"] = condition_numbers;
  if (!error_kind.empty()) {
    doc["error"] = {{"kind", error_kind}, {"message", error_message}};
  }
  doc["all_pass"] = all_pass();
  return doc.dump(2);
}

namespace {

double internal_vanishing_defect(const NodalBasis& nb) {
  const Polygon& poly = nb.space->mesh->polygon();
  const int nn = nb.transfer.n_normal;
  const QuadratureRule rule = edge_quadrature(2 * (nb.dofs.spec.l2 + 2) + 5);
  double defect = 0.0;
  for (int i = nn; i < nb.size(); ++i) {
    for (int j = 0; j < poly.n_faces(); ++j) {
      for (const Vec2& node : rule.nodes) {
        const double t = 0.5 * (node.x + 1.0);
        const Vec2 v = nb.trace(i, j, t);
        defect = std::max(defect, std::max(std::abs(v.x), std::abs(v.y)));
      }
    }
  }
  return defect;
}

double global_trace_scale(const NodalBasis& nb) {
  double s = 0.0;
  for (double v : nb.trace_scale) s = std::max(s, v);
  return s;
}

}  // namespace

CheckResult check_internal_vanishing(const NodalBasis& nb, const Thresholds& thr) {
  CheckResult c;
  c.name = "internal_vanishing";
  const double scale = std::max(global_trace_scale(nb), 1e-300);
  c.measured = internal_vanishing_defect(nb) / scale;
  c.threshold = thr.tol_internal_vanish;
  c.pass = c.measured <= c.threshold;
  c.note = "max boundary magnitude of internal duals over edge quadrature, "
           "relative to the trace scale";
  return c;
}

CheckResult check_trace_degree(const NodalBasis& nb, const Thresholds& thr,
                               int fit_degree) {
  CheckResult c;
  c.name = fit_degree < 0 ? "trace_degree" : "trace_degree_negative_control";
  const ElementSpec& spec = nb.dofs.spec;
  const Polygon& poly = nb.space->mesh->polygon();
  const int degree = fit_degree < 0 ? std::max(spec.l1, spec.l2) : fit_degree;
  const QuadratureRule rule = edge_quadrature(2 * (spec.l2 + 3) + 5);
  const auto legendre = projector_basis(-1, std::max(degree, 0), ProjectorKind::Orthogonal);

  double worst = 0.0;
  int fitted = 0;
  const double floor = 1e-9 * std::max(global_trace_scale(nb), 1e-300);
  for (int i = 0; i < nb.size(); ++i) {
    // Duals with numerically zero traces (internal and degenerate-normal
    // ones) are covered by the vanishing checks; the fit applies to genuine
    // normal content.
    if (nb.trace_scale[i] <= floor) continue;
    ++fitted;
    // L2 norms of the normal trace per edge; fit each edge by the Legendre
    // expansion truncated at `degree`.
    double max_edge_norm = 0.0;
    std::vector<double> residuals;
    for (int j = 0; j < poly.n_faces(); ++j) {
      std::vector<double> vals(rule.nodes.size());
      double norm2 = 0.0;
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double t = 0.5 * (rule.nodes[q].x + 1.0);
        vals[q] = nb.normal_trace(i, j, t);
        norm2 += rule.weights[q] * vals[q] * vals[q];
      }
      max_edge_norm = std::max(max_edge_norm, std::sqrt(norm2));
      std::vector<double> fit(vals.size(), 0.0);
      if (degree >= 0) {
        for (int d = 0; d <= degree; ++d) {
          double proj = 0.0;
          double pnorm2 = 0.0;
          for (size_t q = 0; q < rule.nodes.size(); ++q) {
            const double pv = legendre[d].poly.eval(rule.nodes[q].x);
            proj += rule.weights[q] * vals[q] * pv;
            pnorm2 += rule.weights[q] * pv * pv;
          }
          for (size_t q = 0; q < rule.nodes.size(); ++q) {
            fit[q] += proj / pnorm2 * legendre[d].poly.eval(rule.nodes[q].x);
          }
        }
      }
      double res2 = 0.0;
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        res2 += rule.weights[q] * (vals[q] - fit[q]) * (vals[q] - fit[q]);
      }
      residuals.push_back(std::sqrt(res2));
    }
    for (double r : residuals) worst = std::max(worst, r / max_edge_norm);
  }
  c.measured = worst;
  c.threshold = thr.tol_trace_fit;
  c.pass = c.measured <= c.threshold;
  c.note = "worst relative L2 residual of a degree-" + std::to_string(degree) +
           " fit over " + std::to_string(fitted) + " duals with nonzero traces";
  return c;
}

CheckResult check_trace_span(const NodalBasis& nb, const Thresholds& thr) {
  CheckResult c;
  c.name = "trace_span";
  const ElementSpec& spec = nb.dofs.spec;
  const Polygon& poly = nb.space->mesh->polygon();
  const int k = spec.l2;
  const QuadratureRule rule = edge_quadrature(2 * (k + 2) + 5);
  const auto legendre = projector_basis(-1, k, ProjectorKind::Orthogonal);

  double worst_rel_smin = 1.0;
  for (int j = 0; j < poly.n_faces(); ++j) {
    std::vector<int> duals;
    for (int a = 0; a < nb.dofs.per_edge; ++a) {
      const int i = nb.dofs.edge_offset[j] + a;
      if (nb.classification[i] == DualClass::Normal) duals.push_back(i);
    }
    if (static_cast<int>(duals.size()) != k + 1) {
      c.pass = false;
      c.note = "edge " + std::to_string(j) + " has " + std::to_string(duals.size()) +
               " non-degenerate duals, expected " + std::to_string(k + 1);
      c.measured = static_cast<double>(duals.size());
      c.threshold = k + 1;
      return c;
    }
    Eigen::MatrixXd proj(k + 1, k + 1);
    for (int a = 0; a <= k; ++a) {
      std::vector<double> vals(rule.nodes.size());
      double norm2 = 0.0;
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double t = 0.5 * (rule.nodes[q].x + 1.0);
        vals[q] = nb.normal_trace(duals[a], j, t);
        norm2 += rule.weights[q] * vals[q] * vals[q];
      }
      const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-300));
      for (int d = 0; d <= k; ++d) {
        double acc = 0.0;
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
          acc += rule.weights[q] * vals[q] * legendre[d].poly.eval(rule.nodes[q].x);
        }
        proj(a, d) = acc * inv;
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(proj);
    const auto& sv = svd.singularValues();
    worst_rel_smin = std::min(worst_rel_smin, sv(sv.size() - 1) / sv(0));
  }
  c.measured = worst_rel_smin;
  c.threshold = thr.span_rank_rtol;
  c.pass = c.measured >= c.threshold;
  c.note = "smallest relative singular value of the per-edge projection of "
           "non-degenerate duals onto Q_k(f)";
  return c;
}

CheckResult check_degeneration_census(const NodalBasis& nb, const Thresholds& thr) {
  CheckResult c;
  c.name = "degeneration_census";
  const ElementSpec& spec = nb.dofs.spec;
  const Polygon& poly = nb.space->mesh->polygon();
  const int expected =
      (spec.setting == Setting::General && spec.l1 == 0) ? 2 : 0;
  bool counts_ok = true;
  for (int j = 0; j < poly.n_faces(); ++j) {
    if (nb.degenerate_count_on_edge(j) != expected) counts_ok = false;
  }

  // Degenerate duals must stay genuinely alive inside K.
  double min_rel_norm = 1.0;
  if (expected > 0) {
    std::vector<double> normal_norms;
    std::vector<std::pair<int, double>> degen_norms;
    for (int i = 0; i < nb.transfer.n_normal; ++i) {
      const double n = nb.interior_l2_norm(i);
      if (nb.classification[i] == DualClass::DegenerateNormal) {
        degen_norms.push_back({i, n});
      } else {
        normal_norms.push_back(n);
      }
    }
    std::sort(normal_norms.begin(), normal_norms.end());
    const double median = normal_norms.empty() ? 0.0
                                               : normal_norms[normal_norms.size() / 2];
    for (const auto& [i, n] : degen_norms) {
      min_rel_norm = std::min(min_rel_norm, n / std::max(median, 1e-300));
    }
  }

  c.measured = min_rel_norm;
  c.threshold = thr.degenerate_interior_min;
  c.pass = counts_ok && min_rel_norm >= thr.degenerate_interior_min;
  std::ostringstream note;
  note << "expected " << expected << " degenerate duals per edge";
  if (!counts_ok) note << " (count mismatch)";
  note << "; min interior L2 of degenerate duals relative to median normal dual = "
       << min_rel_norm;
  c.note = note.str();
  return c;
}

DualVolumeStats dual_volume_stats(const NodalBasis& nb) {
  const SpaceBasis& space = *nb.space;
  const PoissonSolver& solver = *space.solver;
  const int n = nb.size();
  const int ngen = static_cast<int>(space.generators.size());
  DualVolumeStats st;
  st.l2_norm.assign(n, 0.0);
  st.div_l2.assign(n, 0.0);
  st.div_integral.assign(n, 0.0);
  st.flux_fe.assign(n, 0.0);
  st.flux_data.assign(n, 0.0);

  const int ntris = static_cast<int>(solver.mesh().triangles().size());
  std::vector<Vec2> vals(ngen);
  std::vector<double> divs(ngen);
  for (int t = 0; t < ntris; ++t) {
    for (int q = 0; q < solver.quad_size(); ++q) {
      const double w = solver.quad_weight(t, q);
      for (int g = 0; g < ngen; ++g) {
        vals[g] = space.generators[g].value_at_quad(t, q);
        divs[g] = space.generators[g].divergence_at_quad(t, q);
      }
      for (int i = 0; i < n; ++i) {
        Vec2 v{0.0, 0.0};
        double d = 0.0;
        for (int g = 0; g < ngen; ++g) {
          const double c = nb.coeff(g, i);
          if (c != 0.0) {
            v = v + vals[g] * c;
            d += divs[g] * c;
          }
        }
        st.l2_norm[i] += w * v.dot(v);
        st.div_l2[i] += w * d * d;
        st.div_integral[i] += w * d;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    st.l2_norm[i] = std::sqrt(st.l2_norm[i]);
    st.div_l2[i] = std::sqrt(st.div_l2[i]);
  }

  // Boundary fluxes: segment-wise Gauss keeps the FE trace integration exact.
  const Polygon& poly = solver.mesh().polygon();
  const int r = solver.fe_order();
  const QuadratureRule rule = edge_quadrature(2 * (r + 2) + 1);
  for (int e = 0; e < poly.n_faces(); ++e) {
    const Edge& edge = poly.edge(e);
    for (const BoundarySegment& seg : solver.mesh().boundary_segments()[e]) {
      const double dt = seg.t1 - seg.t0;
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double t = seg.t0 + dt * 0.5 * (rule.nodes[q].x + 1.0);
        const double w = rule.weights[q] * 0.5 * dt * edge.length;
        // FE vector traces of all generators at this boundary point.
        for (int i = 0; i < n; ++i) {
          Vec2 vfe{0.0, 0.0};
          for (int g = 0; g < ngen; ++g) {
            const double c = nb.coeff(g, i);
            if (c == 0.0) continue;
            const Generator& gen = space.generators[g];
            const double u = gen.field.trace_on_edge(e, t);
            Vec2 gv;
            if (gen.block == GeneratorBlock::ABoundary ||
                gen.block == GeneratorBlock::AInterior) {
              gv = gen.component == 0 ? Vec2{u, 0.0} : Vec2{0.0, u};
            } else {
              gv = edge.point(t) * u;
            }
            vfe = vfe + gv * c;
          }
          st.flux_fe[i] += w * vfe.dot(edge.normal);
          st.flux_data[i] += w * nb.trace(i, e, t).dot(edge.normal);
        }
      }
    }
  }
  return st;
}

CheckResult check_divergence(const NodalBasis& nb, const Thresholds& thr) {
  CheckResult c;
  c.name = "divergence_consistency";
  const DualVolumeStats st = dual_volume_stats(nb);
  double scale = 0.0;
  for (int i = 0; i < nb.size(); ++i) {
    scale = std::max({scale, std::abs(st.flux_fe[i]), st.div_l2[i]});
  }
  double worst = 0.0;
  double worst_data_gap = 0.0;
  for (int i = 0; i < nb.size(); ++i) {
    worst = std::max(worst, std::abs(st.div_integral[i] - st.flux_fe[i]));
    worst_data_gap = std::max(worst_data_gap, std::abs(st.flux_data[i] - st.flux_fe[i]));
  }
  c.measured = worst / std::max(scale, 1e-300);
  c.threshold = thr.tol_divergence;
  c.pass = c.measured <= c.threshold;
  std::ostringstream note;
  note << "max |int div phi - boundary flux| over duals (relative); "
       << "FE-vs-data boundary flux gap " << worst_data_gap / std::max(scale, 1e-300)
       << " (vertex resolution, O(h))";
  c.note = note.str();
  return c;
}

Polygon make_glue_partner(const Polygon& p, int edge, double shear) {
  const Edge& e = p.edge(edge);
  const Vec2 a = e.start;
  const Vec2 tau = e.tangent;
  const Vec2 nrm = e.normal;
  std::vector<Vec2> verts;
  for (const Vec2& v : p.vertices()) {
    const Vec2 d = v - a;
    // reflect across the edge line, then shear along the edge direction
    const double along = d.dot(tau);
    const double off = d.dot(nrm);
    const Vec2 reflected = a + tau * along - nrm * off;
    verts.push_back(reflected + tau * (shear * ((reflected - a).dot(nrm))));
  }
  return Polygon(std::move(verts));
}

GlueResult check_interface_conformity(const NodalBasis& cell1, int edge1,
                                      const NodalBasis& cell2, int edge2,
                                      bool negate_one) {
  const Polygon& p1 = cell1.space->mesh->polygon();
  const Polygon& p2 = cell2.space->mesh->polygon();
  const Edge& e1 = p1.edge(edge1);
  const Edge& e2 = p2.edge(edge2);
  const double tol = 1e-10 * std::max(p1.diameter(), p2.diameter());
  if ((e1.start - e2.end).norm() > tol || (e1.end - e2.start).norm() > tol) {
    throw GeometryError("shared edges do not coincide with opposite orientation");
  }

  GlueResult result;
  result.partner_edge = edge2;
  const DofSet& dofs1 = cell1.dofs;
  const DofSet& dofs2 = cell2.dofs;
  const QuadratureRule rule = edge_quadrature(2 * (dofs1.spec.l2 + 3) + 7);

  for (int a = 0; a < dofs1.per_edge; ++a) {
    const int i = dofs1.edge_offset[edge1] + a;
    // Flux data on the shared edge: the full vector trace of cell 1's dual.
    DofField field;
    field.edge_value = [&](int e, double t) -> Vec2 {
      if (e != edge2) return {0.0, 0.0};
      return cell1.trace(i, edge1, 1.0 - t);
    };
    // Matched DOF values on cell 2 (only its shared-edge block sees the data).
    std::vector<double> values(dofs2.per_edge);
    for (int b = 0; b < dofs2.per_edge; ++b) {
      const Dof& dof = dofs2.normal[dofs2.edge_offset[edge2] + b];
      values[b] = eval_dof(dof, field, p2, cell2.space->solver.get());
    }
    if (negate_one && !values.empty()) values[0] = -values[0];

    double scale = 0.0;
    double jump = 0.0;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t1 = 0.5 * (rule.nodes[q].x + 1.0);
      const double t2 = 1.0 - t1;
      const double g1 = cell1.normal_trace(i, edge1, t1);
      double g2 = 0.0;
      for (int b = 0; b < dofs2.per_edge; ++b) {
        g2 += values[b] *
              cell2.normal_trace(dofs2.edge_offset[edge2] + b, edge2, t2);
      }
      scale = std::max(scale, std::abs(g1));
      jump = std::max(jump, std::abs(g1 + g2));
    }
    if (scale < 1e-12 * std::max(global_trace_scale(cell1), 1e-300)) {
      continue;  // degenerate-normal dual: no flux to match
    }
    result.max_rel_jump = std::max(result.max_rel_jump, jump / scale);
    ++result.dofs_checked;
  }
  return result;
}

namespace {

void add_check(VerificationReport& rep, CheckResult c) { rep.checks.push_back(std::move(c)); }

CheckResult scaling_check(const NodalBasis& nb, const Thresholds& thr) {
  // Lowest-order scaling behavior (meaningful for k = 0): Ib duals sample to
  // one, Ia duals are edge-dependent constants.
  CheckResult c;
  c.name = "lowest_order_scaling";
  const ElementSpec& spec = nb.dofs.spec;
  const Polygon& poly = nb.space->mesh->polygon();
  bool ok = true;
  std::ostringstream note;
  std::vector<double> per_edge_value;
  double constancy = 0.0;
  for (int j = 0; j < poly.n_faces(); ++j) {
    // the low-order slot is the first global DOF of the edge
    int slot = -1;
    for (int a = 0; a < nb.dofs.per_edge; ++a) {
      const Dof& d = nb.dofs.normal[nb.dofs.edge_offset[j] + a];
      if (d.kind == DofKind::PointNormalValue ||
          (d.kind == DofKind::GlobalNormalMoment && d.kernel.degree == 0)) {
        slot = nb.dofs.edge_offset[j] + a;
        break;
      }
    }
    if (slot < 0) continue;
    const double mid = nb.normal_trace(slot, j, 0.5);
    double lo = mid;
    double hi = mid;
    for (double t : {0.1, 0.3, 0.7, 0.9}) {
      const double v = nb.normal_trace(slot, j, t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    constancy = std::max(constancy, (hi - lo) / std::max(std::abs(mid), 1e-300));
    per_edge_value.push_back(mid);
    if (spec.setting == Setting::General && spec.config == NormalConfig::Ib &&
        std::abs(mid - 1.0) > thr.tol_kron) {
      ok = false;
    }
  }
  const bool moment_scaled =
      spec.setting == Setting::Reduced || spec.config == NormalConfig::Ia;
  if (moment_scaled) {
    double lo = per_edge_value[0];
    double hi = per_edge_value[0];
    for (double v : per_edge_value) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double spread = (hi - lo) / std::max(std::abs(hi), 1e-300);
    const bool spread_required = spec.k == 0 && spec.setting == Setting::General;
    if (spread_required && spread <= 0.01) ok = false;
    note << "moment-scaled constant traces spread " << spread
         << (spread_required ? " (> 1% expected); " : "; ");
    c.measured = spread;
    c.threshold = 0.01;
  } else {
    c.measured = constancy;
    c.threshold = thr.tol_kron;
    note << "Ib duals sample to one at the midpoint; ";
  }
  if (spec.k == 0 && constancy > 1e-6) ok = false;
  note << "trace constancy defect along edges " << constancy;
  c.pass = ok;
  c.note = note.str();
  return c;
}

}  // namespace

VerificationReport run_suite(const Polygon& p, const ElementSpec& spec,
                             const SuiteOptions& opts) {
  VerificationReport rep;
  rep.spec = spec;
  rep.thresholds = opts.thresholds;
  const Thresholds& thr = opts.thresholds;

  std::shared_ptr<SpaceBasis> space;
  std::optional<NodalBasis> nb;
  try {
    spec.validate();
    space = std::make_shared<SpaceBasis>(build_space(p, spec));
    const DofSet dofs = make_dof_set(p, spec);
    nb.emplace(build_nodal_basis(space, dofs, thr.tol_degenerate));
  } catch (const Error& e) {
    rep.error_kind = e.kind();
    rep.error_message = e.what();
    return rep;
  }

  // Dimension bookkeeping.
  {
    CheckResult c;
    c.name = "dimension_counts";
    const int n = p.n_faces();
    if (spec.setting == Setting::General) {
      const int dim = dimension(spec, n);
      const int gens = static_cast<int>(space->generators.size());
      const int ndof = nb->dofs.size();
      c.measured = space->gram_rank;
      c.threshold = dim;
      c.pass = gens == dim && ndof == dim && space->gram_rank == dim;
      std::ostringstream note;
      note << "dim formula " << dim << ", generators " << gens << ", DOFs " << ndof
           << ", Gram rank " << space->gram_rank;
      c.note = note.str();
    } else {
      const int constructed = space->total_constructed();
      const int announced = reduced_series_dimension_formula(spec.k, n);
      c.measured = space->gram_rank;
      c.threshold = constructed;
      c.pass = space->gram_rank == constructed;
      std::ostringstream note;
      note << "REDUCED DIMENSION DISCREPANCY: series formula " << announced
           << " vs constructed " << constructed << " (Gram rank " << space->gram_rank
           << ", element pairs " << nb->dofs.size()
           << " DOFs with the non-constant generators); the suite passes on the "
              "rank value and never reconciles the two";
      c.note = note.str();
    }
    add_check(rep, std::move(c));
  }

  {
    CheckResult c;
    c.name = "gram_rank";
    c.measured = space->gram_smin / std::max(space->gram_smax, 1e-300);
    c.threshold = thr.gram_rank_rtol;
    c.pass = c.measured >= c.threshold;
    c.note = "smallest/largest singular value of the generator Gram matrix";
    add_check(rep, std::move(c));
  }

  {
    CheckResult c;
    c.name = "unisolvence_condition";
    c.measured = nb->condition;
    c.threshold = thr.tol_cond;
    c.pass = c.measured < c.threshold;
    c.note = "transfer matrix condition number";
    add_check(rep, std::move(c));
    rep.condition_numbers[to_string(spec.projector)] = nb->condition;

    CheckResult k;
    k.name = "kronecker_defect";
    k.measured = nb->kronecker_defect;
    k.threshold = thr.tol_kron;
    k.pass = k.measured <= k.threshold;
    k.note = "max |sigma_i(phi_j) - delta_ij| recomputed from the assembled "
             "transfer matrix and its inverse";
    add_check(rep, std::move(k));
  }

  add_check(rep, check_internal_vanishing(*nb, thr));
  add_check(rep, check_trace_degree(*nb, thr));
  add_check(rep, check_trace_span(*nb, thr));
  add_check(rep, check_degeneration_census(*nb, thr));
  add_check(rep, scaling_check(*nb, thr));
  add_check(rep, check_divergence(*nb, thr));

  // Two-cell glue test against an auto-generated dissimilar neighbor.
  {
    CheckResult c;
    c.name = "interface_conformity";
    c.threshold = thr.tol_conformity;
    int edge = opts.glue_edge;
    if (edge < 0) {
      edge = 0;
      for (int j = 1; j < p.n_faces(); ++j) {
        if (p.edge(j).length > p.edge(edge).length) edge = j;
      }
    }
    bool done = false;
    for (double shear : {0.35, -0.35, 0.2, 0.5, -0.5}) {
      try {
        const Polygon partner = make_glue_partner(p, edge, shear);
        int pedge = -1;
        const double tol = 1e-10 * p.diameter();
        for (int j = 0; j < partner.n_faces(); ++j) {
          if ((partner.edge(j).start - p.edge(edge).end).norm() <= tol &&
              (partner.edge(j).end - p.edge(edge).start).norm() <= tol) {
            pedge = j;
            break;
          }
        }
        if (pedge < 0) continue;
        auto pspace = std::make_shared<SpaceBasis>(build_space(partner, spec));
        const NodalBasis pnb =
            build_nodal_basis(pspace, make_dof_set(partner, spec), thr.tol_degenerate);
        const GlueResult glue = check_interface_conformity(*nb, edge, pnb, pedge);
        c.measured = glue.max_rel_jump;
        c.pass = glue.max_rel_jump <= thr.tol_conformity && glue.dofs_checked > 0;
        std::ostringstream note;
        note << "shared edge " << edge << ", partner edge " << glue.partner_edge
             << ", shear " << shear << ", " << glue.dofs_checked << " DOFs checked";
        c.note = note.str();
        done = true;
        break;
      } catch (const Error&) {
        continue;  // partner inadmissible for this spec; try another shear
      }
    }
    if (!done) {
      c.pass = false;
      c.note = "no admissible glue partner found";
    }
    add_check(rep, std::move(c));
  }

  if (opts.conditioning_compare) {
    CheckResult c;
    c.name = "conditioning_hermite_vs_monomial";
    try {
      ElementSpec mono = spec;
      mono.projector = ProjectorKind::Monomial;
      auto mspace = std::make_shared<SpaceBasis>(build_space(p, mono));
      const NodalBasis mnb =
          build_nodal_basis(mspace, make_dof_set(p, mono), thr.tol_degenerate);
      ElementSpec herm = spec;
      herm.projector = ProjectorKind::Hermite;
      double hermite_cond = nb->condition;
      if (spec.projector != ProjectorKind::Hermite) {
        auto hspace = std::make_shared<SpaceBasis>(build_space(p, herm));
        hermite_cond =
            build_nodal_basis(hspace, make_dof_set(p, herm), thr.tol_degenerate)
                .condition;
      }
      rep.condition_numbers["hermite"] = hermite_cond;
      rep.condition_numbers["monomial"] = mnb.condition;
      c.measured = hermite_cond;
      c.threshold = mnb.condition;
      c.pass = hermite_cond <= mnb.condition * (1.0 + 1e-9);
      c.note = "transfer-matrix condition, Hermite vs raw monomial kernels";
    } catch (const Error& e) {
      c.pass = false;
      c.note = std::string("comparison failed: ") + e.what();
    }
    add_check(rep, std::move(c));
  }

  if (opts.refinement_study) {
    const double h0 = spec.effective_h(p);
    std::vector<double> levels = {2.0 * h0, h0, 0.5 * h0};
    std::vector<Eigen::MatrixXd> coeffs;
    std::vector<double> kron_rec, vanish, conds;
    std::vector<std::vector<double>> div_norms;
    for (double h : levels) {
      ElementSpec s = spec;
      s.h_target = h;
      auto sp = std::make_shared<SpaceBasis>(build_space(p, s));
      const NodalBasis b =
          build_nodal_basis(sp, make_dof_set(p, s), thr.tol_degenerate);
      coeffs.push_back(b.coeff);
      kron_rec.push_back(b.kronecker_defect);
      conds.push_back(b.condition);
      vanish.push_back(internal_vanishing_defect(b) /
                       std::max(global_trace_scale(b), 1e-300));
      div_norms.push_back(dual_volume_stats(b).div_l2);
    }
    // Reference realization one level below the finest.
    ElementSpec sref = spec;
    sref.h_target = 0.25 * h0;
    auto rspace = std::make_shared<SpaceBasis>(build_space(p, sref));
    const NodalBasis rnb =
        build_nodal_basis(rspace, make_dof_set(p, sref), thr.tol_degenerate);
    const int n = rnb.size();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);

    bool kron_ok = true;
    bool transport_ok = true;
    bool vanish_ok = true;
    bool div_ok = true;
    std::vector<double> transport;
    for (size_t l = 0; l < levels.size(); ++l) {
      RefinementRow row;
      row.h = levels[l];
      row.kron_recorded = kron_rec[l];
      row.kron_transport =
          (rnb.transfer.matrix * coeffs[l] - identity).cwiseAbs().maxCoeff();
      transport.push_back(row.kron_transport);
      row.internal_vanish = vanish[l];
      row.condition = conds[l];
      if (l > 0) {
        double drift = 0.0;
        for (size_t i = 0; i < div_norms[l].size(); ++i) {
          const double prev = div_norms[l - 1][i];
          if (prev > 1e-12) {
            drift = std::max(drift, std::abs(div_norms[l][i] - prev) / prev);
          }
        }
        row.div_norm_drift = drift;
        if (drift > thr.div_stability) div_ok = false;
        if (!(kron_rec[l] <= kron_rec[l - 1] / thr.refine_factor ||
              kron_rec[l] <= thr.kron_saturation)) {
          kron_ok = false;
        }
        if (!(transport[l] <= transport[l - 1] / thr.refine_factor)) transport_ok = false;
        if (!(vanish[l] <= vanish[l - 1] / thr.refine_factor ||
              vanish[l] <= thr.kron_saturation)) {
          vanish_ok = false;
        }
      }
      if (kron_rec[l] > thr.tol_kron) kron_ok = false;
      rep.refinement.push_back(row);
    }
    CheckResult c;
    c.name = "refinement_convergence";
    c.pass = kron_ok && transport_ok && vanish_ok;
    c.measured = transport.back();
    c.threshold = thr.refine_factor;
    std::ostringstream note;
    note << "recorded Kronecker defect bounded (saturation floor "
         << thr.kron_saturation << "); cross-resolution transport defect decreasing by >= "
         << thr.refine_factor << " per halving; internal vanishing monotone";
    c.note = note.str();
    add_check(rep, std::move(c));

    CheckResult d;
    d.name = "refinement_divergence_stability";
    d.pass = div_ok;
    d.measured = rep.refinement.back().div_norm_drift;
    d.threshold = thr.div_stability;
    d.note = "relative drift of ||div phi|| per halving; boundary duals built "
             "from face-indicator data carry vertex singularities, so their "
             "norms grow like sqrt(log(1/h)) and the drift decays only "
             "logarithmically";
    d.note += div_ok ? "" : " (drift above the bound at this resolution)";
    add_check(rep, std::move(d));
  }

  return rep;
}

}  // namespace polyhdiv
