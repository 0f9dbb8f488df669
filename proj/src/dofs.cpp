#include "polyhdiv/dofs.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace polyhdiv {

std::string to_string(DofKind k) {
  switch (k) {
    case DofKind::CoordinateMoment: return "coordinate-moment";
    case DofKind::GlobalNormalMoment: return "global-normal-moment";
    case DofKind::PointNormalValue: return "point-normal-value";
    case DofKind::InternalMoment: return "internal-moment";
  }
  return "?";
}

DofField dof_field_from_generator(const Generator& g, const Polygon& p) {
  DofField f;
  f.edge_value = [&g, &p](int edge, double t) { return g.trace(p.edge(edge), edge, t); };
  f.value = [&g](const Vec2& x) { return g.value(x); };
  f.value_at_quad = [&g](int tri, int q) { return g.value_at_quad(tri, q); };
  return f;
}

namespace {

double poly1_mean_on_interval(const Poly1& poly) {
  // (1/2) integral over [-1, 1]
  double v = 0.0;
  const auto& c = poly.coeffs();
  for (size_t i = 0; i < c.size(); i += 2) v += c[i] / (i + 1.0);
  return v;
}

}  // namespace

std::vector<Dof> make_normal_dofs(const Polygon& p, const ElementSpec& spec) {
  spec.validate();
  const bool reduced = spec.setting == Setting::Reduced;
  const bool coordinate = !reduced && spec.l1 == 0;
  if (!reduced && spec.l1 > 0) {
    throw AdmissibilityError("normal DOFs require l1 in {-1, 0}");
  }
  if (coordinate) {
    const AdmissibilityReport rep = check_admissibility(p);
    if (!rep.ok_for_coordinate_dofs) {
      std::string edges;
      for (int e : rep.axis_parallel_edges) edges += " " + std::to_string(e);
      throw AdmissibilityError(
          "coordinate-wise moments need edges not parallel to any axis; offending edges:" +
          edges);
    }
  }

  std::vector<Dof> out;
  for (int j = 0; j < p.n_faces(); ++j) {
    const auto elems = projector_basis(j, std::max(spec.l2, 0), spec.projector);
    if (coordinate) {
      for (int comp = 0; comp < 2; ++comp) {
        Dof d;
        d.kind = DofKind::CoordinateMoment;
        d.edge = j;
        d.component = comp;
        out.push_back(std::move(d));
      }
    }
    if (spec.l1 >= 0) {
      // Low-order global slot. In the general setting Ia tests the mean of
      // q.n and Ib samples it at the edge midpoint; the reduced setting uses
      // the moment for either configuration.
      Dof d;
      d.edge = j;
      if (reduced || spec.config == NormalConfig::Ia) {
        d.kind = DofKind::GlobalNormalMoment;
        d.kernel = elems[0];
      } else {
        d.kind = DofKind::PointNormalValue;
        d.point_t = 0.5;
      }
      out.push_back(std::move(d));
    }
    const int lo = spec.l1 >= 0 ? 1 : 0;
    for (int b = lo; b <= spec.l2; ++b) {
      Dof d;
      d.kind = DofKind::GlobalNormalMoment;
      d.edge = j;
      d.kernel = elems[b];
      if (!reduced && spec.l1 == 0) {
        // Deflate against the constant so higher kernels have zero edge mean.
        d.kernel.poly = d.kernel.poly - Poly1::constant(poly1_mean_on_interval(d.kernel.poly));
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<Dof> internal_dofs_from_pairs(const ElementSpec& spec,
                                          const std::vector<VectorPoly2>& pairs) {
  const int max_degree = std::max(spec.m1, spec.m2 + 1);
  std::vector<Dof> out;
  for (const VectorPoly2& pair : pairs) {
    for (const Poly2* comp : {&pair.c1, &pair.c2}) {
      for (const auto& [mono, c] : comp->terms()) {
        if (c != 0.0 && std::max(mono.a1, mono.a2) > max_degree) {
          throw AdmissibilityError("internal kernel degree exceeds max(m1, m2+1)");
        }
      }
    }
    Dof d;
    d.kind = DofKind::InternalMoment;
    d.internal_kernel = pair;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dof> make_internal_dofs(const ElementSpec& spec) {
  return internal_dofs_from_pairs(spec, build_projection_space_P(spec.k).pairs);
}

DofSet make_dof_set(const Polygon& p, const ElementSpec& spec) {
  DofSet set;
  set.spec = spec;
  set.normal = make_normal_dofs(p, spec);
  set.internal = make_internal_dofs(spec);
  set.per_edge = static_cast<int>(set.normal.size()) / p.n_faces();
  set.edge_offset.resize(p.n_faces());
  for (int j = 0; j < p.n_faces(); ++j) set.edge_offset[j] = j * set.per_edge;
  return set;
}

double eval_dof(const Dof& dof, const DofField& q, const Polygon& p,
                const PoissonSolver* solver, int edge_exactness) {
  switch (dof.kind) {
    case DofKind::PointNormalValue: {
      const Edge& e = p.edge(dof.edge);
      return q.edge_value(dof.edge, dof.point_t).dot(e.normal);
    }
    case DofKind::CoordinateMoment:
    case DofKind::GlobalNormalMoment: {
      const Edge& e = p.edge(dof.edge);
      // Default covers trace polynomials well past the kernel degree.
      if (edge_exactness < 0) edge_exactness = 2 * dof.kernel.degree + 13;
      const QuadratureRule rule = edge_quadrature(edge_exactness);
      double acc = 0.0;
      for (size_t i = 0; i < rule.weights.size(); ++i) {
        const double s = rule.nodes[i].x;
        const double t = 0.5 * (s + 1.0);
        const Vec2 val = q.edge_value(dof.edge, t);
        double integrand;
        if (dof.kind == DofKind::CoordinateMoment) {
          const Vec2 x = e.point(t);
          const double comp = dof.component == 0 ? val.x : val.y;
          const double ncomp = dof.component == 0 ? e.normal.x : e.normal.y;
          integrand = comp * ncomp * x[dof.component];
        } else {
          integrand = val.dot(e.normal) * dof.kernel.poly.eval(s);
        }
        acc += rule.weights[i] * integrand;
      }
      return acc * (e.length / 2.0);
    }
    case DofKind::InternalMoment: {
      if (solver == nullptr) throw UsageError("internal moments need the sub-mesh solver");
      double acc = 0.0;
      const int ntris = static_cast<int>(solver->mesh().triangles().size());
      for (int t = 0; t < ntris; ++t) {
        for (int qi = 0; qi < solver->quad_size(); ++qi) {
          const Vec2 x = solver->quad_point(t, qi);
          const Vec2 val = q.value_at_quad ? q.value_at_quad(t, qi) : q.value(x);
          acc += solver->quad_weight(t, qi) * val.dot(dof.internal_kernel.eval(x));
        }
      }
      return acc;
    }
  }
  throw UsageError("unknown dof kind");
}

DofValidationReport validate_dof_set(const DofSet& dofs, const SpaceBasis& space) {
  DofValidationReport rep;
  const ElementSpec& spec = dofs.spec;
  const Polygon& poly = space.mesh->polygon();

  rep.conditions1_ok = spec.l1 <= 0 || spec.l2 == -1;
  if (!rep.conditions1_ok) rep.violations.push_back("Conditions Set 1: l1^{d-1} <= 0 fails");

  rep.conditions3_ok = true;
  const int max_degree = std::max(spec.m1, spec.m2 + 1);
  for (const Dof& d : dofs.internal) {
    for (const Poly2* comp : {&d.internal_kernel.c1, &d.internal_kernel.c2}) {
      for (const auto& [mono, c] : comp->terms()) {
        if (c != 0.0 && std::max(mono.a1, mono.a2) > max_degree) rep.conditions3_ok = false;
      }
    }
  }
  if (!rep.conditions3_ok) {
    rep.violations.push_back("Conditions Set 3: internal kernel degree too large");
  }

  const int expected_per_edge =
      spec.setting == Setting::Reduced ? spec.k + 1 : boundary_trace_dimension(spec);
  rep.counts_ok = dofs.per_edge == expected_per_edge &&
                  static_cast<int>(dofs.normal.size()) == dofs.per_edge * poly.n_faces();
  const int internal_expected =
      spec.k > 0 ? 2 * spec.k * spec.k + 2 * spec.k - 1 : 0;
  if (static_cast<int>(dofs.internal.size()) != internal_expected) rep.counts_ok = false;
  if (!rep.counts_ok) rep.violations.push_back("DOF counts do not match the space layout");

  // Per-edge functional independence, measured on the per-edge trace block.
  for (int j = 0; j < poly.n_faces(); ++j) {
    Eigen::MatrixXd block(dofs.per_edge, space.per_edge);
    for (int a = 0; a < dofs.per_edge; ++a) {
      const Dof& d = dofs.normal[dofs.edge_offset[j] + a];
      for (int b = 0; b < space.per_edge; ++b) {
        const Generator& g = space.generators[space.edge_offset[j] + b];
        block(a, b) = eval_dof(d, dof_field_from_generator(g, poly), poly,
                               space.solver.get());
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10 * sv(0)) rep.dependent_edges.push_back(j);
  }
  if (!rep.dependent_edges.empty()) {
    rep.violations.push_back("per-edge kernels are not linearly independent");
  }
  return rep;
}

}  // namespace polyhdiv
