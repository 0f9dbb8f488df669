#include "polyhdiv/hkspace.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "polyhdiv/parallel.hpp"

namespace polyhdiv {

std::string to_string(Setting s) {
  return s == Setting::General ? "general" : "reduced";
}

std::string to_string(NormalConfig c) { return c == NormalConfig::Ia ? "ia" : "ib"; }

std::string to_string(GeneratorBlock b) {
  switch (b) {
    case GeneratorBlock::ABoundary: return "A-boundary";
    case GeneratorBlock::AInterior: return "A-interior";
    case GeneratorBlock::BBoundary: return "B-boundary";
    case GeneratorBlock::BInterior: return "B-interior";
  }
  return "?";
}

ElementSpec ElementSpec::general(int k) {
  ElementSpec s;
  s.k = k;
  s.l1 = 0;
  s.l2 = k;
  s.m1 = k - 1;
  s.m2 = k - 1;
  s.setting = Setting::General;
  return s;
}

ElementSpec ElementSpec::reduced(int k) {
  ElementSpec s;
  s.k = k;
  s.l1 = 0;  // bookkeeping only; the A block carries a single global constant
  s.l2 = k;
  s.m1 = k - 1;
  s.m2 = k - 1;
  s.setting = Setting::Reduced;
  return s;
}

ElementSpec ElementSpec::rt_like(int k) {
  ElementSpec s;
  s.k = k;
  s.l1 = -1;
  s.l2 = k;
  s.m1 = k - 1;
  s.m2 = k - 1;
  s.setting = Setting::General;
  return s;
}

void ElementSpec::validate() const {
  if (k < 0) throw AdmissibilityError("order k must be >= 0");
  if (l1 > 0 && l2 != -1) {
    throw AdmissibilityError("Conditions Set 1 violated: l1 = " + std::to_string(l1) +
                             " requires l1 <= 0 (or l2 = -1)");
  }
  if (l2 < l1 && l2 != -1) {
    throw AdmissibilityError("Conditions Set 1 violated for l2 < l1: l2 must be -1");
  }
  if (m1 < -1 || m2 < -1 || l1 < -1 || l2 < -1) {
    throw AdmissibilityError("coefficients must be >= -1");
  }
}

int dimension(const ElementSpec& spec, int n_faces) {
  spec.validate();
  if (spec.l1 > 0) throw AdmissibilityError("dimension formula requires l1 <= 0");
  const int l1p = spec.l1 + 1;
  const int l2p = spec.l2 + 1;
  const int m1p = spec.m1 + 1;
  const int boundary = n_faces * (2 * l1p + l2p);
  const int a_int = 2 * m1p * m1p;
  const int b_int = spec.m2 >= 0 ? (spec.m2 + 1) * (spec.m2 + 1) - spec.m2 * spec.m2 : 0;
  return boundary + a_int + b_int;
}

int reduced_series_dimension_formula(int k, int n_faces) {
  return n_faces * (k + 1) + 2 * k * (k - 1) - (k > 0 ? 1 : 0);
}

int boundary_trace_dimension(const ElementSpec& spec) {
  if (spec.l1 == -1) return spec.l2 + 1;
  if (spec.l2 >= spec.l1) return 2 * (spec.l1 + 1) + (spec.l2 + 1) - spec.l1;
  return 2 * (spec.l1 + 1);
}

Vec2 Generator::trace(const Edge& e, int edge_index, double t) const {
  double u = 0.0;
  if (constant_boundary) {
    u = 1.0;
  } else {
    auto it = boundary_data.find(edge_index);
    if (it == boundary_data.end()) return {0.0, 0.0};
    u = it->second.eval(2.0 * t - 1.0);
  }
  if (block == GeneratorBlock::ABoundary || block == GeneratorBlock::AInterior) {
    return component == 0 ? Vec2{u, 0.0} : Vec2{0.0, u};
  }
  const Vec2 x = e.point(t);
  return x * u;
}

Vec2 Generator::value(const Vec2& p) const {
  const double u = field.evaluate(p);
  if (block == GeneratorBlock::ABoundary || block == GeneratorBlock::AInterior) {
    return component == 0 ? Vec2{u, 0.0} : Vec2{0.0, u};
  }
  return p * u;
}

Vec2 Generator::value_at_quad(int tri, int q) const {
  const double u = field.value_at_quad(tri, q);
  if (block == GeneratorBlock::ABoundary || block == GeneratorBlock::AInterior) {
    return component == 0 ? Vec2{u, 0.0} : Vec2{0.0, u};
  }
  return field.solver().quad_point(tri, q) * u;
}

double Generator::divergence_at_quad(int tri, int q) const {
  const Vec2 g = field.gradient_at_quad(tri, q);
  if (block == GeneratorBlock::ABoundary || block == GeneratorBlock::AInterior) {
    return component == 0 ? g.x : g.y;
  }
  const double u = field.value_at_quad(tri, q);
  const Vec2 x = field.solver().quad_point(tri, q);
  return 2.0 * u + x.dot(g);
}

namespace {

void compute_gram(SpaceBasis& basis) {
  const PoissonSolver& solver = *basis.solver;
  std::vector<const Generator*> all;
  for (const Generator& g : basis.generators) all.push_back(&g);
  for (const Generator& g : basis.extra_constant_generators) all.push_back(&g);
  const int n = static_cast<int>(all.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);

  const int ntris = static_cast<int>(solver.mesh().triangles().size());
  const int nq = solver.quad_size();
  std::vector<Vec2> vals(n);
  for (int t = 0; t < ntris; ++t) {
    for (int q = 0; q < nq; ++q) {
      const double w = solver.quad_weight(t, q);
      for (int i = 0; i < n; ++i) vals[i] = all[i]->value_at_quad(t, q);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          gram(i, j) += w * vals[i].dot(vals[j]);
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) gram(i, j) = gram(j, i);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
  const Eigen::VectorXd sv = svd.singularValues();
  basis.gram = std::move(gram);
  basis.gram_smax = sv.size() ? sv(0) : 0.0;
  basis.gram_smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  // Gram singular values are squared generator singular values; rank uses
  // the same relative threshold as the basis invariant (1e-8 on fields).
  const double tol = basis.gram_smax * 1e-16;
  basis.gram_rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++basis.gram_rank;
  }

  const int n_element = static_cast<int>(basis.generators.size());
  Eigen::JacobiSVD<Eigen::MatrixXd> esvd(basis.gram.topLeftCorner(n_element, n_element));
  const Eigen::VectorXd esv = esvd.singularValues();
  if (esv(esv.size() - 1) < 1e-16 * esv(0)) {
    throw SpaceRankError("generator Gram matrix is numerically rank deficient");
  }
}

}  // namespace

GeneratorLayout enumerate_generators(const Polygon& p, const ElementSpec& spec) {
  spec.validate();
  if (spec.l1 > 0 || spec.l2 < 0) {
    throw AdmissibilityError("space construction supports l1 in {-1, 0} and l2 >= 0");
  }
  GeneratorLayout lay;
  const int n = p.n_faces();
  const bool reduced = spec.setting == Setting::Reduced;
  const int n_a_per_edge = reduced ? 0 : (spec.l1 + 1) * 2;
  lay.per_edge = n_a_per_edge + (spec.l2 + 1);
  lay.edge_offset.resize(n);

  for (int j = 0; j < n; ++j) {
    lay.edge_offset[j] = static_cast<int>(lay.generators.size());
    const auto elems = projector_basis(j, std::max(spec.l2, 0), spec.projector);
    if (!reduced) {
      for (int a = 0; a <= spec.l1; ++a) {
        for (int comp = 0; comp < 2; ++comp) {
          Generator gen;
          gen.block = GeneratorBlock::ABoundary;
          gen.edge = j;
          gen.component = comp;
          gen.poly_index = a;
          gen.boundary_data[j] = elems[a].poly;
          PoissonProblem prob;
          prob.boundary[j] = elems[a].poly;
          lay.generators.push_back(std::move(gen));
          lay.problems.push_back(std::move(prob));
        }
      }
    }
    for (int b = 0; b <= spec.l2; ++b) {
      Generator gen;
      gen.block = GeneratorBlock::BBoundary;
      gen.edge = j;
      gen.poly_index = b;
      gen.boundary_data[j] = elems[b].poly;
      PoissonProblem prob;
      prob.boundary[j] = elems[b].poly;
      lay.generators.push_back(std::move(gen));
      lay.problems.push_back(std::move(prob));
    }
  }
  lay.n_boundary = static_cast<int>(lay.generators.size());

  const auto a_monos = monomial_basis(SpaceDesc::Q(spec.m1));
  for (int comp = 0; comp < 2; ++comp) {
    for (size_t a = 0; a < a_monos.size(); ++a) {
      Generator gen;
      gen.block = GeneratorBlock::AInterior;
      gen.component = comp;
      gen.poly_index = static_cast<int>(a);
      gen.rhs = Poly2::monomial(a_monos[a].a1, a_monos[a].a2);
      PoissonProblem prob;
      prob.rhs = gen.rhs;
      lay.generators.push_back(std::move(gen));
      lay.problems.push_back(std::move(prob));
    }
  }
  const auto b_monos = monomial_basis(SpaceDesc::Qb(spec.m2));
  for (size_t b = 0; b < b_monos.size(); ++b) {
    Generator gen;
    gen.block = GeneratorBlock::BInterior;
    gen.poly_index = static_cast<int>(b);
    gen.rhs = Poly2::monomial(b_monos[b].a1, b_monos[b].a2);
    PoissonProblem prob;
    prob.rhs = gen.rhs;
    lay.generators.push_back(std::move(gen));
    lay.problems.push_back(std::move(prob));
  }

  if (reduced) {
    for (int comp = 0; comp < 2; ++comp) {
      Generator gen;
      gen.block = GeneratorBlock::ABoundary;
      gen.component = comp;
      gen.constant_boundary = true;
      PoissonProblem prob;
      prob.whole_boundary_constant = true;
      prob.constant_value = 1.0;
      lay.extra_constant_generators.push_back(std::move(gen));
      lay.extra_problems.push_back(std::move(prob));
    }
  }
  return lay;
}

SpaceBasis build_space(const Polygon& p, const ElementSpec& spec) {
  GeneratorLayout lay = enumerate_generators(p, spec);

  SpaceBasis basis;
  basis.spec = spec;
  basis.mesh = std::make_shared<SubMesh>(p, spec.effective_h(p));
  const int r = spec.effective_fe_order();
  const int exactness = 2 * (r + std::max(spec.k, 1)) + 2;
  basis.solver = std::make_shared<PoissonSolver>(basis.mesh, r, exactness);

  const int n = p.n_faces();
  const bool reduced = spec.setting == Setting::Reduced;
  basis.per_edge = lay.per_edge;
  basis.edge_offset = lay.edge_offset;
  basis.n_boundary_generators = lay.n_boundary;
  basis.generators = std::move(lay.generators);
  basis.extra_constant_generators = std::move(lay.extra_constant_generators);

  parallel_for(static_cast<int>(basis.generators.size()), [&](int i) {
    basis.generators[i].field = basis.solver->solve(lay.problems[i]);
  });
  parallel_for(static_cast<int>(basis.extra_constant_generators.size()), [&](int i) {
    basis.extra_constant_generators[i].field = basis.solver->solve(lay.extra_problems[i]);
  });

  if (!reduced) {
    const int expected = dimension(spec, n);
    if (static_cast<int>(basis.generators.size()) != expected) {
      throw SpaceRankError("generator enumeration does not match the dimension formula");
    }
  }

  compute_gram(basis);
  return basis;
}

}  // namespace polyhdiv
