#include <doctest.h>

#include <cmath>

#include "polyhdiv/hkspace.hpp"
#include "test_support.hpp"

using namespace polyhdiv;
using namespace polyhdiv::testing;

TEST_CASE("dimension formula") {
  // general 2D series on a 9-gon: n(k+3) + 2k(k+1) - 1_{k>0}
  CHECK(dimension(ElementSpec::general(0), 9) == 27);
  CHECK(dimension(ElementSpec::general(1), 9) == 39);
  CHECK(dimension(ElementSpec::general(2), 9) == 56);
  CHECK(dimension(ElementSpec::general(1), 3) == 15);
  CHECK(dimension(ElementSpec::general(0), 3) == 9);
  // RT-like coefficients on a triangle
  CHECK(dimension(ElementSpec::rt_like(2), 3) == 3 * 3 + 11);

  ElementSpec bad = ElementSpec::general(1);
  bad.l1 = 1;
  CHECK_THROWS_AS(dimension(bad, 9), AdmissibilityError);
}

TEST_CASE("announced reduced-series formula (reported, not enforced)") {
  CHECK(reduced_series_dimension_formula(0, 9) == 9);
  CHECK(reduced_series_dimension_formula(2, 9) == 30);
}

TEST_CASE("boundary trace dimension") {
  ElementSpec s = ElementSpec::general(2);  // l1 = 0, l2 = k
  CHECK(boundary_trace_dimension(s) == 5);
  s = ElementSpec::rt_like(2);  // l1 = -1
  CHECK(boundary_trace_dimension(s) == 3);
  s = ElementSpec::general(0);
  s.l2 = -1;  // (l1, l2) = (0, -1)
  CHECK(boundary_trace_dimension(s) == 2);
}

TEST_CASE("triangle general k=0 space: 9 boundary generators") {
  const Polygon tri = generic_triangle();
  const SpaceBasis space = build_space(tri, coarse(ElementSpec::general(0), tri));
  CHECK(space.generators.size() == 9);
  CHECK(space.n_boundary_generators == 9);
  CHECK(space.extra_constant_generators.empty());
  CHECK(space.gram_rank == 9);
}

TEST_CASE("9-gon general k=2 block counts") {
  const Polygon p = ninegon();
  const SpaceBasis space = build_space(p, coarse(ElementSpec::general(2), p));
  REQUIRE(space.generators.size() == 56);
  int a_bnd = 0, a_int = 0, b_bnd = 0, b_int = 0;
  for (const Generator& g : space.generators) {
    switch (g.block) {
      case GeneratorBlock::ABoundary: ++a_bnd; break;
      case GeneratorBlock::AInterior: ++a_int; break;
      case GeneratorBlock::BBoundary: ++b_bnd; break;
      case GeneratorBlock::BInterior: ++b_int; break;
    }
  }
  CHECK(a_bnd == 18);
  CHECK(a_int == 8);
  CHECK(b_bnd == 27);
  CHECK(b_int == 3);
  CHECK(space.gram_rank == 56);
  CHECK(space.gram_smin >= 1e-8 * space.gram_smax);
}

TEST_CASE("9-gon reduced k=2: 38 element generators plus 2 constant lifts") {
  const Polygon p = ninegon();
  const SpaceBasis space = build_space(p, coarse(ElementSpec::reduced(2), p));
  CHECK(space.generators.size() == 38);
  CHECK(space.extra_constant_generators.size() == 2);
  CHECK(space.total_constructed() == 40);
  // the constructed space is genuinely 40-dimensional
  CHECK(space.gram_rank == 40);
  // constant lifts really are the constant fields
  for (const Generator& g : space.extra_constant_generators) {
    CHECK(std::abs(g.field.evaluate(p.centroid()) - 1.0) <= 1e-11);
  }
}

TEST_CASE("boundary generators have single-edge support and polynomial normal traces") {
  const Polygon p = ninegon();
  const ElementSpec spec = coarse(ElementSpec::general(1), p);
  const SpaceBasis space = build_space(p, spec);
  const auto legendre = projector_basis(-1, spec.l2, ProjectorKind::Orthogonal);
  const QuadratureRule rule = edge_quadrature(11);

  for (int g = 0; g < space.n_boundary_generators; ++g) {
    const Generator& gen = space.generators[g];
    for (int e = 0; e < p.n_faces(); ++e) {
      if (e == gen.edge) continue;
      const Vec2 v = gen.trace(p.edge(e), e, 0.37);
      CHECK(v.x == 0.0);
      CHECK(v.y == 0.0);
    }
    // q.n on the supporting edge is a polynomial of degree <= max(l1, l2):
    // subtract the Legendre expansion pointwise and integrate the remainder
    const Edge& edge = p.edge(gen.edge);
    double norm2 = 0.0;
    std::vector<double> vals;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (rule.nodes[q].x + 1.0);
      vals.push_back(gen.trace(edge, gen.edge, t).dot(edge.normal));
      norm2 += rule.weights[q] * vals.back() * vals.back();
    }
    std::vector<double> fit(vals.size(), 0.0);
    for (int d = 0; d <= std::max(spec.l1, spec.l2); ++d) {
      double proj = 0.0, pn = 0.0;
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double pv = legendre[d].poly.eval(rule.nodes[q].x);
        proj += rule.weights[q] * vals[q] * pv;
        pn += rule.weights[q] * pv * pv;
      }
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        fit[q] += proj / pn * legendre[d].poly.eval(rule.nodes[q].x);
      }
    }
    double res2 = 0.0;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      res2 += rule.weights[q] * (vals[q] - fit[q]) * (vals[q] - fit[q]);
    }
    CHECK(std::sqrt(res2) <= 1e-8 * std::sqrt(norm2));
  }
}

TEST_CASE("interior generators vanish on the whole boundary") {
  const Polygon p = ninegon();
  const SpaceBasis space = build_space(p, coarse(ElementSpec::general(1), p));
  for (size_t g = space.n_boundary_generators; g < space.generators.size(); ++g) {
    const Generator& gen = space.generators[g];
    for (int e = 0; e < p.n_faces(); ++e) {
      for (double t : {0.1, 0.5, 0.9}) {
        // both the defining data and the realized FE trace are zero
        CHECK(gen.trace(p.edge(e), e, t).norm() == 0.0);
        CHECK(std::abs(gen.field.trace_on_edge(e, t)) <= 1e-13);
      }
    }
  }
}

TEST_CASE("unsupported coefficient ranges are rejected") {
  const Polygon tri = generic_triangle();
  ElementSpec spec = ElementSpec::general(1);
  spec.l1 = 1;
  CHECK_THROWS_AS(build_space(tri, spec), AdmissibilityError);
}
