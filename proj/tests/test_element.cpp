#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace polyhdiv;
using namespace polyhdiv::testing;

TEST_CASE("k=0 triangle element is 9x9 with exact block structure") {
  const Polygon tri = generic_triangle();
  const ElementSpec spec = coarse(ElementSpec::general(0), tri);
  auto space = std::make_shared<SpaceBasis>(build_space(tri, spec));
  const DofSet dofs = make_dof_set(tri, spec);
  const TransferMatrix tm = assemble_transfer_matrix(*space, dofs);
  REQUIRE(tm.matrix.rows() == 9);
  REQUIRE(tm.matrix.cols() == 9);

  // normal DOFs of edge j see only the boundary generators of edge j
  for (int j = 0; j < 3; ++j) {
    for (int a = 0; a < dofs.per_edge; ++a) {
      const int row = dofs.edge_offset[j] + a;
      for (int g = 0; g < 9; ++g) {
        const bool same_edge = g >= space->edge_offset[j] &&
                               g < space->edge_offset[j] + space->per_edge;
        if (!same_edge) CHECK(tm.matrix(row, g) == 0.0);
      }
    }
  }
}

TEST_CASE("scaling a generator scales its transfer column") {
  const Polygon tri = generic_triangle();
  const ElementSpec spec = coarse(ElementSpec::general(0), tri);
  auto space = std::make_shared<SpaceBasis>(build_space(tri, spec));
  const DofSet dofs = make_dof_set(tri, spec);
  const TransferMatrix before = assemble_transfer_matrix(*space, dofs);

  SpaceBasis scaled = *space;
  Generator& g = scaled.generators[4];
  for (auto& [edge, poly] : g.boundary_data) poly = poly * 2.0;
  g.rhs = g.rhs * 2.0;
  g.field = DiscreteField(scaled.solver, g.field.coefficients() * 2.0);
  const TransferMatrix after = assemble_transfer_matrix(scaled, dofs);
  for (int i = 0; i < 9; ++i) {
    CHECK(after.matrix(i, 4) == doctest::Approx(2.0 * before.matrix(i, 4)).epsilon(1e-13));
    CHECK(after.matrix(i, 2) == doctest::Approx(before.matrix(i, 2)).epsilon(1e-13));
  }
}

TEST_CASE("duplicated DOF row makes the element singular") {
  const Polygon tri = generic_triangle();
  const ElementSpec spec = coarse(ElementSpec::general(0), tri);
  auto space = std::make_shared<SpaceBasis>(build_space(tri, spec));
  DofSet dofs = make_dof_set(tri, spec);
  dofs.normal[1] = dofs.normal[0];
  CHECK_THROWS_AS(build_nodal_basis(space, dofs), UnisolvenceError);
}

TEST_CASE("internal duals carry exactly zero boundary-generator coefficients") {
  const Polygon p = ninegon();
  const NodalBasis nb = build_element(p, coarse(ElementSpec::general(1), p));
  const int nn = nb.transfer.n_normal;
  const int nbg = nb.transfer.n_boundary_gens;
  for (int i = nn; i < nb.size(); ++i) {
    for (int g = 0; g < nbg; ++g) CHECK(nb.coeff(g, i) == 0.0);
  }
  // and the Kronecker property holds to round-off
  CHECK(nb.kronecker_defect <= 1e-10);
}

TEST_CASE("single-edge support of normal duals") {
  const Polygon p = ninegon();
  const NodalBasis nb = build_element(p, coarse(ElementSpec::general(2), p));
  // a dual generated from edge 5 has exactly zero trace on edge 3
  const int dual_on_5 = nb.dofs.edge_offset[5] + 2;
  for (double t : {0.2, 0.5, 0.8}) {
    CHECK(nb.trace(dual_on_5, 3, t).norm() == 0.0);
    // internal duals vanish everywhere on the boundary
    CHECK(nb.trace(nb.transfer.n_normal, 3, t).norm() == 0.0);
  }
}

TEST_CASE("degeneration census per edge") {
  const Polygon p = ninegon();
  for (int k : {0, 1, 2, 3}) {
    const NodalBasis nb = build_element(p, coarse(ElementSpec::general(k), p));
    for (int j = 0; j < p.n_faces(); ++j) CHECK(nb.degenerate_count_on_edge(j) == 2);
  }
  const NodalBasis red = build_element(p, coarse(ElementSpec::reduced(1), p));
  for (int j = 0; j < p.n_faces(); ++j) CHECK(red.degenerate_count_on_edge(j) == 0);
}

TEST_CASE("Ia vs Ib lowest-order scaling") {
  const Polygon p = ninegon();
  ElementSpec ia = coarse(ElementSpec::general(0), p);
  ia.config = NormalConfig::Ia;
  ElementSpec ib = ia;
  ib.config = NormalConfig::Ib;
  const NodalBasis nia = build_element(p, ia);
  const NodalBasis nib = build_element(p, ib);

  std::vector<double> ia_values;
  for (int j = 0; j < p.n_faces(); ++j) {
    // low-order slot is the third DOF of each edge (after the two coordinate
    // moments)
    const int slot = nia.dofs.edge_offset[j] + 2;
    REQUIRE(nia.dofs.normal[slot].kind == DofKind::GlobalNormalMoment);
    REQUIRE(nib.dofs.normal[slot].kind == DofKind::PointNormalValue);
    // Ib: normal trace is one at the sample point and constant on the edge
    CHECK(nib.normal_trace(slot, j, 0.5) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(nib.normal_trace(slot, j, 0.13) == doctest::Approx(1.0).epsilon(1e-9));
    ia_values.push_back(nia.normal_trace(slot, j, 0.5));
  }
  // Ia: constant per edge but depending on the edge, close to 1/|f| up to the
  // kernel normalization
  double lo = ia_values[0];
  double hi = ia_values[0];
  for (double v : ia_values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK((hi - lo) / hi > 0.01);
}

TEST_CASE("kernel scaling on one edge leaves other edges' duals unchanged") {
  const Polygon tri = generic_triangle();
  const ElementSpec spec = coarse(ElementSpec::general(1), tri);
  auto space = std::make_shared<SpaceBasis>(build_space(tri, spec));
  DofSet dofs = make_dof_set(tri, spec);
  const NodalBasis base = build_nodal_basis(space, dofs);

  DofSet scaled = dofs;
  for (int a = 0; a < scaled.per_edge; ++a) {
    Dof& d = scaled.normal[scaled.edge_offset[0] + a];
    if (d.kind == DofKind::GlobalNormalMoment) d.kernel.poly = d.kernel.poly * 3.0;
  }
  const NodalBasis mod = build_nodal_basis(space, scaled);
  for (int j = 1; j < 3; ++j) {
    for (int a = 0; a < dofs.per_edge; ++a) {
      const int i = dofs.edge_offset[j] + a;
      const double scale = base.coeff.col(i).cwiseAbs().maxCoeff();
      CHECK((base.coeff.col(i) - mod.coeff.col(i)).cwiseAbs().maxCoeff() <=
            1e-10 * scale);
    }
  }
}

TEST_CASE("evaluation outside the polygon is rejected") {
  const Polygon tri = generic_triangle();
  const NodalBasis nb = build_element(tri, coarse(ElementSpec::general(0), tri));
  CHECK_THROWS_AS(nb.eval(0, {10.0, 10.0}), DomainError);
}

TEST_CASE("Kronecker property re-evaluated through the DOF machinery") {
  const Polygon tri = generic_triangle();
  const ElementSpec spec = coarse(ElementSpec::general(1), tri);
  const NodalBasis nb = build_element(tri, spec);
  const Polygon& p = nb.space->mesh->polygon();
  for (int i : {0, 3, 7, nb.size() - 1}) {
    for (int j : {0, 5, nb.size() - 2}) {
      const double v =
          eval_dof(nb.dofs.at(i), nb.as_dof_field(j), p, nb.space->solver.get());
      CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) <= 1e-9);
    }
  }
}

TEST_CASE("worker count does not change the element") {
  const Polygon tri = generic_triangle();
  const ElementSpec spec = coarse(ElementSpec::general(1), tri);
  setenv("POLYHDIV_THREADS", "1", 1);
  const NodalBasis serial = build_element(tri, spec);
  setenv("POLYHDIV_THREADS", "4", 1);
  const NodalBasis parallel = build_element(tri, spec);
  unsetenv("POLYHDIV_THREADS");
  CHECK((serial.transfer.matrix - parallel.transfer.matrix).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((serial.coeff - parallel.coeff).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eval and normal_trace agree with generator combinations") {
  const Polygon tri = generic_triangle();
  const NodalBasis nb = build_element(tri, coarse(ElementSpec::general(0), tri));
  const Vec2 inside = tri.centroid();
  for (int i : {0, 4, 8}) {
    Vec2 manual{0.0, 0.0};
    for (int g = 0; g < 9; ++g) {
      manual = manual + nb.space->generators[g].value(inside) * nb.coeff(g, i);
    }
    const Vec2 v = nb.eval(i, inside);
    CHECK(v.x == doctest::Approx(manual.x).epsilon(1e-12));
    CHECK(v.y == doctest::Approx(manual.y).epsilon(1e-12));
  }
}
