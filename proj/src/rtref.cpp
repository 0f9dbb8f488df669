#include "polyhdiv/rtref.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace polyhdiv {

RtSpace rt_space_basis(int k) {
  if (k < 0) throw UsageError("RT order must be >= 0");
  RtSpace s;
  s.k = k;
  for (const Monomial2D& m : monomial_basis(SpaceDesc::Pt(k))) {
    VectorPoly2 v1;
    v1.c1 = Poly2::monomial(m.a1, m.a2);
    s.basis.push_back(v1);
    VectorPoly2 v2;
    v2.c2 = Poly2::monomial(m.a1, m.a2);
    s.basis.push_back(v2);
  }
  for (int a = 0; a <= k; ++a) {
    // homogeneous degree-k monomial x^a y^{k-a}
    VectorPoly2 v;
    v.c1 = Poly2::monomial(a + 1, k - a);
    v.c2 = Poly2::monomial(a, k - a + 1);
    s.basis.push_back(v);
  }
  return s;
}

namespace {

// Exact integral of a 1D polynomial over [-1, 1].
double integrate_interval(const Poly1& p) {
  double v = 0.0;
  const auto& c = p.coeffs();
  for (size_t i = 0; i < c.size(); i += 2) v += 2.0 * c[i] / (i + 1.0);
  return v;
}

Poly1 restrict_normal_component(const VectorPoly2& q, const Edge& e) {
  // q(x(s)).n with x(s) = midpoint + tangent * (len/2) s
  const Vec2 base = e.midpoint() - e.tangent * (e.length / 2.0);
  const Vec2 dir = e.tangent * e.length;  // parameter t in [0,1]
  // Work in t and convert: s = 2t - 1 <=> t = (s+1)/2. Build in t then s.
  const Poly1 qx = q.c1.restrict_to_line(base, dir);
  const Poly1 qy = q.c2.restrict_to_line(base, dir);
  const Poly1 qn_t = qx * e.normal.x + qy * e.normal.y;
  // substitute t = (s + 1) / 2
  Poly1 result;
  const Poly1 half({0.5, 0.5});
  Poly1 power = Poly1::constant(1.0);
  for (int i = 0; i <= qn_t.degree(); ++i) {
    result = result + power * qn_t.coeffs()[i];
    power = power * half;
  }
  return result;
}

}  // namespace

RtElement rt_nodal_basis(int k, const Polygon& tri) {
  if (tri.n_faces() != 3) throw UsageError("RT oracle expects a triangle");
  RtElement el(tri);
  el.k = k;
  el.space = rt_space_basis(k);
  const int dim = el.space.dim();
  el.n_normal = 3 * (k + 1);

  const auto legendre = projector_basis(-1, k, ProjectorKind::Orthogonal);
  const auto internal_monos = monomial_basis(SpaceDesc::Pt(k - 1));
  const int n_internal = 2 * static_cast<int>(internal_monos.size());
  if (el.n_normal + n_internal != dim) {
    throw UnisolvenceError("RT degree-of-freedom count mismatch");
  }

  // Exact quadrature on the physical triangle for the internal moments.
  const QuadratureRule ref = triangle_quadrature(2 * k + 1);
  const Vec2 a = tri.vertices()[0];
  const Vec2 ab = tri.vertices()[1] - a;
  const Vec2 ac = tri.vertices()[2] - a;
  const double det = ab.cross(ac);

  el.transfer = Eigen::MatrixXd::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    const VectorPoly2& q = el.space.basis[col];
    int row = 0;
    for (int e = 0; e < 3; ++e) {
      const Edge& edge = tri.edge(e);
      const Poly1 qn = restrict_normal_component(q, edge);
      for (int i = 0; i <= k; ++i, ++row) {
        el.transfer(row, col) =
            integrate_interval(qn * legendre[i].poly) * (edge.length / 2.0);
      }
    }
    for (const Monomial2D& m : internal_monos) {
      for (int comp = 0; comp < 2; ++comp, ++row) {
        const Poly2& qc = comp == 0 ? q.c1 : q.c2;
        double acc = 0.0;
        for (size_t i = 0; i < ref.weights.size(); ++i) {
          const Vec2 x = a + ab * ref.nodes[i].x + ac * ref.nodes[i].y;
          acc += ref.weights[i] * det * qc.eval(x) * m.eval(x);
        }
        el.transfer(row, col) = acc;
      }
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(el.transfer);
  if (qr.rank() < dim) throw UnisolvenceError("RT transfer matrix is singular");
  el.coeff = qr.inverse();
  el.kronecker_defect = (el.transfer * el.coeff - Eigen::MatrixXd::Identity(dim, dim))
                            .cwiseAbs()
                            .maxCoeff();
  return el;
}

VectorPoly2 RtElement::dual(int i) const {
  VectorPoly2 acc;
  for (int m = 0; m < space.dim(); ++m) {
    const double c = coeff(m, i);
    if (c != 0.0) {
      acc.c1 = acc.c1 + space.basis[m].c1 * c;
      acc.c2 = acc.c2 + space.basis[m].c2 * c;
    }
  }
  return acc;
}

Poly1 RtElement::normal_trace_poly(int i, int edge) const {
  return restrict_normal_component(dual(i), triangle.edge(edge));
}

double RtElement::divergence_fit_residual(int i) const {
  const VectorPoly2 d = dual(i);
  const Poly2 div = d.c1.derivative(0) + d.c2.derivative(1);
  double tail = 0.0;
  double scale = 0.0;
  for (const auto& [m, c] : div.terms()) {
    scale = std::max(scale, std::abs(c));
    if (m.a1 + m.a2 > k) tail = std::max(tail, std::abs(c));
  }
  return scale > 0.0 ? tail / std::max(scale, 1.0) : 0.0;
}

RtComparisonReport rt_compare_normal_traces(const RtElement& rt, const NodalBasis& hk) {
  RtComparisonReport rep;
  rep.k = rt.k;
  const Polygon& tri = rt.triangle;
  const QuadratureRule rule = edge_quadrature(4 * rt.k + 6);
  rep.ok = true;
  for (int e = 0; e < 3; ++e) {
    // H-side: the k+1 duals of this edge; RT-side: its k+1 normal duals.
    const int m = rt.k + 1;
    std::vector<std::vector<double>> hv(m), rv(m);
    for (int i = 0; i < m; ++i) {
      const int hdof = hk.dofs.edge_offset[e] + i;
      for (size_t q = 0; q < rule.weights.size(); ++q) {
        const double s = rule.nodes[q].x;
        const double t = 0.5 * (s + 1.0);
        hv[i].push_back(hk.normal_trace(hdof, e, t));
        rv[i].push_back(rt.normal_trace_poly(e * m + i, e).eval(s));
      }
    }
    auto normalize = [&](std::vector<std::vector<double>>& vals) {
      for (auto& row : vals) {
        double n2 = 0.0;
        for (size_t q = 0; q < row.size(); ++q) n2 += rule.weights[q] * row[q] * row[q];
        const double n = std::sqrt(std::max(n2, 1e-300));
        for (double& v : row) v /= n;
      }
    };
    normalize(hv);
    normalize(rv);
    Eigen::MatrixXd cross(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (size_t q = 0; q < rule.weights.size(); ++q) {
          acc += rule.weights[q] * hv[i][q] * rv[j][q];
        }
        cross(i, j) = acc;
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-8 * sv(0)) ++rank;
    }
    rep.cross_rank.push_back(rank);
    if (rank != m) rep.ok = false;
  }
  return rep;
}

}  // namespace polyhdiv
