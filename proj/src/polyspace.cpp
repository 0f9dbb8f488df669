#include "polyhdiv/polyspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace polyhdiv {

double Monomial2D::eval(const Vec2& p) const {
  double v = 1.0;
  for (int i = 0; i < a1; ++i) v *= p.x;
  for (int i = 0; i < a2; ++i) v *= p.y;
  return v;
}

void Poly1::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  if (c_.empty()) c_.push_back(0.0);
}

double Poly1::eval(double s) const {
  double v = 0.0;
  for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i) v = v * s + c_[i];
  return v;
}

Poly1 Poly1::shifted_monomial(double a, double b, int power) {
  Poly1 r({1.0});
  const Poly1 lin({a, b});
  for (int i = 0; i < power; ++i) r = r * lin;
  return r;
}

Poly1 Poly1::operator+(const Poly1& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Poly1(std::move(r));
}

Poly1 Poly1::operator-(const Poly1& o) const { return *this + o * (-1.0); }

Poly1 Poly1::operator*(const Poly1& o) const {
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (size_t i = 0; i < c_.size(); ++i) {
    for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  }
  return Poly1(std::move(r));
}

Poly1 Poly1::operator*(double s) const {
  std::vector<double> r = c_;
  for (double& v : r) v *= s;
  return Poly1(std::move(r));
}

void Poly2::add_term(int a1, int a2, double c) {
  if (c == 0.0) return;
  for (auto& [m, v] : terms_) {
    if (m.a1 == a1 && m.a2 == a2) {
      v += c;
      return;
    }
  }
  terms_.push_back({Monomial2D{a1, a2}, c});
}

Poly2 Poly2::monomial(int a1, int a2, double c) {
  Poly2 p;
  p.add_term(a1, a2, c);
  return p;
}

double Poly2::eval(const Vec2& p) const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.eval(p);
  return v;
}

Poly2 Poly2::derivative(int var) const {
  Poly2 r;
  for (const auto& [m, c] : terms_) {
    if (var == 0 && m.a1 > 0) r.add_term(m.a1 - 1, m.a2, c * m.a1);
    if (var == 1 && m.a2 > 0) r.add_term(m.a1, m.a2 - 1, c * m.a2);
  }
  return r;
}

Poly2 Poly2::mul_coordinate(int var) const {
  Poly2 r;
  for (const auto& [m, c] : terms_) {
    r.add_term(m.a1 + (var == 0 ? 1 : 0), m.a2 + (var == 1 ? 1 : 0), c);
  }
  return r;
}

Poly2 Poly2::operator+(const Poly2& o) const {
  Poly2 r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m.a1, m.a2, c);
  return r;
}

Poly2 Poly2::operator*(double s) const {
  Poly2 r = *this;
  for (auto& [m, c] : r.terms_) c *= s;
  return r;
}

Poly1 Poly2::restrict_to_line(const Vec2& base, const Vec2& dir) const {
  Poly1 r;
  for (const auto& [m, c] : terms_) {
    const Poly1 px = Poly1::shifted_monomial(base.x, dir.x, m.a1);
    const Poly1 py = Poly1::shifted_monomial(base.y, dir.y, m.a2);
    r = r + px * py * c;
  }
  return r;
}

int Poly2::total_degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) {
    if (c != 0.0) d = std::max(d, m.a1 + m.a2);
  }
  return d;
}

double Poly2::coeff(int a1, int a2) const {
  for (const auto& [m, c] : terms_) {
    if (m.a1 == a1 && m.a2 == a2) return c;
  }
  return 0.0;
}

double Poly2::max_abs_coeff() const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
  return v;
}

std::vector<Monomial2D> monomial_basis(const SpaceDesc& desc) {
  std::vector<Monomial2D> out;
  switch (desc.kind) {
    case SpaceDesc::Kind::Qk:
      for (int a1 = 0; a1 <= desc.a; ++a1) {
        for (int a2 = 0; a2 <= desc.a; ++a2) out.push_back({a1, a2});
      }
      break;
    case SpaceDesc::Kind::Qbracket:
      for (int a1 = 0; a1 <= desc.a; ++a1) {
        for (int a2 = 0; a2 <= desc.a; ++a2) {
          if (std::max(a1, a2) == desc.a) out.push_back({a1, a2});
        }
      }
      break;
    case SpaceDesc::Kind::Pab:
      for (int a1 = 0; a1 <= desc.a; ++a1) {
        for (int a2 = 0; a2 <= desc.b; ++a2) out.push_back({a1, a2});
      }
      break;
    case SpaceDesc::Kind::Ptotal:
      for (int d = 0; d <= desc.a; ++d) {
        for (int a1 = d; a1 >= 0; --a1) out.push_back({a1, d - a1});
      }
      break;
  }
  return out;
}

ProjectionSpaceP build_projection_space_P(int k) {
  ProjectionSpaceP P;
  P.order = k;
  if (k <= 0) return P;
  for (int l = 0; l <= k; ++l) {
    for (int m = 0; m <= k - 1; ++m) {
      if (l == k && m == k - 1) continue;
      VectorPoly2 first;
      first.c1 = Poly2::monomial(l, m);
      P.pairs.push_back(first);
      VectorPoly2 second;
      second.c2 = Poly2::monomial(m, l);
      P.pairs.push_back(second);
    }
  }
  VectorPoly2 coupled;
  coupled.c1 = Poly2::monomial(k, k - 1);
  coupled.c2 = Poly2::monomial(k - 1, k);
  P.pairs.push_back(coupled);
  return P;
}

ProjectorKind projector_kind_from_string(const std::string& s) {
  if (s == "monomial") return ProjectorKind::Monomial;
  if (s == "orthogonal") return ProjectorKind::Orthogonal;
  if (s == "hermite") return ProjectorKind::Hermite;
  throw UsageError("unknown projector kind: " + s);
}

std::string to_string(ProjectorKind kind) {
  switch (kind) {
    case ProjectorKind::Monomial: return "monomial";
    case ProjectorKind::Orthogonal: return "orthogonal";
    case ProjectorKind::Hermite: return "hermite";
  }
  return "?";
}

namespace {

Poly1 legendre(int n) {
  // Bonnet recurrence.
  Poly1 p0 = Poly1::constant(1.0);
  if (n == 0) return p0;
  Poly1 p1({0.0, 1.0});
  for (int m = 1; m < n; ++m) {
    Poly1 next = (p1 * Poly1({0.0, 1.0})) * (2.0 * m + 1.0) - p0 * static_cast<double>(m);
    p0 = p1;
    p1 = next * (1.0 / (m + 1.0));
  }
  return p1;
}

Poly1 hermite_prob(int n) {
  // He_{n+1}(s) = s He_n(s) - n He_{n-1}(s)
  Poly1 p0 = Poly1::constant(1.0);
  if (n == 0) return p0;
  Poly1 p1({0.0, 1.0});
  for (int m = 1; m < n; ++m) {
    Poly1 next = p1 * Poly1({0.0, 1.0}) - p0 * static_cast<double>(m);
    p0 = p1;
    p1 = next;
  }
  return p1;
}

double l2_norm_on_interval(const Poly1& p) {
  // Exact integral of p^2 over [-1, 1].
  const Poly1 sq = p * p;
  double v = 0.0;
  const auto& c = sq.coeffs();
  for (size_t i = 0; i < c.size(); i += 2) v += 2.0 * c[i] / (i + 1.0);
  return std::sqrt(v);
}

}  // namespace

std::vector<EdgePolynomial> projector_basis(int edge, int degree, ProjectorKind kind) {
  if (degree < 0) throw UsageError("projector basis degree must be >= 0");
  std::vector<EdgePolynomial> out;
  out.reserve(degree + 1);
  for (int d = 0; d <= degree; ++d) {
    EdgePolynomial ep;
    ep.degree = d;
    ep.kind = kind;
    ep.edge = edge;
    switch (kind) {
      case ProjectorKind::Monomial: {
        std::vector<double> c(d + 1, 0.0);
        c[d] = 1.0;
        ep.poly = Poly1(std::move(c));
        break;
      }
      case ProjectorKind::Orthogonal:
        ep.poly = legendre(d);
        break;
      case ProjectorKind::Hermite: {
        const Poly1 he = hermite_prob(d);
        ep.poly = he * (1.0 / l2_norm_on_interval(he));
        break;
      }
    }
    out.push_back(std::move(ep));
  }
  return out;
}

namespace {

constexpr int kMaxExactness = 400;

// Gauss-Legendre nodes by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = t;
      if (n == 1) p1 = t;
      for (int m = 1; m < n; ++m) {
        const double p2 = ((2.0 * m + 1.0) * t * p1 - m * p0) / (m + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

QuadratureRule edge_quadrature(int exactness) {
  if (exactness < 0 || exactness > kMaxExactness) {
    throw QuadratureError("unsupported edge quadrature exactness " + std::to_string(exactness));
  }
  const int n = exactness / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.exactness = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back({x[i], 0.0});
    rule.weights.push_back(w[i]);
  }
  return rule;
}

QuadratureRule triangle_quadrature(int exactness) {
  if (exactness < 0 || exactness > kMaxExactness) {
    throw QuadratureError("unsupported triangle quadrature exactness " +
                          std::to_string(exactness));
  }
  // Duffy transform x = u, y = v (1 - u) with Jacobian (1 - u): a polynomial
  // of total degree d pulls back to degree <= 2d + 1 in u and d in v.
  const int nu = exactness + 1;
  const int nv = exactness / 2 + 1;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);
  QuadratureRule rule;
  rule.exactness = exactness;
  for (int i = 0; i < nu; ++i) {
    const double u = 0.5 * (xu[i] + 1.0);
    for (int j = 0; j < nv; ++j) {
      const double v = 0.5 * (xv[j] + 1.0);
      rule.nodes.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(0.25 * wu[i] * wv[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace polyhdiv
