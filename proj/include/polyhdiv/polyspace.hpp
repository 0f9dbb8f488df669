// Polynomial machinery: monomial spaces Q_k / Q_[k] / P_{a,b} / P_k (total
// degree), dense 1D/2D polynomial arithmetic, the symmetric internal
// projection space, per-edge projector bases and Gauss-type quadrature on
// the reference interval and triangle.
#pragma once

#include <string>
#include <vector>

#include "polyhdiv/errors.hpp"
#include "polyhdiv/geometry.hpp"

namespace polyhdiv {

struct Monomial2D {
  int a1 = 0;
  int a2 = 0;
  double eval(const Vec2& p) const;
};

// Dense 1D polynomial, coefficients in the monomial basis: sum c_i s^i.
class Poly1 {
public:
  Poly1() = default;
  explicit Poly1(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
  static Poly1 constant(double v) { return Poly1({v}); }
  static Poly1 shifted_monomial(double a, double b, int power);  // (a + b s)^power

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double eval(double s) const;
  const std::vector<double>& coeffs() const { return c_; }

  Poly1 operator+(const Poly1& o) const;
  Poly1 operator-(const Poly1& o) const;
  Poly1 operator*(const Poly1& o) const;
  Poly1 operator*(double s) const;

private:
  std::vector<double> c_;
  void trim();
};

// Sparse-ish 2D polynomial as a list of monomial terms.
class Poly2 {
public:
  Poly2() = default;
  static Poly2 monomial(int a1, int a2, double c = 1.0);
  static Poly2 constant(double v) { return monomial(0, 0, v); }

  double eval(const Vec2& p) const;
  Poly2 derivative(int var) const;
  Poly2 mul_coordinate(int var) const;  // multiply by x or y
  Poly2 operator+(const Poly2& o) const;
  Poly2 operator*(double s) const;

  // Restriction to the affine line p(t) = base + dir * t, as a Poly1 in t.
  Poly1 restrict_to_line(const Vec2& base, const Vec2& dir) const;

  int total_degree() const;
  double coeff(int a1, int a2) const;
  double max_abs_coeff() const;
  const std::vector<std::pair<Monomial2D, double>>& terms() const { return terms_; }

private:
  std::vector<std::pair<Monomial2D, double>> terms_;
  void add_term(int a1, int a2, double c);
};

struct VectorPoly2 {
  Poly2 c1;
  Poly2 c2;
  Vec2 eval(const Vec2& p) const { return {c1.eval(p), c2.eval(p)}; }
};

// Monomial space descriptors.
struct SpaceDesc {
  enum class Kind { Qk, Qbracket, Pab, Ptotal };
  Kind kind = Kind::Qk;
  int a = 0;  // order k, or degree bound in x
  int b = 0;  // degree bound in y (Pab only)

  static SpaceDesc Q(int k) { return {Kind::Qk, k, k}; }
  static SpaceDesc Qb(int k) { return {Kind::Qbracket, k, k}; }
  static SpaceDesc P(int a, int b) { return {Kind::Pab, a, b}; }
  static SpaceDesc Pt(int k) { return {Kind::Ptotal, k, k}; }
};

// Ordered monomial basis; indices of -1 yield the empty list.
std::vector<Monomial2D> monomial_basis(const SpaceDesc& desc);

// Symmetric internal projection space for order k (empty for k = 0).
struct ProjectionSpaceP {
  int order = 0;
  std::vector<VectorPoly2> pairs;
};
ProjectionSpaceP build_projection_space_P(int k);

enum class ProjectorKind { Monomial, Orthogonal, Hermite };
ProjectorKind projector_kind_from_string(const std::string& s);
std::string to_string(ProjectorKind kind);

// 1D polynomial on an edge, expressed in the mapped parameter s in [-1, 1].
struct EdgePolynomial {
  Poly1 poly;                     // monomial expansion in s
  int degree = 0;
  ProjectorKind kind = ProjectorKind::Monomial;
  int edge = -1;                  // owning edge, or -1 when edge-agnostic

  double eval_param(double t) const { return poly.eval(2.0 * t - 1.0); }
};

// degree+1 linearly independent polynomials of degree <= degree on [-1, 1].
// Orthogonal is the Legendre family; Hermite the probabilists' family
// normalized to unit L2([-1,1]) norm.
std::vector<EdgePolynomial> projector_basis(int edge, int degree, ProjectorKind kind);

struct QuadratureRule {
  std::vector<Vec2> nodes;       // 1D rules use node.x, node.y = 0
  std::vector<double> weights;
  int exactness = 0;
};

// Gauss-Legendre on [-1, 1], exact for polynomials up to `exactness`.
QuadratureRule edge_quadrature(int exactness);
// Collapsed tensor rule on the reference triangle (0,0)-(1,0)-(0,1).
QuadratureRule triangle_quadrature(int exactness);

}  // namespace polyhdiv
