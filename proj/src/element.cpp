#include "polyhdiv/element.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "polyhdiv/parallel.hpp"

namespace polyhdiv {

std::string to_string(DualClass c) {
  switch (c) {
    case DualClass::Normal: return "normal";
    case DualClass::Internal: return "internal";
    case DualClass::DegenerateNormal: return "degenerate-normal";
  }
  return "?";
}

TransferMatrix assemble_transfer_matrix(const SpaceBasis& space, const DofSet& dofs) {
  const Polygon& poly = space.mesh->polygon();
  const int n_gen = static_cast<int>(space.generators.size());
  const int n_dof = dofs.size();
  if (n_gen != n_dof) {
    throw UnisolvenceError("DOF count " + std::to_string(n_dof) +
                           " does not match generator count " + std::to_string(n_gen));
  }

  TransferMatrix tm;
  tm.n_normal = static_cast<int>(dofs.normal.size());
  tm.n_internal = static_cast<int>(dofs.internal.size());
  tm.n_boundary_gens = space.n_boundary_generators;
  tm.matrix = Eigen::MatrixXd::Zero(n_dof, n_gen);

  // Normal moments act on exact boundary traces: only the generators whose
  // data lives on the DOF's edge contribute.
  for (int j = 0; j < poly.n_faces(); ++j) {
    for (int a = 0; a < dofs.per_edge; ++a) {
      const int row = dofs.edge_offset[j] + a;
      const Dof& dof = dofs.normal[row];
      for (int b = 0; b < space.per_edge; ++b) {
        const int col = space.edge_offset[j] + b;
        tm.matrix(row, col) =
            eval_dof(dof, dof_field_from_generator(space.generators[col], poly), poly,
                     space.solver.get());
      }
    }
  }

  // Internal moments: one fused pass over the composite quadrature.
  if (tm.n_internal > 0) {
    const PoissonSolver& solver = *space.solver;
    const int ntris = static_cast<int>(solver.mesh().triangles().size());
    const int nq = solver.quad_size();
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(tm.n_internal, n_gen);
    std::vector<Vec2> vals(n_gen);
    for (int t = 0; t < ntris; ++t) {
      for (int q = 0; q < nq; ++q) {
        const double w = solver.quad_weight(t, q);
        const Vec2 x = solver.quad_point(t, q);
        for (int g = 0; g < n_gen; ++g) vals[g] = space.generators[g].value_at_quad(t, q);
        for (int i = 0; i < tm.n_internal; ++i) {
          const Vec2 kv = dofs.internal[i].internal_kernel.eval(x);
          for (int g = 0; g < n_gen; ++g) {
            block(i, g) += w * vals[g].dot(kv);
          }
        }
      }
    }
    tm.matrix.bottomRows(tm.n_internal) = block;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(tm.matrix);
  const auto& sv = svd.singularValues();
  tm.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                         : std::numeric_limits<double>::infinity();
  return tm;
}

NodalBasis build_nodal_basis(std::shared_ptr<const SpaceBasis> space, const DofSet& dofs,
                             double tol_zero) {
  NodalBasis nb;
  nb.space = std::move(space);
  nb.dofs = dofs;
  nb.transfer = assemble_transfer_matrix(*nb.space, dofs);
  nb.condition = nb.transfer.condition;
  nb.tol_zero = tol_zero;
  if (!(nb.condition < 1e12)) {
    throw UnisolvenceError("transfer matrix numerically singular (condition " +
                           std::to_string(nb.condition) + ")");
  }

  const int n = dofs.size();
  const int nn = nb.transfer.n_normal;
  const int ni = nb.transfer.n_internal;
  const int nb_gen = nb.transfer.n_boundary_gens;
  const Eigen::MatrixXd& T = nb.transfer.matrix;

  // T = [D 0; C M] with D block-diagonal per edge. Invert block-wise so the
  // structural zeros stay exact.
  Eigen::MatrixXd Dinv = Eigen::MatrixXd::Zero(nb_gen, nn);
  const Polygon& poly = nb.space->mesh->polygon();
  for (int j = 0; j < poly.n_faces(); ++j) {
    const int r0 = dofs.edge_offset[j];
    const int c0 = nb.space->edge_offset[j];
    const int m = dofs.per_edge;
    const Eigen::MatrixXd block = T.block(r0, c0, m, m);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
    if (qr.rank() < m) {
      throw UnisolvenceError("edge block " + std::to_string(j) + " is singular");
    }
    Dinv.block(c0, r0, m, m) = qr.inverse();
  }

  nb.coeff = Eigen::MatrixXd::Zero(n, n);
  nb.coeff.topLeftCorner(nb_gen, nn) = Dinv;
  if (ni > 0) {
    const Eigen::MatrixXd C = T.bottomLeftCorner(ni, nb_gen);
    const Eigen::MatrixXd M = T.bottomRightCorner(ni, n - nb_gen);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    if (qr.rank() < ni) {
      throw UnisolvenceError("internal moment block is singular");
    }
    const Eigen::MatrixXd Minv = qr.inverse();
    nb.coeff.bottomRightCorner(n - nb_gen, ni) = Minv;
    nb.coeff.bottomLeftCorner(n - nb_gen, nn) = -Minv * C * Dinv;
  }

  nb.kronecker_defect = (T * nb.coeff - Eigen::MatrixXd::Identity(n, n))
                            .cwiseAbs()
                            .maxCoeff();

  classify(nb, tol_zero);
  return nb;
}

Vec2 NodalBasis::eval(int i, const Vec2& p) const {
  Vec2 acc{0.0, 0.0};
  for (int g = 0; g < coeff.rows(); ++g) {
    const double c = coeff(g, i);
    if (c != 0.0) acc = acc + space->generators[g].value(p) * c;
  }
  return acc;
}

Vec2 NodalBasis::trace(int i, int edge, double t) const {
  const Edge& e = space->mesh->polygon().edge(edge);
  Vec2 acc{0.0, 0.0};
  // Only the boundary generators of this edge have nonzero data there.
  for (int b = 0; b < space->per_edge; ++b) {
    const int g = space->edge_offset[edge] + b;
    const double c = coeff(g, i);
    if (c != 0.0) acc = acc + space->generators[g].trace(e, edge, t) * c;
  }
  return acc;
}

double NodalBasis::normal_trace(int i, int edge, double t) const {
  return trace(i, edge, t).dot(space->mesh->polygon().edge(edge).normal);
}

double NodalBasis::divergence_at_quad(int i, int tri, int q) const {
  double acc = 0.0;
  for (int g = 0; g < coeff.rows(); ++g) {
    const double c = coeff(g, i);
    if (c != 0.0) acc += c * space->generators[g].divergence_at_quad(tri, q);
  }
  return acc;
}

DofField NodalBasis::as_dof_field(int i) const {
  DofField f;
  f.edge_value = [this, i](int edge, double t) { return trace(i, edge, t); };
  f.value = [this, i](const Vec2& p) { return eval(i, p); };
  f.value_at_quad = [this, i](int tri, int q) {
    Vec2 acc{0.0, 0.0};
    for (int g = 0; g < coeff.rows(); ++g) {
      const double c = coeff(g, i);
      if (c != 0.0) acc = acc + space->generators[g].value_at_quad(tri, q) * c;
    }
    return acc;
  };
  return f;
}

void classify(NodalBasis& nb, double tol_zero) {
  const Polygon& poly = nb.space->mesh->polygon();
  const int n = nb.size();
  const int nn = nb.transfer.n_normal;
  nb.tol_zero = tol_zero;
  nb.classification.assign(n, DualClass::Internal);
  nb.trace_scale.assign(n, 0.0);

  const QuadratureRule rule = edge_quadrature(2 * std::max(1, nb.dofs.spec.l2 + 2) + 5);
  for (int i = 0; i < n; ++i) {
    double scale = 0.0;
    for (int j = 0; j < poly.n_faces(); ++j) {
      for (const Vec2& node : rule.nodes) {
        const double t = 0.5 * (node.x + 1.0);
        scale = std::max(scale, std::abs(nb.normal_trace(i, j, t)));
      }
    }
    nb.trace_scale[i] = scale;
  }
  double global = 0.0;
  for (int i = 0; i < nn; ++i) global = std::max(global, nb.trace_scale[i]);
  for (int i = 0; i < nn; ++i) {
    nb.classification[i] = nb.trace_scale[i] <= tol_zero * global
                               ? DualClass::DegenerateNormal
                               : DualClass::Normal;
  }
}

int NodalBasis::degenerate_count_on_edge(int edge) const {
  int count = 0;
  for (int a = 0; a < dofs.per_edge; ++a) {
    const int i = dofs.edge_offset[edge] + a;
    if (classification[i] == DualClass::DegenerateNormal) ++count;
  }
  return count;
}

double NodalBasis::interior_l2_norm(int i) const {
  const PoissonSolver& solver = *space->solver;
  const int ntris = static_cast<int>(solver.mesh().triangles().size());
  double acc = 0.0;
  for (int t = 0; t < ntris; ++t) {
    for (int q = 0; q < solver.quad_size(); ++q) {
      Vec2 v{0.0, 0.0};
      for (int g = 0; g < coeff.rows(); ++g) {
        const double c = coeff(g, i);
        if (c != 0.0) v = v + space->generators[g].value_at_quad(t, q) * c;
      }
      acc += solver.quad_weight(t, q) * v.dot(v);
    }
  }
  return std::sqrt(acc);
}

}  // namespace polyhdiv
