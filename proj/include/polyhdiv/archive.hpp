// Element archives: JSON metadata plus flat little-endian float64 matrix
// payloads. An archive restores the DOF layout, classification and the
// transfer/inverse pair; exact boundary traces are reconstructed from the
// spec without re-solving.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyhdiv/element.hpp"

namespace polyhdiv {

struct ElementArchive {
  ElementSpec spec;
  std::vector<Vec2> polygon_vertices;
  Eigen::MatrixXd transfer;
  Eigen::MatrixXd coeff;
  double condition = 0.0;
  double kronecker_defect = 0.0;  // as recorded at build time
  std::vector<std::string> classification;
  int n_normal = 0;
  int n_internal = 0;
  int count_normal = 0;
  int count_degenerate = 0;
  int count_internal = 0;
  int extra_constant_generators = 0;
  int gram_rank = 0;
  int series_reduced_dimension = 0;  // reduced setting only

  double recompute_kronecker_defect() const;
  // Exact vector trace of dual i on an edge, rebuilt from boundary data.
  Vec2 trace(int i, int edge, double t) const;
  double normal_trace(int i, int edge, double t) const;
  const Polygon& polygon() const;

private:
  mutable std::shared_ptr<const Polygon> poly_cache_;
  mutable std::shared_ptr<const GeneratorLayout> layout_cache_;
};

void write_element_archive(const NodalBasis& nb, const std::string& dir);
ElementArchive load_element_archive(const std::string& dir);

}  // namespace polyhdiv
