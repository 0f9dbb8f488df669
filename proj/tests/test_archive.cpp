#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "polyhdiv/archive.hpp"
#include "test_support.hpp"

using namespace polyhdiv;
using namespace polyhdiv::testing;

TEST_CASE("archive round trip") {
  const Polygon p = ninegon();
  ElementSpec spec = coarse(ElementSpec::general(1), p);
  const NodalBasis nb = build_element(p, spec);

  const std::string dir =
      (std::filesystem::temp_directory_path() / "polyhdiv_archive_test").string();
  write_element_archive(nb, dir);
  const ElementArchive ar = load_element_archive(dir);

  CHECK(ar.spec.k == 1);
  CHECK(ar.spec.setting == Setting::General);
  CHECK(ar.transfer.rows() == nb.size());
  CHECK((ar.transfer - nb.transfer.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ar.coeff - nb.coeff).cwiseAbs().maxCoeff() == 0.0);

  // the reloaded Kronecker defect matches the recorded one
  CHECK(std::abs(ar.recompute_kronecker_defect() - ar.kronecker_defect) <= 1e-14);
  CHECK(ar.kronecker_defect == nb.kronecker_defect);

  // classification counts
  CHECK(ar.count_degenerate == 18);
  CHECK(ar.count_internal == 3);
  CHECK(ar.count_normal == nb.size() - 21);

  // exact traces are reconstructed bit-for-bit from the boundary data
  for (int i : {0, 5, 20}) {
    for (double t : {0.25, 0.75}) {
      const Vec2 a = ar.trace(i, 3, t);
      const Vec2 b = nb.trace(i, 3, t);
      CHECK(a.x == doctest::Approx(b.x).epsilon(1e-14));
      CHECK(a.y == doctest::Approx(b.y).epsilon(1e-14));
    }
  }
}

TEST_CASE("reduced archives record the dimension bookkeeping") {
  const Polygon p = ninegon();
  const NodalBasis nb = build_element(p, coarse(ElementSpec::reduced(1), p));
  const std::string dir =
      (std::filesystem::temp_directory_path() / "polyhdiv_archive_reduced").string();
  write_element_archive(nb, dir);
  const ElementArchive ar = load_element_archive(dir);
  CHECK(ar.extra_constant_generators == 2);
  CHECK(ar.series_reduced_dimension == 17);
  CHECK(ar.gram_rank == 23);
}

TEST_CASE("loading a missing archive fails cleanly") {
  CHECK_THROWS_AS(load_element_archive("/nonexistent/archive"), UsageError);
}
