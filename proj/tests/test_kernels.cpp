#include <doctest.h>

#include "fixtures.hpp"
#include "vstab/homotopy.hpp"
#include "vstab/kernels.hpp"
#include "vstab/lambda_oracle.hpp"

using namespace vstab;

TEST_CASE("potential sampling: parallel equals serial") {
  const auto p = test::reference_blend();
  const Complex mu(0.4, 0.01);
  const auto a = kernels::sample_potential_serial(p, mu, -10.0, 1e-3, 20001);
  const auto b = kernels::sample_potential(p, mu, -10.0, 1e-3, 20001);
  REQUIRE(a.size() == b.size());
  CHECK(a.values == b.values);
}

TEST_CASE("batched matching: parallel equals serial") {
  const auto p = test::reference_blend();
  const auto c = coefficients(p);
  std::vector<Complex> mus;
  for (int k = 0; k < 8; ++k) mus.emplace_back(0.1 + 0.25 * k, 0.05);
  CHECK(kernels::matching_batch_serial(c, 2.0, mus) == kernels::matching_batch(c, 2.0, mus));
}

TEST_CASE("Lambda_m assembly: parallel equals serial") {
  const auto p = test::reference_blend();
  const auto x = clustered_nodes(-8.0, 12.0, 400, {{0.6, 0.01, 0.5}});
  const Eigen::MatrixXd a = kernels::lambda_matrix_serial(p, 2.0, x);
  const Eigen::MatrixXd b = kernels::lambda_matrix(p, 2.0, x);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gap curves: parallel equals serial") {
  const auto p0 = test::baseline(), p1 = test::deep_well(100.0);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto a = gap_curves_serial(p0, p1, grid), b = gap_curves(p0, p1, grid);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].N == b.rows[i].N);
    CHECK(a.rows[i].W == b.rows[i].W);
  }
}
