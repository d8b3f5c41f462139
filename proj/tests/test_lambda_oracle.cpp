#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "vstab/dispersion.hpp"
#include "vstab/errors.hpp"
#include "vstab/lambda_oracle.hpp"

using namespace vstab;

TEST_CASE("clustered nodes are increasing, hit the ends and crowd the clusters") {
  const std::vector<Cluster> clusters{{0.3, 0.01, 0.5}, {-1.0, 0.05, 0.3}};
  const auto x = clustered_nodes(-4.0, 6.0, 1000, clusters);
  REQUIRE(x.size() == 1001);
  CHECK(x.front() == -4.0);
  CHECK(x.back() == doctest::Approx(6.0).epsilon(1e-14));
  double near = 0.0, far = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    CHECK(x[i] > x[i - 1]);
    const double mid = 0.5 * (x[i] + x[i - 1]);
    if (std::abs(mid - 0.3) < 0.01) near = std::max(near, 1.0 / (x[i] - x[i - 1]));
    if (std::abs(mid - 4.0) < 0.5) far = std::max(far, 1.0 / (x[i] - x[i - 1]));
  }
  CHECK(near > 10.0 * far);
  CHECK_THROWS_AS(clustered_nodes(1.0, 0.0, 10, {}), ValidationError);
}

TEST_CASE("real matrix spectrum comes in conjugate pairs") {
  const auto p = test::reference_blend();
  std::vector<double> x;
  for (int i = 0; i <= 300; ++i) x.push_back(-8.0 + 20.0 * i / 300.0);
  auto ev = lambda_spectrum(p, 1.5, x);
  REQUIRE(ev.size() == x.size());
  for (const auto& z : ev) {
    const bool paired =
        std::any_of(ev.begin(), ev.end(), [&](Complex w) { return std::abs(w - std::conj(z)) < 1e-9; });
    CHECK(paired);
  }
}

TEST_CASE("oracle eigenvalue matches the shooting eigenvalue") {
  const auto p = test::reference_blend();
  const double m = 1.5;
  const auto o = lambda_oracle(p, m);
  CHECK(o.unstable_count == 1);
  const auto pair = find_eigenvalue(p, m, o.coarse);
  CHECK(std::abs(pair.mu - o.mu) < 1e-4);
  REQUIRE(o.raw.size() == 2);
  CHECK(std::abs(o.raw.back() - pair.mu) < std::abs(o.coarse - pair.mu));
}
