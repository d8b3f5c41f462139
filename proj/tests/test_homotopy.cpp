#include <cmath>
#include <numbers>

#include <doctest.h>

#include "fixtures.hpp"
#include "vstab/errors.hpp"
#include "vstab/homotopy.hpp"

using namespace vstab;

namespace {

GapCurves linear_curves(double N0, double N1, int samples) {
  GapCurves c;
  for (double th : uniform_theta_grid(samples)) c.insert({th, N0 + th * (N1 - N0), 1.01});
  return c;
}

}  // namespace

TEST_CASE("theta0 on a linear curve") {
  const double N0 = 1.6, N1 = 3.5;
  const auto c = linear_curves(N0, N1, 11);
  const auto x = find_theta0(c, 2, {}, 1e-9);
  CHECK(x.theta0 == doctest::Approx((2.0 - N0) / (N1 - N0)).epsilon(1e-6));
  const auto y = find_theta0(c, 3, [&](double th) { return N0 + th * (N1 - N0); });
  CHECK(y.theta0 == doctest::Approx((3.0 - N0) / (N1 - N0)).epsilon(1e-6));
}

TEST_CASE("theta0 needs a bracket") {
  const auto c = linear_curves(2.2, 3.5, 11);
  CHECK_THROWS_AS(find_theta0(c, 2), ValidationError);
  CHECK_THROWS_AS(find_theta0(c, 4), ValidationError);
}

TEST_CASE("theta0 picks the last crossing of a non-monotone curve") {
  GapCurves c;
  for (double th : uniform_theta_grid(21)) c.insert({th, 1.8 + std::sin(3.0 * std::numbers::pi * th) * 0.5 + th, 1.0});
  const auto x = find_theta0(c, 2);
  for (const auto& r : c.rows) {
    if (r.theta > x.theta0 + 1e-6) CHECK(r.N > 2.0);
  }
}

TEST_CASE("select_delta satisfies the gap chain and shrinks under refinement") {
  const double N0 = 1.6, N1 = 3.5;
  const int m = 2;
  const double theta0 = (m - N0) / (N1 - N0);
  auto row_at = [&](double th) { return GapRow{th, N0 + th * (N1 - N0), 1.01 + 0.01 * th}; };
  const auto d = select_delta(row_at, theta0, m, 0.02, 20, 3);
  CHECK(d.row.W < m - 0.02);
  CHECK(d.row.N > m + 0.02);
  CHECK(d.row.N < m + 1 - 0.02);
  for (std::size_t i = 1; i < d.by_level.size(); ++i) CHECK(d.by_level[i] <= d.by_level[i - 1]);
  CHECK_THROWS_AS(select_delta(row_at, theta0, m, 0.0), ValidationError);
}

TEST_CASE("wavenumber choice") {
  CHECK(choose_wavenumber(1.6, {}) == 2);
  CHECK(choose_wavenumber(0.5, {}) == 2);
  CHECK(choose_wavenumber(2.3, {}) == 3);
  CHECK(choose_wavenumber(2.3, 4) == 4);
  CHECK_THROWS_AS(choose_wavenumber(2.3, 2), ValidationError);
  CHECK_THROWS_AS(choose_wavenumber(0.5, 1), ValidationError);
}

TEST_CASE("gap curves on the baseline to deep-well family") {
  const auto p0 = test::baseline(), p1 = test::deep_well(100.0);
  const auto curves = gap_curves(p0, p1, {0.0, 0.5, 1.0});
  CHECK(curves.rows.front().N == doctest::Approx(critical_wavenumbers(blend(p0, p1, 0.0)).m_a).epsilon(1e-12));
  CHECK(curves.rows.front().N == doctest::Approx(critical_wavenumbers(p0).m_a).epsilon(1e-5));
  CHECK(curves.rows.back().N > 2.0);
  for (const auto& r : curves.rows) CHECK(r.W < r.N);
  CHECK(curves.N_interpolated(0.25) == doctest::Approx(0.5 * (curves.rows[0].N + curves.rows[1].N)));
}

TEST_CASE("blend family caches rows and validates members") {
  BlendFamily family(test::baseline(), test::deep_well(100.0));
  const auto a = family.row(0.3);
  const auto b = family.row(0.3);
  CHECK(a.N == b.N);
  CHECK(family.at(0.3).kind() == "blend");
}
