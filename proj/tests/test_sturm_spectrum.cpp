#include <cmath>
#include <numbers>

#include <doctest.h>

#include "fixtures.hpp"
#include "vstab/errors.hpp"
#include "vstab/sturm_spectrum.hpp"

using namespace vstab;

namespace {

double sech2_well(double t) {
  const double c = std::cosh(t);
  return -2.0 / (c * c);
}

}  // namespace

TEST_CASE("empty box gives the lowest Dirichlet mode") {
  const double T = 3.0;
  const auto r = bottom_eigenvalue([](double) { return 0.0; }, T, 1000);
  const double exact = std::pow(std::numbers::pi / (2.0 * T), 2);
  CHECK(r.lambda_min == doctest::Approx(exact).epsilon(1e-8));
  CHECK(count_below([](double) { return 0.0; }, -1.0, T, 1000) == 0);
}

TEST_CASE("reflectionless well has its bound state at -1") {
  const auto r = bottom_eigenvalue(sech2_well, 30.0, 6000);
  CHECK(r.lambda_min == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(count_below(sech2_well, -0.5, 30.0, 6000) == 1);
  double norm = 0.0;
  for (double u : r.eigvec.values) norm += u * u;
  CHECK(norm * r.eigvec.dt == doctest::Approx(1.0).epsilon(1e-12));
  const auto v = sample_window(sech2_well, r.T, r.eigvec.size() - 1);
  CHECK(rayleigh_quotient(v, r.eigvec) == doctest::Approx(r.lambda_fd).epsilon(1e-9));
}

TEST_CASE("tridiagonal eigenvalues by bisection agree with the Sturm count") {
  const auto v = sample_window(sech2_well, 10.0, 800);
  const Tridiagonal t(v);
  const double e1 = t.eigenvalue(1), e2 = t.eigenvalue(2);
  CHECK(e1 < e2);
  CHECK(t.count_below(0.5 * (e1 + e2)) == 1);
  CHECK(t.count_below(e1 - 1e-6) == 0);
}

TEST_CASE("critical test functions give the exact quotient -1") {
  for (const auto& p : {test::baseline(), test::deep_well(100.0), test::reference_blend()}) {
    for (Critical d : {Critical::a, Critical::b}) {
      const double T = default_window(p);
      const std::size_t n = 40000;
      const auto f = critical_test_function(p, d, T, n);
      const auto v = critical_potential_grid(p, d, f.u.t0, f.u.dt, f.u.size());
      CHECK(rayleigh_quotient(v, f.u, f.du) == doctest::Approx(-1.0).epsilon(1e-6));
      CHECK(std::abs(critical_test_quotient(p, d, T) + 1.0) < 1e-12);
    }
  }
}

TEST_CASE("one eigenvalue below -1 at each critical value") {
  for (const auto& p : {test::baseline(), test::reference_blend()}) {
    const double T = default_window(p);
    const auto n = default_intervals(p, T);
    for (Critical d : {Critical::a, Critical::b}) {
      CHECK(count_below([&](double t) { return critical_potential(p, d, t); }, -1.0, T, n) == 1);
    }
  }
}

TEST_CASE("critical wavenumbers are ordered above one") {
  const auto cw = critical_wavenumbers(test::baseline());
  CHECK(cw.m_a > cw.m_b);
  CHECK(cw.m_b > 1.0);
  CHECK(cw.at_a.converged);
  const auto blend_cw = critical_wavenumbers(test::reference_blend());
  CHECK(blend_cw.m_b < 2.0);
  CHECK(blend_cw.m_a > 2.0);
  CHECK(blend_cw.m_a < 3.0);
}

TEST_CASE("an explicit window agrees with the default") {
  const auto p = test::baseline();
  const double T = default_window(p);
  const auto a = critical_wavenumbers(p);
  const auto b = critical_wavenumbers(p, T + 5.0);
  CHECK(b.m_a == doctest::Approx(a.m_a).epsilon(1e-6));
  CHECK_THROWS_AS(critical_wavenumbers(p, -1.0), ValidationError);
}

TEST_CASE("deep-well sweep reaches N = 4 and the cosine quotient keeps falling") {
  ProfileParams base;
  const auto sweep = sweep_deep_well(base, {1.0, 10.0, 100.0, 1000.0}, 4.0, false);
  CHECK(sweep.reached());
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    CHECK(sweep.rows[i].cosine_quotient < sweep.rows[i - 1].cosine_quotient);
    CHECK(sweep.rows[i].lambda_min <= sweep.rows[i].cosine_quotient + 1e-9);
  }
  const auto p = test::deep_well(sweep.B_star);
  CHECK(critical_wavenumbers(p).m_a >= 4.0);
}
