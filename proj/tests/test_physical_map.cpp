#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "vstab/errors.hpp"
#include "vstab/numerics.hpp"
#include "vstab/physical_map.hpp"

using namespace vstab;

namespace {

struct ModeFixture {
  Profile p = test::reference_blend();
  ComplexEigenpair pair = find_eigenvalue(p, 2.0, {0.5493, 0.00047});
  PhysicalEigenmode mode = eigenmode_to_physical(pair, p);
};

const ModeFixture& mode_fixture() {
  static const ModeFixture f;
  return f;
}

}  // namespace

TEST_CASE("radial profiles follow the tail formulas") {
  const auto p = test::reference_blend();
  const auto& par = p.params();
  std::vector<double> s;
  for (double t = par.logM1 - 2.0; t <= par.logM + 3.0; t += 0.01) s.push_back(std::exp(t));
  const auto r = radial_profiles(p, s);
  const auto check = check_radial_tails(p, r);
  CHECK(check.right_points > 10);
  CHECK(check.left_points > 10);
  CHECK(check.right_B_error < 1e-6);
  CHECK(check.C_fit == doctest::Approx(p.tail_constant()).epsilon(1e-6));
  CHECK(check.left_G_error < 1e-10);
  CHECK(check.round_trip_error < 1e-5);
  CHECK_THROWS_AS(radial_profiles(p, {1.0, -1.0}), ValidationError);
}

TEST_CASE("zero vorticity gives zero stream function") {
  const ComplexGrid g(0.1, 0.01, 200);
  const auto sf = stream_from_vorticity(2, g);
  for (const auto& v : sf.psi.values) CHECK(v == Complex{});
}

TEST_CASE("power-law vorticity tail gives the far-field stream function") {
  const int m = 2;
  const double alpha = 1.0, k = m + alpha + 2.0;
  auto g_of = [&](double s) { return std::pow(s, -k) * -std::expm1(-std::pow(s, 6)); };
  const double s0 = 1e-3, S = 60.0, ds = 1e-3;
  const auto n = static_cast<std::size_t>(std::round((S - s0) / ds)) + 1;
  ComplexGrid g(s0, ds, n);
  for (std::size_t i = 0; i < n; ++i) g[i] = g_of(g.t(i));
  const auto sf = stream_from_vorticity(m, g, {1.0, -k});
  auto moment_integrand = [&](double s) { return g_of(s) * std::pow(s, 1.0 + m); };
  const double I = integrate(moment_integrand, 0.0, 1.0) + integrate(moment_integrand, 1.0, 10.0) +
                   integrate(moment_integrand, 10.0, 1e4) + std::pow(1e4, m + 2 - k) / (k - m - 2);
  for (double s : {20.0, 40.0}) {
    const auto i = static_cast<std::size_t>(std::round((s - s0) / ds));
    const double far = -std::pow(g.t(i), -m) * I / (2.0 * m);
    CHECK(std::abs(sf.psi[i] - far) < 5.0 * std::pow(g.t(i), -alpha) * std::abs(far));
  }
}

TEST_CASE("stream function of random compact vorticity solves the radial Laplacian") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const double c = 1.0 + u(rng), w = 0.3 + 0.4 * u(rng), amp = 2.0 * u(rng) - 1.0;
    auto g_of = [&](double s) {
      const double x = (s - c) / w;
      return std::abs(x) < 1.0 ? amp * std::exp(-1.0 / (1.0 - x * x)) : 0.0;
    };
    const double ds = 1e-3;
    ComplexGrid g(0.05, ds, 3000);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = Complex(g_of(g.t(i)), 0.5 * g_of(g.t(i)));
    for (int m : {1, 3}) {
      const auto sf = stream_from_vorticity(m, g);
      CHECK(radial_laplacian_residual(m, sf.psi, g) < 1e-6);
    }
  }
}

TEST_CASE("eigenmode in physical variables") {
  const auto& f = mode_fixture();
  const auto& mode = f.mode;
  CHECK(mode.decay_fit == doctest::Approx(-(2.0 + 2.0 + f.p.params().alpha)).epsilon(0.1 / 5.0));
  CHECK(mode.moment_residual < 0.02);
  CHECK_FALSE(mode.degenerate);
  CHECK(std::abs(mode.lambda - Complex(0.0, -2.0) * f.pair.mu) < 1e-14);
  CHECK(mode.lambda.real() > 0.0);
  CHECK(mode.stream_residual < 1e-3);
}

TEST_CASE("velocity field satisfies div w = 0 and curl w = g on the annulus") {
  const auto& f = mode_fixture();
  const auto grid = default_annulus(f.p, 256);
  const auto field = perturbation_velocity(f.mode, grid);
  const auto r = velocity_residuals(f.mode, field);
  CHECK(r.points > 1000);
  CHECK(r.divergence < 1e-4);
  CHECK(r.curl < 1e-4);
}

TEST_CASE("zero mode gives zero velocity") {
  auto mode = mode_fixture().mode;
  for (auto* grid : {&mode.g, &mode.dg, &mode.psi_s, &mode.inner, &mode.outer}) {
    for (auto& v : grid->values) v = Complex{};
  }
  const auto field = perturbation_velocity(mode, default_annulus(mode_fixture().p, 64));
  for (const auto& v : field.wx) CHECK(v == Complex{});
  for (const auto& v : field.wy) CHECK(v == Complex{});
}

TEST_CASE("annulus below the mode's smallest radius is rejected") {
  const auto& f = mode_fixture();
  AnnulusGrid grid;
  grid.r_in = 0.5 * f.mode.r_min();
  grid.r_out = 2.0 * f.mode.r_min();
  CHECK_THROWS_AS(perturbation_velocity(f.mode, grid), ValidationError);
}
