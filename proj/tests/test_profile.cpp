#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "vstab/errors.hpp"
#include "vstab/profile_io.hpp"

using namespace vstab;

TEST_CASE("baseline passes every class check") {
  const auto p = test::baseline();
  const auto report = validate_class_C(p);
  INFO(report.summary());
  CHECK(report.all_passed());
  CHECK(p.Omega_minus_inf() > 0.0);
}

TEST_CASE("deep wells pass every class check") {
  for (double B : {10.0, 100.0, 1000.0}) {
    const auto report = validate_class_C(test::deep_well(B));
    INFO("B = " << B << "\n" << report.summary());
    CHECK(report.all_passed());
  }
}

TEST_CASE("closed-form tails") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    for (double B : {0.0, 100.0}) {
      const auto p = test::deep_well(B, alpha);
      const auto& par = p.params();
      const double c0 = p.c0();
      for (double t : {par.logM1 - 2.0, par.logM1 - 0.5, par.logM1}) {
        CHECK(p.A(t) == doctest::Approx(-8.0 * c0 * std::exp(2.0 * t)).epsilon(1e-12));
        CHECK(p.Omega(t) == doctest::Approx(p.Omega_minus_inf() - c0 * std::exp(2.0 * t)).epsilon(1e-12));
      }
      for (double t : {par.logM, par.logM + 1.0, par.logM + 7.0}) {
        CHECK(p.A(t) == doctest::Approx(-alpha * std::exp(-alpha * t)).epsilon(1e-12));
        CHECK(p.G(t) == doctest::Approx(std::exp(-alpha * t)).epsilon(1e-12));
        const double omega = p.tail_constant() * alpha * std::exp(-2.0 * t) + std::exp(-alpha * t) / (2.0 - alpha);
        CHECK(p.Omega(t) == doctest::Approx(omega).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("Omega, its derivatives and A are consistent") {
  const auto p = test::reference_blend();
  const double h = 1e-4;
  for (double t : {-2.0, -0.3, 0.4, 0.9, 2.0}) {
    const double fd1 = (p.Omega(t + h) - p.Omega(t - h)) / (2 * h);
    const double fd2 = (p.Omega(t + h) - 2 * p.Omega(t) + p.Omega(t - h)) / (h * h);
    CHECK(p.Omega_prime(t) == doctest::Approx(fd1).epsilon(1e-7));
    CHECK(p.Omega_second(t) == doctest::Approx(fd2).epsilon(1e-4));
    CHECK(p.A(t) == doctest::Approx(p.Omega_second(t) + 2.0 * p.Omega_prime(t)).epsilon(1e-12));
    CHECK(p.G(t) == doctest::Approx(2.0 * p.Omega(t) + p.Omega_prime(t)).epsilon(1e-10));
  }
}

TEST_CASE("blend endpoints and the shared right tail") {
  const auto p0 = test::baseline(), p1 = test::deep_well(100.0);
  const auto b0 = blend(p0, p1, 0.0), b1 = blend(p0, p1, 1.0), half = blend(p0, p1, 0.5);
  for (double t = -5.0; t <= 6.0; t += 0.37) {
    CHECK(b0.A(t) == doctest::Approx(p0.A(t)).epsilon(1e-14));
    CHECK(b1.A(t) == doctest::Approx(p1.A(t)).epsilon(1e-14));
  }
  const double t = half.params().logM;
  CHECK(half.A(t) == doctest::Approx(-std::exp(-t)).epsilon(1e-13));
  CHECK_THROWS_AS(blend(p0, p1, 1.5), ValidationError);
}

TEST_CASE("parameter validation") {
  ProfileParams p;
  p.alpha = 2.5;
  CHECK_THROWS_WITH_AS(build_deep_well(p), doctest::Contains("(0, 2)"), ValidationError);
  p = {};
  p.a = 2.0;
  CHECK_THROWS_AS(build_deep_well(p), ValidationError);
  p = {};
  p.B = -1.0;
  CHECK_THROWS_AS(build_deep_well(p), ValidationError);
}

TEST_CASE("extra zeros of A fail the zero count") {
  const auto p = test::baseline();
  auto knots = p.terms().front().a.interior_knots();
  const auto& par = p.params();
  const double t_bump = 0.5 * (par.b + par.logM);
  std::erase_if(knots, [&](const HermiteKnot& k) { return std::abs(k.t - t_bump) < 0.3; });
  knots.push_back({t_bump, {0.05, 0.0, 0.0}});
  std::sort(knots.begin(), knots.end(), [](const auto& x, const auto& y) { return x.t < y.t; });
  const auto edited = Profile::from_knots(par, knots);
  const auto report = validate_class_C(edited);
  REQUIRE(report.find("A_two_simple_zeros"));
  CHECK_FALSE(report.find("A_two_simple_zeros")->passed);
}

TEST_CASE("nonpositive left amplitude fails the left-tail check") {
  const auto p = test::baseline();
  ProfileParams par = p.params();
  par.c0 = -1.0;
  const auto edited = Profile::from_knots(par, p.terms().front().a.interior_knots());
  const auto report = validate_class_C(edited);
  REQUIRE(report.find("left_tail_amplitude"));
  CHECK_FALSE(report.find("left_tail_amplitude")->passed);
}

TEST_CASE("profile documents round-trip") {
  const auto p = test::reference_blend();
  const auto q = profile_from_json(profile_to_json(p));
  for (double t = -6.0; t <= 8.0; t += 0.41) {
    CHECK(q.A(t) == p.A(t));
    CHECK(q.Omega(t) == doctest::Approx(p.Omega(t)).epsilon(1e-14));
  }
  auto j = profile_to_json(p);
  j["omega_minus_inf"] = 1.0;
  CHECK_THROWS_AS(profile_from_json(j), ValidationError);
  CHECK_THROWS_AS(profile_from_json(nlohmann::json::object()), ValidationError);
  CHECK_THROWS_AS(params_from_json({{"alpha", 1.0}, {"beta", 2.0}}), ValidationError);
}
