#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "vstab/errors.hpp"
#include "vstab/greens_kernel.hpp"
#include "vstab/numerics.hpp"

using namespace vstab;

namespace {

double bump(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

}  // namespace

TEST_CASE("zero input gives zero output") {
  const auto f = RealGrid::sample_window([](double) { return 0.0; }, 5.0, 100);
  const auto r = apply_K(2.0, f);
  for (double v : r.output.values) CHECK(v == 0.0);
  CHECK(second_order_residual(2.0, r.output, f) == 0.0);
}

TEST_CASE("constant input with constant tails gives 1/m^2") {
  const double m = 1.5;
  const auto f = RealGrid::sample_window([](double) { return 1.0; }, 20.0, 4000);
  const auto r = apply_K(m, f, {0.0, 0.0});
  CHECK(r.output.values[2000] == doctest::Approx(1.0 / (m * m)).epsilon(1e-12));
  CHECK_THROWS_AS(apply_K(m, f), ValidationError);
}

TEST_CASE("gaussian input agrees with direct quadrature of the convolution") {
  const double m = 2.0;
  const auto f = RealGrid::sample_window([](double t) { return std::exp(-t * t); }, 10.0, 20000);
  const auto r = apply_K(m, f, {});
  const double ref = 0.25 * integrate([](double e) { return std::exp(-2.0 * std::abs(e) - e * e); }, -10.0, 0.0) +
                     0.25 * integrate([](double e) { return std::exp(-2.0 * std::abs(e) - e * e); }, 0.0, 10.0);
  CHECK(r.output.values[10000] == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("residual of a closed-form pair is small at dt = 1e-3") {
  const double m = 3.0;
  const auto psi = RealGrid::sample_window([](double t) { return std::exp(-t * t); }, 6.0, 12000);
  const auto f = RealGrid::sample_window(
      [&](double t) { return -(4.0 * t * t - 2.0) * std::exp(-t * t) + m * m * std::exp(-t * t); }, 6.0, 12000);
  double fmax = 0.0;
  for (double v : f.values) fmax = std::max(fmax, std::abs(v));
  // the centered difference alone leaves h^2 psi''''(0) / 12 = 1e-6 in absolute terms
  CHECK(second_order_residual(m, psi, f) / fmax < 1e-6);
}

TEST_CASE("apply_K is fourth order before differencing") {
  const double m = 2.0;
  auto f_of = [](double t) { return bump(t / 2.0) * (1.0 + 0.5 * std::sin(3.0 * t)); };
  // compare against a four-times finer grid at common nodes
  const auto fine = apply_K(m, RealGrid::sample_window(f_of, 4.0, 16000)).output;
  std::vector<double> err;
  for (std::size_t n : {1000, 2000}) {
    const auto psi = apply_K(m, RealGrid::sample_window(f_of, 4.0, n)).output;
    const std::size_t stride = 16000 / n;
    double e = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) e = std::max(e, std::abs(psi[i] - fine[i * stride]));
    err.push_back(e);
  }
  CHECK(std::log2(err[0] / err[1]) > 3.8);
}

TEST_CASE("apply_K residual converges at second order") {
  const double m = 2.0;
  auto f_of = [](double t) { return bump(t / 2.0) * (1.0 + 0.5 * std::sin(3.0 * t)); };
  std::vector<double> res;
  for (std::size_t n : {1000, 2000, 4000}) {
    const auto f = RealGrid::sample_window(f_of, 4.0, n);
    res.push_back(second_order_residual(m, apply_K(m, f).output, f));
  }
  CHECK(std::log2(res[0] / res[1]) > 1.9);
  CHECK(std::log2(res[1] / res[2]) > 1.9);
}

TEST_CASE("kernel matrix reproduces apply_K on uniform nodes") {
  const double m = 1.7;
  const auto f = RealGrid::sample_window([](double t) { return bump(t); }, 2.0, 80);
  std::vector<double> nodes;
  for (std::size_t i = 0; i < f.size(); ++i) nodes.push_back(f.t(i));
  const auto K = kernel_matrix(m, nodes);
  const Eigen::Map<const Eigen::VectorXd> fv(f.values.data(), static_cast<Eigen::Index>(f.size()));
  const double c = f.dt * f.dt / 12.0;
  const Eigen::MatrixXd corrected =
      (1.0 - c * m * m) * K + c * Eigen::MatrixXd::Identity(K.rows(), K.cols());
  const auto inner = corrected.block(1, 1, corrected.rows() - 2, corrected.cols() - 2);
  CHECK((inner - inner.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::VectorXd psi = corrected * fv;
  const auto r = apply_K(m, f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(psi[static_cast<Eigen::Index>(i)] == doctest::Approx(r.output[i]).epsilon(1e-12));
  CHECK_THROWS_AS(kernel_matrix(m, {0.0, 1.0, 0.5}), ValidationError);
}

TEST_CASE("potential limits") {
  const auto p = test::reference_blend();
  const auto& par = p.params();
  const double t_left = par.logM1 - 1.0;
  CHECK(potential_value(p, p.Omega_minus_inf(), t_left).real() == doctest::Approx(8.0).epsilon(1e-10));
  const double alpha = par.alpha;
  CHECK(potential_value(p, 0.0, 40.0).real() == doctest::Approx(-alpha * (2.0 - alpha)).epsilon(1e-6));
  const double a = critical_point(p, Critical::a);
  const double at_a = critical_potential(p, Critical::a, a);
  CHECK(at_a == doctest::Approx(p.A_derivative(a, 1) / p.Omega_prime(a)).epsilon(1e-10));
  CHECK(at_a < 0.0);
  CHECK(critical_potential(p, Critical::a, a + 1e-6) == doctest::Approx(at_a).epsilon(1e-4));
}

TEST_CASE("real potential inside the range of Omega is rejected away from the critical values") {
  const auto p = test::reference_blend();
  CHECK_THROWS_AS(potential_v(p, 0.5 * p.Omega_minus_inf(), -5.0, 0.01, 100), ValidationError);
  CHECK_NOTHROW(potential_v(p, -0.1, -5.0, 0.01, 100));
}
