#include "vstab/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "vstab/errors.hpp"

namespace vstab {

Quintic Quintic::hermite(const Jet2& left, const Jet2& right, double h) {
  const double d0 = right.value - left.value - left.slope * h - 0.5 * left.curvature * h * h;
  const double d1 = right.slope - left.slope - left.curvature * h;
  const double d2 = right.curvature - left.curvature;
  const double h2 = h * h, h3 = h2 * h;
  std::array<double, 6> c{};
  c[0] = left.value;
  c[1] = left.slope;
  c[2] = 0.5 * left.curvature;
  c[3] = (10.0 * d0 - 4.0 * d1 * h + 0.5 * d2 * h2) / h3;
  c[4] = (-15.0 * d0 + 7.0 * d1 * h - d2 * h2) / (h3 * h);
  c[5] = (6.0 * d0 - 3.0 * d1 * h + 0.5 * d2 * h2) / (h3 * h2);
  return Quintic(c);
}

double Quintic::operator()(double x) const {
  double r = c_[5];
  for (int k = 4; k >= 0; --k) r = r * x + c_[k];
  return r;
}

double Quintic::derivative(double x, int order) const {
  double r = 0.0;
  for (int k = 5; k >= order; --k) {
    double f = 1.0;
    for (int j = 0; j < order; ++j) f *= static_cast<double>(k - j);
    r = r * x + f * c_[k];
  }
  return r;
}

double Quintic::integral(double x) const {
  double r = 0.0;
  for (int k = 5; k >= 0; --k) r = r * x + c_[k] / static_cast<double>(k + 1);
  return r * x;
}

double Quintic::exp_weighted_integral(double rate, double x) const {
  // int_0^x e^{r y} p(y) dy = [e^{r y} Q(y)]_0^x with Q = sum_j (-1)^j p^{(j)} / r^{j+1}
  auto q = [&](double y) {
    double s = 0.0, sign = 1.0, rp = rate;
    for (int j = 0; j <= 5; ++j) {
      s += sign * derivative(y, j) / rp;
      sign = -sign;
      rp *= rate;
    }
    return s;
  };
  const double z = rate * x;
  if (std::abs(z) <= 8.0) {
    // int_0^x y^k e^{ry} dy = x^{k+1} sum_n z^n / (n! (k+n+1)); the closed form cancels badly
    // on short segments where the Hermite coefficients are large
    double s = 0.0, xk = x;
    for (int k = 0; k <= 5; ++k) {
      double term = 0.0, zn = 1.0;
      for (int n = 0; n < 80; ++n) {
        const double add = zn / static_cast<double>(k + n + 1);
        term += add;
        if (n > 2 * std::abs(z) && std::abs(add) < 1e-18 * std::abs(term)) break;
        zn *= z / static_cast<double>(n + 1);
      }
      s += c_[k] * xk * term;
      xk *= x;
    }
    return s;
  }
  return std::exp(rate * x) * q(x) - q(0.0);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  // the Kronrod error estimate is meaningless on intervals near rounding scale
  if (std::abs(b - a) < 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
    return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
  }
  double err = 0.0;
  const double r =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &err);
  if (!std::isfinite(r) || err > 1e3 * tol * std::max(1.0, std::abs(r))) {
    throw NumericalError("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "], error estimate " + std::to_string(err));
  }
  return r;
}

namespace {
template <typename T>
T simpson_impl(std::span<const T> y, double dt) {
  const std::size_t n = y.size();
  if (n < 3 || n % 2 == 0) {
    T s{};
    if (n < 2) return s;
    for (std::size_t i = 1; i + 1 < n; ++i) s += y[i];
    return (s + 0.5 * (y.front() + y.back())) * dt;
  }
  T s = y.front() + y.back();
  for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * y[i];
  return s * (dt / 3.0);
}
template <typename T>
T trapezoid_impl(std::span<const T> y, double dt) {
  if (y.size() < 2) return T{};
  T s{};
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return (s + 0.5 * (y.front() + y.back())) * dt;
}
}  // namespace

double simpson(std::span<const double> y, double dt) { return simpson_impl(y, dt); }
Complex simpson(std::span<const Complex> y, double dt) { return simpson_impl(y, dt); }
double trapezoid(std::span<const double> y, double dt) { return trapezoid_impl(y, dt); }
Complex trapezoid(std::span<const Complex> y, double dt) { return trapezoid_impl(y, dt); }

double fit_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace vstab
