#pragma once

#include <array>
#include <functional>
#include <span>

#include "vstab/grid_function.hpp"

namespace vstab {

/// Value, first and second derivative of a function at a point.
struct Jet2 {
  double value = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
};

/// Polynomial of degree <= 5 in the local variable x = t - origin.
class Quintic {
 public:
  Quintic() = default;
  explicit Quintic(const std::array<double, 6>& coeffs) : c_(coeffs) {}

  /// Hermite interpolant on [0, h] matching value/slope/curvature at both ends.
  static Quintic hermite(const Jet2& left, const Jet2& right, double h);

  double operator()(double x) const;
  double derivative(double x, int order) const;
  /// Integral of p over [0, x].
  double integral(double x) const;
  /// Integral of exp(rate*y) p(y) over [0, x].
  double exp_weighted_integral(double rate, double x) const;

  const std::array<double, 6>& coeffs() const { return c_; }

 private:
  std::array<double, 6> c_{};
};

/// Adaptive Gauss-Kronrod on [a, b]; throws NumericalError when the error estimate
/// stays above tol * max(1, |result|).
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-11);

/// Composite Simpson on samples (odd count); trapezoid fallback for even count.
double simpson(std::span<const double> y, double dt);
Complex simpson(std::span<const Complex> y, double dt);
double trapezoid(std::span<const double> y, double dt);
Complex trapezoid(std::span<const Complex> y, double dt);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace vstab
