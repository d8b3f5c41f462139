#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vstab {

using Complex = std::complex<double>;

/// Samples of a function on the uniform grid t_i = t0 + i*dt, i = 0..size()-1.
template <typename V>
struct GridFunction {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<V> values;

  GridFunction() = default;
  GridFunction(double start, double spacing, std::size_t n, V fill = V{})
      : t0(start), dt(spacing), values(n, fill) {
    if (!(spacing > 0.0)) throw std::invalid_argument("GridFunction: spacing must be positive");
  }

  std::size_t size() const { return values.size(); }
  double t(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double t_end() const { return t(size() - 1); }
  V& operator[](std::size_t i) { return values[i]; }
  const V& operator[](std::size_t i) const { return values[i]; }
  std::span<const V> span() const { return values; }

  /// Linear interpolation; zero outside the window.
  V interpolate(double t) const {
    if (values.empty()) return V{};
    const double x = (t - t0) / dt;
    if (x < 0.0 || x > static_cast<double>(size() - 1)) return V{};
    auto i = static_cast<std::size_t>(x);
    if (i >= size() - 1) return values.back();
    const double w = x - static_cast<double>(i);
    return values[i] * (1.0 - w) + values[i + 1] * w;
  }

  template <typename F>
  static GridFunction sample(F&& f, double start, double spacing, std::size_t n) {
    GridFunction g(start, spacing, n);
    for (std::size_t i = 0; i < n; ++i) g.values[i] = f(g.t(i));
    return g;
  }

  /// Symmetric window [-half_width, half_width] with n intervals.
  template <typename F>
  static GridFunction sample_window(F&& f, double half_width, std::size_t n_intervals) {
    return sample(std::forward<F>(f), -half_width, 2.0 * half_width / static_cast<double>(n_intervals),
                  n_intervals + 1);
  }
};

using RealGrid = GridFunction<double>;
using ComplexGrid = GridFunction<Complex>;

}  // namespace vstab
