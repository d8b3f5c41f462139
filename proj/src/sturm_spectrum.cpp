#include "vstab/sturm_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "vstab/errors.hpp"
#include "vstab/numerics.hpp"

namespace vstab {

Tridiagonal::Tridiagonal(const RealGrid& v) : t0_(v.t0), h_(v.dt) {
  if (v.size() < 4) throw ValidationError("Tridiagonal: need at least 4 samples");
  scaled_v_.resize(v.size() - 2);
  for (std::size_t i = 0; i < scaled_v_.size(); ++i) scaled_v_[i] = h_ * h_ * v[i + 1];
}

std::vector<double> Tridiagonal::pivots(double lambda) const {
  const double shift = h_ * h_ * lambda;
  const double floor = std::numeric_limits<double>::epsilon();
  std::vector<double> s(scaled_v_.size());
  double prev = 1.0 + scaled_v_[0] - shift;
  s[0] = prev;
  for (std::size_t i = 1; i < s.size(); ++i) {
    double denom = 1.0 + prev;
    if (denom == 0.0) denom = -floor;
    prev = scaled_v_[i] - shift + prev / denom;
    s[i] = prev;
  }
  return s;
}

std::size_t Tridiagonal::count_below(double lambda) const {
  const double shift = h_ * h_ * lambda;
  const double floor = std::numeric_limits<double>::epsilon();
  std::size_t count = 0;
  double prev = 1.0 + scaled_v_[0] - shift;
  if (prev < -1.0) ++count;
  for (std::size_t i = 1; i < scaled_v_.size(); ++i) {
    double denom = 1.0 + prev;
    if (denom == 0.0) denom = -floor;
    prev = scaled_v_[i] - shift + prev / denom;
    if (prev < -1.0) ++count;
  }
  return count;
}

double Tridiagonal::eigenvalue(std::size_t k, double tol) const {
  if (k == 0 || k > size()) throw ValidationError("Tridiagonal: eigenvalue index out of range");
  const double inv_h2 = 1.0 / (h_ * h_);
  double lo = *std::min_element(scaled_v_.begin(), scaled_v_.end()) * inv_h2;
  double hi = *std::max_element(scaled_v_.begin(), scaled_v_.end()) * inv_h2 + 4.0 * inv_h2;
  for (double probe = std::max(lo + 1.0, 0.0); probe < hi; probe = 2.0 * probe + 1.0) {
    if (count_below(probe) >= k) {
      hi = probe;
      break;
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(mid) >= k) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

RealGrid Tridiagonal::eigenvector(double lambda) const {
  const std::size_t n = size();
  // T - shift = L D L^T with D_i = (1 + s_i)/h^2 and L_{i,i-1} = -1/(1 + s_{i-1}); all D_i > 0
  // when shift sits just below the bottom eigenvalue
  const auto s = pivots(lambda - 1e-9 * std::max(1.0, std::abs(lambda)));
  std::vector<double> x(n, 1.0), y(n);
  for (int iter = 0; iter < 3; ++iter) {
    y[0] = x[0];
    for (std::size_t i = 1; i < n; ++i) y[i] = x[i] + y[i - 1] / (1.0 + s[i - 1]);
    for (std::size_t i = 0; i < n; ++i) y[i] /= (1.0 + s[i]);
    for (std::size_t i = n - 1; i-- > 0;) y[i] += y[i + 1] / (1.0 + s[i]);
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  RealGrid u(t0_, h_, n + 2);
  double norm = 0.0;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < n; ++i) {
    u.values[i + 1] = x[i];
    norm += x[i] * x[i];
    if (std::abs(x[i]) > std::abs(x[peak])) peak = i;
  }
  const double scale = (x[peak] < 0.0 ? -1.0 : 1.0) / std::sqrt(norm * h_);
  for (double& v : u.values) v *= scale;
  return u;
}

RealGrid sample_window(const RealFunction& v, double T, std::size_t n) {
  if (!(T > 0.0) || n < 2) throw ValidationError("sample_window: need T > 0 and n >= 2");
  return RealGrid::sample_window(v, T, n);
}

BottomSpectrumResult bottom_eigenvalue(const RealFunction& v, double T, std::size_t n, double rtol) {
  if (n < 1000) throw ValidationError("bottom_eigenvalue: n must be at least 1000");
  BottomSpectrumResult r;
  r.T = T;
  r.n = n;
  for (std::size_t level = 0; level < 3; ++level) {
    const std::size_t nn = n << level;
    Tridiagonal tri(sample_window(v, T, nn));
    const double lam = tri.eigenvalue(1);
    r.sizes.push_back(nn);
    r.history.push_back(lam);
    if (level == 2) {
      r.lambda_fd = lam;
      r.eigvec = tri.eigenvector(lam);
    }
  }
  for (std::size_t i = 0; i + 1 < r.history.size(); ++i) {
    r.extrapolated.push_back((4.0 * r.history[i + 1] - r.history[i]) / 3.0);
  }
  r.lambda_min = r.extrapolated.back();
  const double spread = std::abs(r.extrapolated[1] - r.extrapolated[0]);
  r.converged = spread <= rtol * std::max(1.0, std::abs(r.lambda_min));
  if (!r.converged) {
    std::ostringstream os;
    os.precision(12);
    os << "bottom_eigenvalue did not converge under refinement:";
    for (std::size_t i = 0; i < r.sizes.size(); ++i) os << " n=" << r.sizes[i] << " -> " << r.history[i] << ";";
    os << " extrapolants " << r.extrapolated[0] << ", " << r.extrapolated[1];
    throw NumericalError(os.str());
  }
  return r;
}

double rayleigh_quotient(const RealGrid& v, const RealGrid& u) {
  if (v.size() != u.size()) throw ValidationError("rayleigh_quotient: grids differ");
  const double h = u.dt;
  double grad = 0.0, pot = 0.0, mass = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double du = u[i + 1] - u[i];
    grad += du * du / h;
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = (i == 0 || i + 1 == u.size()) ? 0.5 * h : h;
    pot += w * v[i] * u[i] * u[i];
    mass += w * u[i] * u[i];
  }
  if (!(mass > 0.0)) throw ValidationError("rayleigh_quotient: u has zero norm");
  return (grad + pot) / mass;
}

double rayleigh_quotient(const RealGrid& v, const RealGrid& u, const RealGrid& du) {
  if (v.size() != u.size() || du.size() != u.size()) throw ValidationError("rayleigh_quotient: grids differ");
  std::vector<double> energy(u.size()), mass(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    energy[i] = du[i] * du[i] + v[i] * u[i] * u[i];
    mass[i] = u[i] * u[i];
  }
  const double m = simpson(mass, u.dt);
  if (!(m > 0.0)) throw ValidationError("rayleigh_quotient: u has zero norm");
  return simpson(energy, u.dt) / m;
}

std::size_t count_below(const RealFunction& v, double threshold, double T, std::size_t n) {
  const auto c1 = Tridiagonal(sample_window(v, T, n)).count_below(threshold);
  const auto c2 = Tridiagonal(sample_window(v, T, 2 * n)).count_below(threshold);
  if (c1 != c2) {
    throw NumericalError("count_below: count changed from " + std::to_string(c1) + " to " +
                         std::to_string(c2) + " under refinement; grid too coarse");
  }
  return c2;
}

bool SpectralGap::stable(double rtol) const {
  if (lowest.size() < 2) return false;
  const double g0 = second[0] - lowest[0], g1 = second[1] - lowest[1];
  return g0 > 0.0 && g1 > 0.0 && std::abs(g1 - g0) <= rtol * g1;
}

SpectralGap spectral_gap(const RealFunction& v, double T, std::size_t n) {
  SpectralGap g;
  for (std::size_t nn : {n, 2 * n}) {
    Tridiagonal tri(sample_window(v, T, nn));
    g.sizes.push_back(nn);
    g.lowest.push_back(tri.eigenvalue(1));
    g.second.push_back(tri.eigenvalue(2));
  }
  return g;
}

double default_window(const Profile& p) {
  const auto& par = p.params();
  return std::max(std::abs(par.logM1), par.logM) + 30.0 / std::min(2.0, par.alpha);
}

std::size_t default_intervals(const Profile& p, double T) {
  const double dt = std::min(4e-3, p.resolution() / 8.0);
  auto n = static_cast<std::size_t>(std::ceil(2.0 * T / dt));
  n = std::max<std::size_t>(n, 1000);
  return n + (n % 2);
}

BottomSpectrumResult critical_bottom(const Profile& p, Critical d, std::optional<double> window) {
  const double T = window ? *window : default_window(p);
  if (!(T > 0.0)) throw ValidationError("critical_bottom: window half-width must be positive");
  return bottom_eigenvalue([&](double t) { return critical_potential(p, d, t); }, T,
                           default_intervals(p, T));
}

CriticalWavenumbers critical_wavenumbers(const Profile& p, std::optional<double> window) {
  CriticalWavenumbers c;
  c.at_a = critical_bottom(p, Critical::a, window);
  c.at_b = critical_bottom(p, Critical::b, window);
  for (const auto* r : {&c.at_a, &c.at_b}) {
    if (!(r->lambda_min < -1.0)) {
      throw ValidationError("critical_wavenumbers: bottom eigenvalue " + std::to_string(r->lambda_min) +
                            " is not below -1; the profile violates the class conditions");
    }
  }
  c.m_a = std::sqrt(-c.at_a.lambda_min);
  c.m_b = std::sqrt(-c.at_b.lambda_min);
  return c;
}

TestFunction critical_test_function(const Profile& p, Critical d, double T, std::size_t n) {
  const double td = critical_point(p, d);
  if (!(td > -T)) throw ValidationError("critical_test_function: window must contain d");
  const double od = p.Omega(td);
  const double h = (td + T) / static_cast<double>(n);
  TestFunction f{RealGrid(-T, h, n + 1), RealGrid(-T, h, n + 1)};
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = i == n ? td : -T + h * static_cast<double>(i);
    const double e = std::exp(t);
    f.u.values[i] = (p.Omega(t) - od) * e;
    f.du.values[i] = (p.Omega_prime(t) + p.Omega(t) - od) * e;
  }
  return f;
}

double critical_test_quotient(const Profile& p, Critical d, double T) {
  const double td = critical_point(p, d);
  if (!(td > -T)) throw ValidationError("critical_test_quotient: window must contain d");
  const double od = p.Omega(td);
  auto energy = [&](double t) {
    const double e2 = std::exp(2.0 * t), w = p.Omega(t) - od, dw = p.Omega_prime(t) + w;
    return (dw * dw + p.A(t) * w) * e2;
  };
  auto mass = [&](double t) {
    const double w = p.Omega(t) - od;
    return w * w * std::exp(2.0 * t);
  };
  std::vector<double> cuts{-T};
  for (double k : p.knot_locations()) {
    if (k > -T && k < td) cuts.push_back(k);
  }
  cuts.push_back(td);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    num += integrate(energy, cuts[i - 1], cuts[i]);
    den += integrate(mass, cuts[i - 1], cuts[i]);
  }
  return num / den;
}

double cosine_test_quotient(const Profile& p, std::size_t n) {
  const double h = 2.0 / static_cast<double>(n);
  RealGrid u(-1.0, h, n + 1), du(-1.0, h, n + 1), v(-1.0, h, n + 1);
  const double k = std::numbers::pi / 2.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = -1.0 + h * static_cast<double>(i);
    u.values[i] = std::cos(k * t);
    du.values[i] = -k * std::sin(k * t);
    v.values[i] = critical_potential(p, Critical::a, t);
  }
  return rayleigh_quotient(v, u, du);
}

DeepWellSweep sweep_deep_well(const ProfileParams& base, const std::vector<double>& B_grid,
                              double target_N, bool stop_at_target) {
  DeepWellSweep s;
  for (double B : B_grid) {
    ProfileParams params = base;
    params.B = B;
    const auto prof = build_deep_well(params);
    const auto bottom = critical_bottom(prof, Critical::a);
    const auto n_cos = static_cast<std::size_t>(std::ceil(2.0 / (prof.resolution() / 40.0)));
    DeepWellSweepRow row{B, bottom.lambda_min, std::sqrt(std::max(0.0, -bottom.lambda_min)),
                         cosine_test_quotient(prof, std::max<std::size_t>(2000, n_cos + n_cos % 2))};
    s.rows.push_back(row);
    if (s.B_star == 0.0 && bottom.lambda_min <= -target_N * target_N) {
      s.B_star = B;
      if (stop_at_target) break;
    }
  }
  return s;
}

}  // namespace vstab
