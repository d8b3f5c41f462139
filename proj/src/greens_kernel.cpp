#include "vstab/greens_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "vstab/errors.hpp"

namespace vstab {

namespace {

// Weights of the exact integral of e^{-m(h - x)} (f_i (1 - x/h) + f_{i+1} x/h) over [0, h].
struct StepWeights {
  double decay;  // e^{-mh}
  double w_old;
  double w_new;
};

StepWeights step_weights(double m, double h) {
  const double z = m * h;
  StepWeights w{std::exp(-z), 0.0, 0.0};
  double full = 0.0, old = 0.0;
  if (z < 0.05) {
    // full = h sum (-z)^{n-1}/n!,  old = h sum (-z)^{n-2} (n-1)/n!
    double term = 1.0, fact = 1.0;
    for (int n = 1; n < 14; ++n) {
      fact *= n;
      full += term / fact;
      if (n >= 2) old += std::pow(-z, n - 2) * (n - 1) / fact;
      term *= -z;
    }
    full *= h;
    old *= h;
  } else {
    full = -std::expm1(-z) / m;
    old = (-std::expm1(-z) - z * w.decay) / (m * z);
  }
  w.w_old = old;
  w.w_new = full - old;
  return w;
}

// int_0^h (1 - s/h) e^{-ms} ds and int_0^h (1 - s/h) e^{+ms} ds
double hat_decay(double m, double h) {
  const double z = m * h;
  if (z < 1e-2) return h * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0);
  return h * (z - 1.0 + std::exp(-z)) / (z * z);
}

double hat_growth(double m, double h) {
  const double z = m * h;
  if (z < 1e-2) return h * (0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0);
  return h * (std::expm1(z) - z) / (z * z);
}

}  // namespace

KernelApplication apply_K(double m, const RealGrid& f, const TailRates& tails) {
  if (!(m > 0.0)) throw ValidationError("apply_K: m must be positive");
  const std::size_t n = f.size();
  KernelApplication out{m, f, RealGrid(f.t0, f.dt, n), 0.0, 0.0};
  if (n == 0) return out;

  double scale = 0.0;
  for (double x : f.values) scale = std::max(scale, std::abs(x));
  const double tiny = 1e-14 * scale;
  const double f0 = f.values.front(), fn = f.values.back();
  if (!tails.left && std::abs(f0) > tiny) {
    throw ValidationError("apply_K: input does not vanish at the left end and has no declared tail");
  }
  if (!tails.right && std::abs(fn) > tiny) {
    throw ValidationError("apply_K: input does not vanish at the right end and has no declared tail");
  }
  if (tails.left) out.left_tail_mass = f0 / (m + *tails.left);
  if (tails.right) out.right_tail_mass = fn / (m + *tails.right);

  const auto w = step_weights(m, f.dt);
  std::vector<double> from_left(n), from_right(n);
  from_left[0] = out.left_tail_mass;
  for (std::size_t i = 1; i < n; ++i) {
    from_left[i] = w.decay * from_left[i - 1] + w.w_old * f.values[i - 1] + w.w_new * f.values[i];
  }
  from_right[n - 1] = out.right_tail_mass;
  for (std::size_t i = n - 1; i-- > 0;) {
    from_right[i] = w.decay * from_right[i + 1] + w.w_old * f.values[i + 1] + w.w_new * f.values[i];
  }
  // linear interpolation leaves -(h^2/12) K f'' = -(h^2/12)(m^2 psi - f) at leading order
  const double c = f.dt * f.dt / 12.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double psi = (from_left[i] + from_right[i]) / (2.0 * m);
    out.output.values[i] = psi - c * (m * m * psi - f.values[i]);
  }
  return out;
}

HatIntegrals hat_integrals(double m, const std::vector<double>& nodes) {
  if (!(m > 0.0)) throw ValidationError("kernel_matrix: m must be positive");
  const std::size_t n = nodes.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw ValidationError("kernel_matrix: nodes must increase");
  }
  HatIntegrals w;
  w.decay_left.assign(n, 0.0);
  w.decay_right.assign(n, 0.0);
  w.growth_left.assign(n, 0.0);
  w.growth_right.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const double h = nodes[j] - nodes[j - 1];
      w.decay_left[j] = hat_decay(m, h);
      w.growth_left[j] = hat_growth(m, h);
    }
    if (j + 1 < n) {
      const double h = nodes[j + 1] - nodes[j];
      w.decay_right[j] = hat_decay(m, h);
      w.growth_right[j] = hat_growth(m, h);
    }
  }
  return w;
}

void kernel_column(double m, const std::vector<double>& nodes, const HatIntegrals& w, std::size_t j,
                   double* out) {
  const double c = 0.5 / m;
  const std::size_t n = nodes.size();
  const double below = w.decay_left[j] + w.growth_right[j];
  const double above = w.decay_right[j] + w.growth_left[j];
  for (std::size_t i = 0; i < n; ++i) {
    if (i == j) {
      out[i] = c * (w.decay_left[j] + w.decay_right[j]);
    } else if (i > j) {
      out[i] = c * std::exp(-m * (nodes[i] - nodes[j])) * below;
    } else {
      out[i] = c * std::exp(-m * (nodes[j] - nodes[i])) * above;
    }
  }
}

Eigen::MatrixXd kernel_matrix(double m, const std::vector<double>& nodes) {
  const auto w = hat_integrals(m, nodes);
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) kernel_column(m, nodes, w, static_cast<std::size_t>(j), K.col(j).data());
  return K;
}

double critical_point(const Profile& p, Critical d) {
  return d == Critical::a ? p.params().a : p.params().b;
}

double critical_value(const Profile& p, Critical d) { return p.Omega(critical_point(p, d)); }

Complex potential_value(const Profile& p, Complex mu, double t) {
  return p.A(t) / (p.Omega(t) - mu);
}

double critical_potential(const Profile& p, Critical d, double t) {
  const double td = critical_point(p, d);
  const double delta = t - td;
  if (std::abs(delta) < 1e-6) {
    // A and Omega are only C^2 across knots, so the quotient stops at first order in delta
    const double a1 = p.A_derivative(td, 1), a2 = p.A_derivative(td, 2);
    const double o1 = p.Omega_prime(td), o2 = p.Omega_second(td);
    return (a1 + a2 * delta / 2.0) / (o1 + o2 * delta / 2.0);
  }
  return p.A(t) / (p.Omega(t) - p.Omega(td));
}

ComplexGrid potential_v(const Profile& p, Complex mu, double t0, double dt, std::size_t n) {
  if (mu.imag() == 0.0) {
    auto real = potential_v(p, mu.real(), t0, dt, n);
    ComplexGrid out(t0, dt, n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = real.values[i];
    return out;
  }
  return ComplexGrid::sample([&](double t) { return potential_value(p, mu, t); }, t0, dt, n);
}

RealGrid potential_v(const Profile& p, double mu, double t0, double dt, std::size_t n) {
  const double tol = 1e-13 * std::max(1.0, p.Omega_minus_inf());
  for (auto d : {Critical::a, Critical::b}) {
    if (std::abs(mu - critical_value(p, d)) <= tol) return critical_potential_grid(p, d, t0, dt, n);
  }
  if (mu >= 0.0 && mu <= p.Omega_minus_inf()) {
    throw ValidationError("potential_v: real mu inside [0, Omega(-inf)] makes the potential singular");
  }
  return RealGrid::sample([&](double t) { return p.A(t) / (p.Omega(t) - mu); }, t0, dt, n);
}

RealGrid critical_potential_grid(const Profile& p, Critical d, double t0, double dt, std::size_t n) {
  return RealGrid::sample([&](double t) { return critical_potential(p, d, t); }, t0, dt, n);
}

double second_order_residual(double m, const RealGrid& psi, const RealGrid& f) {
  if (psi.size() != f.size() || psi.dt != f.dt || psi.t0 != f.t0) {
    throw ValidationError("second_order_residual: psi and f must share a grid");
  }
  double worst = 0.0;
  const double inv_h2 = 1.0 / (psi.dt * psi.dt);
  for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
    const double d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) * inv_h2;
    worst = std::max(worst, std::abs(-d2 + m * m * psi[i] - f[i]));
  }
  return worst;
}

}  // namespace vstab
