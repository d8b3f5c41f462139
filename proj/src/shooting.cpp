#include "vstab/shooting.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "vstab/errors.hpp"

namespace vstab {

Coefficients coefficients(const Profile& p) {
  auto prof = std::make_shared<const Profile>(p);
  const auto& par = p.params();
  Coefficients c;
  c.A = [prof](double t) { return prof->A(t); };
  c.Omega = [prof](double t) { return prof->Omega(t); };
  c.left_tail_mass = [prof](Complex mu, double T) {
    if (-T > prof->params().logM1) return std::numeric_limits<double>::infinity();
    const double c0 = prof->c0();
    const double tail = c0 * std::exp(-2.0 * T);
    const double dist = std::abs(prof->Omega_minus_inf() - mu) - tail;
    if (!(dist > 0.0)) return std::numeric_limits<double>::infinity();
    return 4.0 * tail / dist;
  };
  c.right_tail_mass = [prof](Complex mu, double T) {
    const auto& q = prof->params();
    if (T < q.logM) return std::numeric_limits<double>::infinity();
    const double top = prof->Omega(T);
    double dist;
    if (mu.real() >= 0.0 && mu.real() <= top) dist = std::abs(mu.imag());
    else dist = std::min(std::abs(mu), std::abs(mu - top));
    if (!(dist > 0.0)) return std::numeric_limits<double>::infinity();
    return std::exp(-q.alpha * T) / dist;
  };
  c.min_left_window = std::max(1.0, -par.logM1);
  c.min_right_window = std::max(1.0, par.logM);
  c.tail_alpha = par.alpha;
  return c;
}

Coefficients null_coefficients() {
  Coefficients c;
  c.A = [](double) { return 0.0; };
  c.Omega = [](double) { return 0.0; };
  c.left_tail_mass = [](Complex, double) { return 0.0; };
  c.right_tail_mass = [](Complex, double) { return 0.0; };
  return c;
}

double left_window_bound(const Coefficients& c, double m, Complex mu, double T) {
  return std::expm1(c.left_tail_mass(mu, T) / (2.0 * m));
}

double right_window_bound(const Coefficients& c, double m, Complex mu, double T) {
  return std::expm1(c.right_tail_mass(mu, T) / (2.0 * m));
}

namespace {

double pick_window(const Coefficients& c, double m, Complex mu, double budget, double max_window,
                   bool left) {
  const double start = left ? c.min_left_window : c.min_right_window;
  for (double T = start; T <= max_window; T += 0.5) {
    const double b = left ? left_window_bound(c, m, mu, T) : right_window_bound(c, m, mu, T);
    if (b < budget) return T;
  }
  throw WindowTooSmall(std::string(left ? "left" : "right") +
                       " shooting window exceeds the maximum before the truncation bound meets its budget");
}

template <std::size_t N>
Shot run_shot(const Coefficients& c, double m, Complex mu, const ShootOptions& o, bool left) {
  if (!(m > 0.0)) throw ValidationError("shoot: m must be positive");
  Shot shot;
  shot.T = o.T > 0.0 ? o.T
                     : pick_window(c, m, mu, o.bound_budget, o.max_window, left);
  shot.tail_bound = left ? left_window_bound(c, m, mu, shot.T) : right_window_bound(c, m, mu, shot.T);
  if (!(shot.tail_bound < o.bound_budget)) {
    throw WindowTooSmall("shooting window T = " + std::to_string(shot.T) + " leaves truncation bound " +
                         std::to_string(shot.tail_bound));
  }
  const double s = left ? 1.0 : -1.0;  // psi = e^{s m t} phi
  const double t_start = left ? -shot.T : shot.T;
  if ((left && !(o.match > t_start)) || (!left && !(o.match < t_start))) {
    throw ValidationError("shoot: match point must lie inside the window");
  }
  using State = std::array<Complex, N>;

  auto potential = [&](double t) { return c.A(t) / (c.Omega(t) - mu); };
  auto rhs = [&](double t, const State& y) {
    State d{};
    const double a = c.A(t);
    const Complex denom = c.Omega(t) - mu;
    const Complex v = a / denom;
    d[0] = y[1];
    d[1] = -2.0 * s * m * y[1] + v * y[0];
    if constexpr (N > 2) {
      const double e = std::exp(s * m * t);
      const Complex psi = e * y[0];
      const Complex dpsi = e * (s * m * y[0] + y[1]);
      const double p2 = std::norm(psi);
      d[2] = p2;
      d[3] = std::norm(dpsi);
      d[4] = a * p2 / std::norm(denom);
      d[5] = v * p2;
      d[6] = psi * psi;
      d[7] = v * psi * psi / denom;
      d[8] = v * psi * std::exp(m * t);
    }
    return d;
  };
  State y{};
  y[0] = 1.0;
  auto observer = [&](double, const State&, const State&, double t1, const State& y1, const State&) {
    if (!o.record) return;
    const double e = std::exp(s * m * t1);
    const Complex psi = e * y1[0];
    shot.nodes.push_back({t1, psi, e * (s * m * y1[0] + y1[1]), (m * m + potential(t1)) * psi});
  };
  if (o.record) {
    const double e = std::exp(s * m * t_start);
    shot.nodes.push_back({t_start, e, s * m * e, (m * m + potential(t_start)) * e});
  }
  y = dormand_prince<N>(rhs, t_start, o.match, y, o.ode, observer, &shot.stats);

  const double e = std::exp(s * m * o.match);
  shot.psi = e * y[0];
  shot.dpsi = e * (s * m * y[0] + y[1]);
  if constexpr (N > 2) {
    const double sign = left ? 1.0 : -1.0;  // the right shot integrates backwards
    auto& I = shot.integrals;
    const double tail = std::exp(-2.0 * m * shot.T) / (2.0 * m);
    I.mass = sign * y[2].real() + tail;
    I.grad = sign * y[3].real() + m * m * tail;
    I.abs_potential = sign * y[4].real();
    I.potential = sign * y[5];
    I.square = sign * y[6] + tail;
    I.transversal = sign * y[7];
    I.moment = sign * y[8];
    if (!left && c.tail_alpha > 0.0) I.moment += std::exp(-c.tail_alpha * shot.T) / mu;
  }
  return shot;
}

Shot shoot(const Coefficients& c, double m, Complex mu, const ShootOptions& o, bool left) {
  return o.integrals ? run_shot<9>(c, m, mu, o, left) : run_shot<2>(c, m, mu, o, left);
}

}  // namespace

double left_window(const Coefficients& c, double m, Complex mu, double budget, double max_window) {
  return pick_window(c, m, mu, budget, max_window, true);
}

double right_window(const Coefficients& c, double m, Complex mu, double budget, double max_window) {
  return pick_window(c, m, mu, budget, max_window, false);
}

Shot shoot_minus(const Coefficients& c, double m, Complex mu, const ShootOptions& options) {
  return shoot(c, m, mu, options, true);
}

Shot shoot_plus(const Coefficients& c, double m, Complex mu, const ShootOptions& options) {
  return shoot(c, m, mu, options, false);
}

Complex matching(const Coefficients& c, double m, Complex mu, double match, const OdeOptions& ode) {
  ShootOptions o;
  o.match = match;
  o.ode = ode;
  const auto minus = shoot_minus(c, m, mu, o);
  const auto plus = shoot_plus(c, m, mu, o);
  const Complex w = minus.psi * plus.dpsi - minus.dpsi * plus.psi;
  return w / (-2.0 * m);
}

}  // namespace vstab
