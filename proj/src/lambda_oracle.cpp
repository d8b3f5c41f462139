#include "vstab/lambda_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "vstab/errors.hpp"
#include "vstab/kernels.hpp"

namespace vstab {

namespace {

double cluster_weight(const Cluster& c, double span) {
  // a share s of the span's background density sits inside the bump: c w pi = s span
  return c.share * span / (std::numbers::pi * c.width);
}

}  // namespace

std::vector<double> clustered_nodes(double lo, double hi, std::size_t n_intervals,
                                    const std::vector<Cluster>& clusters) {
  if (!(hi > lo) || n_intervals < 1) throw ValidationError("clustered_nodes: empty window");
  for (const auto& c : clusters) {
    if (!(c.width > 0.0) || !(c.share >= 0.0)) throw ValidationError("clustered_nodes: bad cluster");
  }
  const double span = hi - lo;
  auto s = [&](double t) {
    double v = t - lo;
    for (const auto& c : clusters) {
      v += cluster_weight(c, span) * c.width *
           (std::atan((t - c.center) / c.width) - std::atan((lo - c.center) / c.width));
    }
    return v;
  };
  auto ds = [&](double t) {
    double v = 1.0;
    for (const auto& c : clusters) {
      const double x = (t - c.center) / c.width;
      v += cluster_weight(c, span) / (1.0 + x * x);
    }
    return v;
  };
  const double total = s(hi);
  std::vector<double> nodes(n_intervals + 1);
  nodes.front() = lo;
  nodes.back() = hi;
  double t = lo;
  for (std::size_t k = 1; k < n_intervals; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n_intervals);
    double a = nodes[k - 1], b = hi;
    t = std::clamp(t, a, b);
    for (int it = 0; it < 100; ++it) {
      const double f = s(t) - target;
      if (f > 0.0) b = t; else a = t;
      double next = t - f / ds(t);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - t) < 1e-15 * (1.0 + std::abs(t))) {
        t = next;
        break;
      }
      t = next;
    }
    nodes[k] = t;
  }
  return nodes;
}

std::vector<Complex> lambda_spectrum(const Profile& p, double m, const std::vector<double>& nodes, bool parallel) {
  const Eigen::MatrixXd L = parallel ? kernels::lambda_matrix(p, m, nodes) : kernels::lambda_matrix_serial(p, m, nodes);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(L, false);
  if (solver.info() != Eigen::Success) throw NumericalError("lambda_spectrum: eigensolver failed");
  const auto& ev = solver.eigenvalues();
  return std::vector<Complex>(ev.data(), ev.data() + ev.size());
}

OracleResult lambda_oracle(const Profile& p, double m, const OracleOptions& options) {
  if (!(m > 0.0)) throw ValidationError("lambda_oracle: m must be positive");
  if (options.sizes.empty()) throw ValidationError("lambda_oracle: no grid sizes");
  const auto& prm = p.params();
  OracleResult r;
  // the source A psi decays like e^{(2 + m) t} on the left and e^{-(alpha + m) t} on the right
  r.lo = options.lo != 0.0 ? options.lo : std::min(prm.logM1, prm.a) - options.decay_digits / (2.0 + m);
  r.hi = options.hi != 0.0 ? options.hi : prm.logM + options.decay_digits / (prm.alpha + m);
  const double floor = 1e-3 * p.Omega_minus_inf();

  auto top = [](const std::vector<Complex>& ev) {
    return *std::max_element(ev.begin(), ev.end(), [](Complex x, Complex y) { return x.imag() < y.imag(); });
  };
  auto uniform = [&](std::size_t n) {
    std::vector<double> nodes(n + 1);
    for (std::size_t i = 0; i <= n; ++i) nodes[i] = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(n);
    return nodes;
  };

  r.coarse = top(lambda_spectrum(p, m, uniform(options.coarse), options.parallel));
  if (!(r.coarse.imag() > 0.0)) throw NumericalError("lambda_oracle: no eigenvalue in the upper half plane");

  if (options.cluster) {
    // critical layer where Omega = Re mu, located by bisection on the decreasing Omega
    double a = r.lo, b = r.hi;
    if (p.Omega(a) > r.coarse.real() && p.Omega(b) < r.coarse.real()) {
      for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
        const double c = 0.5 * (a + b);
        (p.Omega(c) > r.coarse.real() ? a : b) = c;
      }
      const double tc = 0.5 * (a + b);
      const double width = std::max(r.coarse.imag() / std::abs(p.Omega_prime(tc)), 2.0 * p.resolution());
      r.clusters.push_back({tc, width, 0.5});
    }
    r.clusters.push_back({prm.a, std::max(p.resolution(), 0.02), 0.3});
  }

  Complex target = r.coarse;
  std::vector<Complex> last;
  for (auto n : options.sizes) {
    last = lambda_spectrum(p, m, clustered_nodes(r.lo, r.hi, n, r.clusters), options.parallel);
    const auto pick = *std::min_element(last.begin(), last.end(), [&](Complex x, Complex y) {
      return std::abs(x - target) < std::abs(y - target);
    });
    r.sizes.push_back(n);
    r.raw.push_back(pick);
    target = pick;
  }
  r.unstable_count = static_cast<std::size_t>(
      std::count_if(last.begin(), last.end(), [&](Complex z) { return z.imag() > floor; }));
  const auto k = r.raw.size();
  if (k >= 2) {
    const double ratio = static_cast<double>(r.sizes[k - 1]) / static_cast<double>(r.sizes[k - 2]);
    const double w = ratio * ratio;
    r.mu = (w * r.raw[k - 1] - r.raw[k - 2]) / (w - 1.0);
  } else {
    r.mu = r.raw.back();
  }
  return r;
}

}  // namespace vstab
