#include "vstab/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <tuple>

#include "vstab/errors.hpp"
#include "vstab/numerics.hpp"

namespace vstab {

bool EigenpairResiduals::acceptable(double imag_tol, double potential_tol, double transversal_floor) const {
  return std::abs(imag_identity) < imag_tol && potential_error() < potential_tol &&
         std::abs(transversality) > transversal_floor;
}

namespace {

struct FixedWindowMatcher {
  const Coefficients& c;
  double m;
  double left_T, right_T;
  OdeOptions ode;

  Complex operator()(Complex mu) const {
    ShootOptions o;
    o.ode = ode;
    o.T = left_T;
    const auto minus = shoot_minus(c, m, mu, o);
    o.T = right_T;
    const auto plus = shoot_plus(c, m, mu, o);
    return (minus.psi * plus.dpsi - minus.dpsi * plus.psi) / (-2.0 * m);
  }
};

std::pair<ComplexGrid, ComplexGrid> sample_nodes(const std::vector<ShotNode>& nodes, double t0, double t1,
                                                 double dt) {
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
  ComplexGrid g(t0, dt, n), dg(t0, dt, n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = g.t(i);
    while (k + 2 < nodes.size() && nodes[k + 1].t < t) ++k;
    const auto& l = nodes[k];
    const auto& r = nodes[k + 1];
    const double h = r.t - l.t;
    const auto re = Quintic::hermite({l.psi.real(), l.dpsi.real(), l.d2psi.real()},
                                     {r.psi.real(), r.dpsi.real(), r.d2psi.real()}, h);
    const auto im = Quintic::hermite({l.psi.imag(), l.dpsi.imag(), l.d2psi.imag()},
                                     {r.psi.imag(), r.dpsi.imag(), r.d2psi.imag()}, h);
    const double x = std::clamp(t - l.t, 0.0, h);
    g.values[i] = Complex(re(x), im(x));
    dg.values[i] = Complex(re.derivative(x, 1), im.derivative(x, 1));
  }
  return {g, dg};
}

}  // namespace

ComplexEigenpair assemble_eigenpair(const Profile& p, const Coefficients& c, double m, Complex mu,
                                    double left_T, double right_T, const FindOptions& options) {
  (void)p;
  ShootOptions o;
  o.ode = options.ode;
  o.integrals = true;
  o.record = options.sample;
  o.T = left_T;
  const auto minus = shoot_minus(c, m, mu, o);
  o.T = right_T;
  const auto plus = shoot_plus(c, m, mu, o);

  ComplexEigenpair e;
  e.m = m;
  e.mu = mu;
  e.left_window = left_T;
  e.right_window = right_T;
  e.residuals.matching = std::abs((minus.psi * plus.dpsi - minus.dpsi * plus.psi) / (-2.0 * m));

  const Complex scale = std::abs(plus.psi) > 1e-3 * std::abs(plus.dpsi) / std::max(1.0, m)
                            ? minus.psi / plus.psi
                            : minus.dpsi / plus.dpsi;
  const double s2 = std::norm(scale);
  const auto& L = minus.integrals;
  const auto& R = plus.integrals;
  const double mass = L.mass + s2 * R.mass;
  const double grad = L.grad + s2 * R.grad;
  const double norm = grad + m * m * mass;
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("assemble_eigenpair: degenerate normalization");
  const double inv = 1.0 / norm;
  const Complex amp = 1.0 / std::sqrt(norm);

  e.residuals.imag_identity = (L.abs_potential + s2 * R.abs_potential) * inv;
  e.residuals.potential_integral = (L.potential + s2 * R.potential) * inv;
  e.square = (L.square + scale * scale * R.square) * inv;
  e.residuals.transversality = (L.transversal + scale * scale * R.transversal) * inv;
  e.moment = (L.moment + scale * R.moment) * amp;
  e.tail_coefficient = scale * amp;
  e.normalized = true;
  if (std::abs(e.residuals.transversality) > 0.0) {
    e.dmu_dm = -2.0 * m * e.square / e.residuals.transversality;
  }

  if (options.sample) {
    std::vector<ShotNode> nodes = minus.nodes;
    for (auto it = plus.nodes.rbegin(); it != plus.nodes.rend(); ++it) {
      if (it->t <= nodes.back().t) continue;
      nodes.push_back({it->t, scale * it->psi, scale * it->dpsi, scale * it->d2psi});
    }
    for (auto& nd : nodes) {
      nd.psi *= amp;
      nd.dpsi *= amp;
      nd.d2psi *= amp;
    }
    std::tie(e.psi, e.dpsi) = sample_nodes(nodes, -left_T, right_T, options.sample_dt);
  }
  return e;
}

ComplexEigenpair find_eigenvalue(const Profile& p, double m, Complex seed, const FindOptions& options) {
  if (!(seed.imag() > 0.0)) throw ValidationError("find_eigenvalue: seed must have Im mu > 0");
  if (!(m > 0.0)) throw ValidationError("find_eigenvalue: m must be positive");
  const auto c = coefficients(p);
  const double omega_inf = p.Omega_minus_inf();
  const double collapse = options.collapse_floor > 0.0 ? options.collapse_floor : 1e-9 * omega_inf;
  const double budget = 1e-12;

  FixedWindowMatcher F{c, m, left_window(c, m, seed, budget, 400.0),
                       right_window(c, m, seed, budget, 400.0), options.ode};
  auto eval = [&](Complex mu) {
    try {
      return F(mu);
    } catch (const WindowTooSmall&) {
      F.left_T = left_window(c, m, mu, budget, 400.0);
      F.right_T = right_window(c, m, mu, budget, 400.0);
      return F(mu);
    }
  };

  Complex mu0 = seed, mu1 = seed + Complex(1e-2 * seed.imag(), 0.0);
  Complex f0 = eval(mu0), f1 = eval(mu1);
  if (std::abs(f0) < std::abs(f1)) {
    std::swap(mu0, mu1);
    std::swap(f0, f1);
  }
  double best = std::abs(f1);
  int stall = 0;
  int it = 0;
  for (; it < options.max_iterations && std::abs(f1) >= options.tol; ++it) {
    Complex delta;
    const Complex df = f1 - f0;
    if (stall >= 6 || std::abs(df) == 0.0) {
      const double eps = 1e-7 * std::max(std::abs(mu1), 1e-3);
      const Complex deriv = (eval(mu1 + eps) - eval(mu1 - eps)) / (2.0 * eps);
      if (std::abs(deriv) == 0.0) {
        throw EigenvalueNotFound(EigenvalueNotFound::Reason::divergence, "find_eigenvalue: flat matching function");
      }
      delta = -f1 / deriv;
      stall = 0;
    } else {
      delta = -f1 * (mu1 - mu0) / df;
    }
    int halvings = 0;
    while (!((mu1 + delta).imag() > 0.0)) {
      delta *= 0.5;
      if (++halvings > 60) break;
    }
    const Complex next = mu1 + delta;
    if (!(next.imag() > collapse)) {
      throw EigenvalueNotFound(EigenvalueNotFound::Reason::collapse,
                               "find_eigenvalue: Im mu collapsed toward the real axis at m = " + std::to_string(m));
    }
    if (std::abs(next) > 10.0 * omega_inf + 10.0 || !std::isfinite(next.real())) {
      throw EigenvalueNotFound(EigenvalueNotFound::Reason::divergence,
                               "find_eigenvalue: iteration left the spectral region at m = " + std::to_string(m));
    }
    mu0 = mu1;
    f0 = f1;
    mu1 = next;
    f1 = eval(mu1);
    if (std::abs(f1) < 0.9 * best) {
      best = std::abs(f1);
      stall = 0;
    } else {
      ++stall;
    }
  }
  if (!(std::abs(f1) < options.tol)) {
    throw EigenvalueNotFound(EigenvalueNotFound::Reason::divergence,
                             "find_eigenvalue: no convergence at m = " + std::to_string(m) +
                                 ", |W/(-2m)| = " + std::to_string(std::abs(f1)));
  }
  // windows that meet the published budget at the root
  const double lT = std::max(F.left_T, left_window(c, m, mu1, budget, 400.0));
  const double rT = std::max(F.right_T, right_window(c, m, mu1, budget, 400.0));
  auto pair = assemble_eigenpair(p, c, m, mu1, lT, rT, options);
  pair.iterations = it;
  if (options.check_residuals && !pair.residuals.acceptable()) {
    throw EigenvalueNotFound(EigenvalueNotFound::Reason::residual,
                             "find_eigenvalue: residuals out of tolerance at m = " + std::to_string(m) +
                                 " (imag identity " + std::to_string(pair.residuals.imag_identity) +
                                 ", potential error " + std::to_string(pair.residuals.potential_error()) + ")");
  }
  return pair;
}

BranchSeed seed_from_branch_point(const Profile& p, Critical d, double h, const BottomSpectrumResult* bottom) {
  if (!(h > 0.0)) throw ValidationError("seed_from_branch_point: h must be positive");
  BottomSpectrumResult local;
  if (!bottom) {
    local = critical_bottom(p, d);
    bottom = &local;
  }
  const auto& psi0 = bottom->eigvec;
  const double td = critical_point(p, d);
  const double od = p.Omega(td);
  const double dod = p.Omega_prime(td);
  const double v_d = critical_potential(p, d, td);

  BranchSeed s;
  s.d = d;
  s.m_d = std::sqrt(-bottom->lambda_min);
  s.psi0_at_d = psi0.interpolate(td);
  if (std::abs(s.psi0_at_d) < 1e-8) {
    throw NumericalError("seed_from_branch_point: limiting eigenfunction vanishes at d");
  }
  // principal value by the midpoint rule on cells symmetric about d
  const double hg = psi0.dt;
  const double lo = psi0.t0, hi = psi0.t_end();
  double pv = 0.0;
  for (int side : {1, -1}) {
    for (long k = 0;; ++k) {
      const double t = td + side * (static_cast<double>(k) + 0.5) * hg;
      if (t <= lo || t >= hi) break;
      const double u = psi0.interpolate(t);
      pv += hg * critical_potential(p, d, t) * u * u / (p.Omega(t) - od);
    }
  }
  s.D = Complex(pv, std::numbers::pi * v_d * s.psi0_at_d * s.psi0_at_d / std::abs(dod));
  s.m = d == Critical::a ? s.m_d - h : s.m_d + h;
  s.mu = od - 2.0 * s.m_d * (s.m - s.m_d) / s.D;
  return s;
}

namespace {

Complex quadratic_extrapolation(const BranchSample& a, const BranchSample& b, const BranchSample& c, double x) {
  const double xa = a.m, xb = b.m, xc = c.m;
  return a.mu * ((x - xb) * (x - xc) / ((xa - xb) * (xa - xc))) +
         b.mu * ((x - xa) * (x - xc) / ((xb - xa) * (xb - xc))) +
         c.mu * ((x - xa) * (x - xb) / ((xc - xa) * (xc - xb)));
}

}  // namespace

DispersionBranch trace_branch(const Profile& p, const CriticalWavenumbers& cw, const BranchOptions& options) {
  DispersionBranch br;
  br.m_a = cw.m_a;
  br.m_b = cw.m_b;
  br.omega_a = p.Omega(p.params().a);
  br.omega_b = p.Omega(p.params().b);
  if (!(cw.m_a > cw.m_b)) throw ValidationError("trace_branch: requires m_a > m_b");
  const double width = cw.m_a - cw.m_b;
  const double h0 = options.h0 > 0.0 ? options.h0 : std::min(0.05, 0.02 * width);
  const double delta_min = options.delta_min > 0.0 ? options.delta_min : 1e-3 * p.Omega_minus_inf();
  FindOptions find = options.find;
  find.sample = false;

  const auto seed = seed_from_branch_point(p, Critical::a, h0, &cw.at_a);
  auto record = [&](const ComplexEigenpair& e) {
    br.samples.push_back({e.m, e.mu, e.dmu_dm, e.residuals});
  };
  try {
    record(find_eigenvalue(p, seed.m, seed.mu, find));
  } catch (const NumericalError& e) {
    throw BranchError(std::string("trace_branch: no eigenvalue from the branch-point seed: ") + e.what(), br);
  }

  const double step0 = width / options.n_steps;
  const double h_end = h0 / 16.0;
  double step = step0;
  while (true) {
    const auto& last = br.samples.back();
    double dm = step;
    if (last.m - dm < cw.m_b + h0) {
      // below m_b + h0 the distance to m_b is halved each step
      const double gap = last.m - cw.m_b;
      if (gap <= h_end * (1.0 + 1e-9)) {
        br.stop_reason = "reached m_b + h0 / 16";
        break;
      }
      dm = std::min(step, gap - std::max(h_end, 0.5 * gap));
    }
    const double m_next = last.m - dm;
    Complex pred = last.mu - dm * last.dmu_dm;
    if (!(pred.imag() > 0.0)) pred = Complex(pred.real(), 0.5 * last.mu.imag());
    try {
      record(find_eigenvalue(p, m_next, pred, find));
      step = std::min(step0, step * 1.5);
    } catch (const NumericalError& e) {
      step *= 0.5;
      if (step < options.min_step) {
        throw BranchError(std::string("trace_branch: corrector failed below the minimum step: ") + e.what(), br);
      }
      continue;
    }
    // near m_a Im mu starts small and grows; the floor only ends the descent toward m_b
    const auto n = br.samples.size();
    const bool descending = br.samples[n - 1].mu.imag() < br.samples[n - 2].mu.imag();
    if (descending && br.samples.back().mu.imag() < delta_min) {
      br.stop_reason = "Im mu below delta_min";
      break;
    }
  }
  const auto& s = br.samples;
  if (s.size() >= 3) {
    br.mu_at_a = quadratic_extrapolation(s[0], s[1], s[2], cw.m_a);
    const auto n = s.size();
    br.mu_at_b = quadratic_extrapolation(s[n - 3], s[n - 2], s[n - 1], cw.m_b);
  }
  return br;
}

Contour default_contour(const Profile& p, double delta_min_factor) {
  const double w = p.Omega_minus_inf();
  return {-0.05 * w, 1.05 * w, delta_min_factor * w, w};
}

ExclusionCertificate scan_no_eigenvalue(const Profile& p, double m, const Contour& contour,
                                        int initial_per_edge, int max_depth) {
  if (!(contour.im_lo > 0.0) || !(contour.im_hi > contour.im_lo) || !(contour.re_hi > contour.re_lo)) {
    throw ValidationError("scan_no_eigenvalue: contour must be a rectangle in Im mu > 0");
  }
  const auto c = coefficients(p);
  ExclusionCertificate cert;
  cert.m = m;
  cert.contour = contour;
  cert.weakened = contour.im_lo > 1e-2 * p.Omega_minus_inf();
  cert.caveat = "eigenvalues with Im mu < " + std::to_string(contour.im_lo) + " are not excluded";
  cert.min_abs_matching = std::numeric_limits<double>::infinity();

  auto F = [&](Complex mu) {
    ++cert.evaluations;
    const Complex f = matching(c, m, mu);
    cert.min_abs_matching = std::min(cert.min_abs_matching, std::abs(f));
    return f;
  };
  const Complex corners[4] = {{contour.re_lo, contour.im_lo}, {contour.re_hi, contour.im_lo},
                              {contour.re_hi, contour.im_hi}, {contour.re_lo, contour.im_hi}};
  double total = 0.0;
  bool ok = true;
  const double quarter = std::numbers::pi / 4.0;

  // recursive refinement of one segment
  std::function<void(Complex, Complex, Complex, Complex, int)> walk =
      [&](Complex za, Complex fa, Complex zb, Complex fb, int depth) {
        if (!ok) return;
        const double dphi = std::arg(fb / fa);
        if (std::abs(dphi) < quarter) {
          total += dphi;
          cert.max_phase_step = std::max(cert.max_phase_step, std::abs(dphi));
          return;
        }
        if (depth >= max_depth) {
          ok = false;
          return;
        }
        const Complex zm = 0.5 * (za + zb);
        const Complex fm = F(zm);
        if (std::abs(fm) < 1e-13) {
          ok = false;
          return;
        }
        walk(za, fa, zm, fm, depth + 1);
        walk(zm, fm, zb, fb, depth + 1);
      };

  for (int e = 0; e < 4 && ok; ++e) {
    const Complex z0 = corners[e], z1 = corners[(e + 1) % 4];
    Complex zp = z0, fp = F(z0);
    for (int k = 1; k <= initial_per_edge && ok; ++k) {
      const Complex z = z0 + (z1 - z0) * (static_cast<double>(k) / initial_per_edge);
      const Complex f = F(z);
      walk(zp, fp, z, f, 0);
      zp = z;
      fp = f;
    }
  }
  cert.winding_raw = total / (2.0 * std::numbers::pi);
  cert.winding = static_cast<int>(std::lround(cert.winding_raw));
  cert.conclusive = ok && std::abs(cert.winding_raw - cert.winding) < 1e-6;
  if (!ok) cert.caveat += "; phase tracking failed, no certificate";
  return cert;
}

bool MultiStartResult::all_converged() const {
  return std::all_of(roots.begin(), roots.end(), [](const auto& r) { return r.has_value(); });
}

MultiStartResult multi_start(const Profile& p, double m, const Contour& box, int n_seeds, unsigned seed,
                             const FindOptions& options) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> re(box.re_lo, box.re_hi), im(box.im_lo, box.im_hi);
  MultiStartResult r;
  FindOptions o = options;
  o.sample = false;
  for (int i = 0; i < n_seeds; ++i) {
    const Complex s(re(rng), im(rng));
    r.seeds.push_back(s);
    try {
      r.roots.emplace_back(find_eigenvalue(p, m, s, o).mu);
    } catch (const NumericalError&) {
      r.roots.emplace_back(std::nullopt);
    }
  }
  for (const auto& a : r.roots)
    for (const auto& b : r.roots)
      if (a && b) r.spread = std::max(r.spread, std::abs(*a - *b));
  return r;
}

}  // namespace vstab
