#include "vstab/physical_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>

#include "vstab/errors.hpp"
#include "vstab/numerics.hpp"

namespace vstab {

namespace {

constexpr Complex I{0.0, 1.0};

// cubic Hermite value at x in [x0, x0 + h]
Complex hermite(double u, double h, Complex v0, Complex d0, Complex v1, Complex d1) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * v0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * v1 + (u3 - u2) * h * d1;
}

Complex hermite_sample(const ComplexGrid& v, double t, const std::function<Complex(std::size_t)>& slope) {
  if (v.size() < 2) return {};
  const double x = (t - v.t0) / v.dt;
  if (x < 0.0 || x > static_cast<double>(v.size() - 1)) return {};
  auto k = std::min(static_cast<std::size_t>(x), v.size() - 2);
  const double u = x - static_cast<double>(k);
  return hermite(u, v.dt, v[k], slope(k), v[k + 1], slope(k + 1));
}

// running integral of f with the cubic-Hermite cell rule h/2 (f0 + f1) + h^2/12 (f0' - f1')
std::vector<Complex> cumulative(const std::vector<Complex>& f, const std::vector<Complex>& df, double h) {
  std::vector<Complex> c(f.size());
  for (std::size_t i = 1; i < f.size(); ++i) {
    c[i] = c[i - 1] + 0.5 * h * (f[i - 1] + f[i]) + h * h / 12.0 * (df[i - 1] - df[i]);
  }
  return c;
}

// fourth-order first derivative of uniform samples, one-sided at the ends
std::vector<Complex> derivative4(const std::vector<Complex>& f, double h) {
  const std::size_t n = f.size();
  std::vector<Complex> d(n);
  if (n < 5) throw ValidationError("derivative: at least five samples are needed");
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
  auto fwd = [&](std::size_t i, int s) {
    const auto at = [&](int k) { return f[static_cast<std::size_t>(static_cast<long>(i) + s * k)]; };
    return static_cast<double>(s) * (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) /
           (12.0 * h);
  };
  d[0] = fwd(0, 1);
  d[1] = fwd(1, 1);
  d[n - 1] = fwd(n - 1, -1);
  d[n - 2] = fwd(n - 2, -1);
  return d;
}

// psi on one cell by quintic Hermite interpolation, with psi'' = (m^2 + v) psi at the ends
Complex cell_psi(const Profile& p, const ComplexEigenpair& pair, double m, std::size_t k, double x) {
  const double h = pair.psi.dt;
  auto jet = [&](std::size_t i, auto part) {
    const double t = pair.psi.t(i);
    const Complex v = p.A(t) / (p.Omega(t) - pair.mu);
    return Jet2{part(pair.psi[i]), part(pair.dpsi[i]), part((m * m + v) * pair.psi[i])};
  };
  auto re = [](Complex z) { return z.real(); };
  auto im = [](Complex z) { return z.imag(); };
  const auto qr = Quintic::hermite(jet(k, re), jet(k + 1, re), h);
  const auto qi = Quintic::hermite(jet(k, im), jet(k + 1, im), h);
  return {qr(x), qi(x)};
}

// Cells where Omega - mu is small on the scale of the cell hold a near pole of g; their
// contributions to the running integrals are redone on a graded Gauss rule.
void refine_critical_cells(const Profile& p, const ComplexEigenpair& pair, Complex scale, double m,
                           std::vector<Complex>& cin, std::vector<Complex>& cout, double layer_cells) {
  const auto& grid = pair.psi;
  const double h = grid.dt;
  const std::size_t n = grid.size();
  std::vector<Complex> din(n, Complex{}), dout(n, Complex{});
  bool any = false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double t0 = grid.t(k), t1 = grid.t(k + 1);
    const double slope = std::max(std::abs(p.Omega_prime(t0)), std::abs(p.Omega_prime(t1)));
    const double dist = std::min(std::abs(p.Omega(t0) - pair.mu), std::abs(p.Omega(t1) - pair.mu));
    if (dist > layer_cells * h * slope) continue;
    any = true;
    // composite Gauss-Legendre on pieces a quarter of the layer width
    const double width = std::max(dist, std::abs(pair.mu.imag())) / std::max(slope, 1e-300);
    const auto pieces = static_cast<int>(std::clamp(std::ceil(4.0 * h / width), 1.0, 4096.0));
    const double ph = h / pieces;
    Complex in{}, out{};
    using rule = boost::math::quadrature::gauss<double, 10>;
    for (int q = 0; q < pieces; ++q) {
      const double mid = t0 + (q + 0.5) * ph;
      auto add = [&](double x, double w) {
        const double t = mid + 0.5 * ph * x;
        const Complex base = scale * p.A(t) * cell_psi(p, pair, m, k, t - t0) / (p.Omega(t) - pair.mu) * (0.5 * ph * w);
        in += base * std::exp(m * t);
        out += base * std::exp(-m * t);
      };
      const auto& xs = rule::abscissa();
      const auto& ws = rule::weights();
      for (std::size_t j = 0; j < xs.size(); ++j) {
        if (xs[j] == 0.0) {
          add(0.0, ws[j]);
        } else {
          add(xs[j], ws[j]);
          add(-xs[j], ws[j]);
        }
      }
    }
    din[k + 1] = in - (cin[k + 1] - cin[k]);
    dout[k + 1] = out - (cout[k + 1] - cout[k]);
  }
  if (!any) return;
  Complex a{}, b{};
  for (std::size_t i = 0; i < n; ++i) {
    a += din[i];
    b += dout[i];
    cin[i] += a;
    cout[i] += b;
  }
}

}  // namespace

RadialProfiles radial_profiles(const Profile& p, const std::vector<double>& s_grid) {
  for (double s : s_grid) {
    if (!(s > 0.0)) throw ValidationError("radial_profiles: radii must be positive");
  }
  RadialProfiles r;
  const std::size_t n = s_grid.size();
  r.s = s_grid;
  r.G.resize(n);
  r.R.resize(n);
  r.B.resize(n);
  r.speed.resize(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s_grid[a] < s_grid[b]; });

  // J(t) = int_{-inf}^t e^{2 tau} G, closed form left of logM1
  const double t1 = p.params().logM1;
  const double winf = p.Omega_minus_inf(), c0 = p.c0();
  auto left_J = [&](double t) { return winf * std::exp(2.0 * t) - c0 * std::exp(4.0 * t); };
  auto integrand = [&](double tau) { return std::exp(2.0 * tau) * p.G(tau); };
  auto knots = p.knot_locations();
  auto piecewise = [&](double a, double b) {
    double sum = 0.0, x = a;
    for (double k : knots) {
      if (k > x && k < b) {
        sum += integrate(integrand, x, k);
        x = k;
      }
    }
    return sum + integrate(integrand, x, b);
  };
  double t_prev = t1, J = left_J(t1);
  for (auto idx : order) {
    const double s = s_grid[idx];
    const double t = std::log(s);
    double Jt;
    if (t <= t1) {
      Jt = left_J(t);
    } else {
      J += piecewise(std::max(t_prev, t1), t);
      t_prev = t;
      Jt = J;
    }
    r.G[idx] = p.G(t);
    r.R[idx] = Jt / (s * s);
    // B = G'(s) / s and dG/dt = A
    r.B[idx] = p.A(t) / (s * s);
    r.speed[idx] = s * std::abs(r.R[idx]);
  }
  return r;
}

RadialTailCheck check_radial_tails(const Profile& p, const RadialProfiles& r) {
  RadialTailCheck c;
  const auto& prm = p.params();
  const double alpha = prm.alpha;
  const double M = std::exp(prm.logM), M1 = std::exp(prm.logM1);
  double sxy = 0.0, sxx = 0.0, ymax = 0.0;
  std::vector<std::pair<double, double>> xy;
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    const double s = r.s[i], t = std::log(s);
    if (s >= M) {
      const double model = alpha * std::pow(s, -alpha - 2.0);
      c.right_B_error = std::max(c.right_B_error, std::abs(r.B[i] + model) / model);
      const double y = r.R[i] - std::pow(s, -alpha) / (2.0 - alpha);
      const double x = alpha / (s * s);
      sxy += x * y;
      sxx += x * x;
      ymax = std::max(ymax, std::abs(y));
      xy.emplace_back(x, y);
      ++c.right_points;
    }
    if (s <= M1) {
      const double model = 2.0 * p.Omega_minus_inf() - 4.0 * p.c0() * s * s;
      c.left_G_error = std::max(c.left_G_error, std::abs(r.G[i] - model));
      ++c.left_points;
    }
    c.round_trip_error = std::max({c.round_trip_error, std::abs(r.R[i] - p.Omega(t)),
                                   std::abs(r.G[i] - 2.0 * p.Omega(t) - p.Omega_prime(t))});
  }
  if (sxx > 0.0) {
    c.C_fit = sxy / sxx;
    for (const auto& [x, y] : xy) c.C_error = std::max(c.C_error, std::abs(y - c.C_fit * x) / ymax);
  }
  return c;
}

StreamFunction stream_from_vorticity(int m_signed, const ComplexGrid& g, const StreamTails& tails) {
  if (m_signed == 0) throw ValidationError("stream_from_vorticity: m must be nonzero");
  if (!(g.t0 > 0.0)) throw ValidationError("stream_from_vorticity: the s grid must start above 0");
  if (g.size() < 5) throw ValidationError("stream_from_vorticity: at least five samples are needed");
  const double m = std::abs(m_signed);
  const std::size_t n = g.size();
  const double h = g.dt;
  double gmax = 0.0;
  for (const auto& v : g.values) gmax = std::max(gmax, std::abs(v));
  const double tiny = 1e-14 * std::max(gmax, 1e-300);
  if (std::abs(g.values.front()) > tiny && !tails.left_power) {
    throw ValidationError("stream_from_vorticity: g does not vanish at the inner end and no tail is declared");
  }
  if (std::abs(g.values.back()) > tiny && !tails.right_power) {
    throw ValidationError("stream_from_vorticity: g does not vanish at the outer end and no tail is declared");
  }
  std::vector<Complex> fin(n), fout(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = g.t(i);
    fin[i] = g[i] * std::pow(s, 1.0 + m);
    fout[i] = g[i] * std::pow(s, 1.0 - m);
  }
  const auto cin = cumulative(fin, derivative4(fin, h), h);
  const auto cout = cumulative(fout, derivative4(fout, h), h);

  const double s0 = g.t0, s1 = g.t_end();
  Complex left_tail{}, right_tail{};
  if (tails.left_power) {
    const double q = *tails.left_power + 2.0 + m;
    if (!(q > 0.0)) throw ValidationError("stream_from_vorticity: inner tail too singular");
    left_tail = g.values.front() * std::pow(s0, 2.0 + m) / q;
  }
  if (tails.right_power) {
    const double q = *tails.right_power + 2.0 - m;
    if (!(q < 0.0)) throw ValidationError("stream_from_vorticity: outer tail decays too slowly");
    right_tail = -g.values.back() * std::pow(s1, 2.0 - m) / q;
  }
  StreamFunction out{ComplexGrid(s0, h, n), ComplexGrid(s0, h, n), ComplexGrid(s0, h, n), ComplexGrid(s0, h, n)};
  const Complex total_out = cout.back() + right_tail;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = g.t(i);
    const Complex inner = left_tail + cin[i];
    const Complex outer = total_out - cout[i];
    out.inner[i] = inner;
    out.outer[i] = outer;
    out.psi[i] = -(std::pow(s, m) * outer + std::pow(s, -m) * inner) / (2.0 * m);
    out.dpsi[i] = -0.5 * std::pow(s, m - 1.0) * outer + 0.5 * std::pow(s, -m - 1.0) * inner;
  }
  return out;
}

double radial_laplacian_residual(int m_signed, const ComplexGrid& psi, const ComplexGrid& g, int order) {
  if (psi.size() != g.size() || psi.t0 != g.t0 || psi.dt != g.dt) {
    throw ValidationError("radial_laplacian_residual: grids differ");
  }
  if (order != 2 && order != 4) throw ValidationError("radial_laplacian_residual: order is 2 or 4");
  const double m2 = static_cast<double>(m_signed) * m_signed;
  const double h = psi.dt;
  const std::size_t w = order == 2 ? 1 : 2;
  double worst = 0.0;
  for (std::size_t i = w; i + w < psi.size(); ++i) {
    const double s = psi.t(i);
    Complex d1, d2;
    if (order == 2) {
      d1 = (psi[i + 1] - psi[i - 1]) / (2 * h);
      d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) / (h * h);
    } else {
      d1 = (psi[i - 2] - 8.0 * psi[i - 1] + 8.0 * psi[i + 1] - psi[i + 2]) / (12 * h);
      d2 = (-psi[i - 2] + 16.0 * psi[i - 1] - 30.0 * psi[i] + 16.0 * psi[i + 1] - psi[i + 2]) / (12 * h * h);
    }
    worst = std::max(worst, std::abs(d2 + d1 / s - m2 * psi[i] / (s * s) - g[i]));
  }
  return worst;
}

Complex PhysicalEigenmode::stream(double r) const {
  const double t = std::log(r);
  const Complex in = hermite_sample(inner, t, [&](std::size_t k) { return g[k] * std::exp((2.0 + m) * inner.t(k)); });
  const Complex out = hermite_sample(outer, t, [&](std::size_t k) { return -g[k] * std::exp((2.0 - m) * outer.t(k)); });
  return -(std::pow(r, m) * out + std::pow(r, -m) * in) / (2.0 * m);
}

Complex PhysicalEigenmode::stream_derivative(double r) const {
  const double t = std::log(r);
  const Complex in = hermite_sample(inner, t, [&](std::size_t k) { return g[k] * std::exp((2.0 + m) * inner.t(k)); });
  const Complex out = hermite_sample(outer, t, [&](std::size_t k) { return -g[k] * std::exp((2.0 - m) * outer.t(k)); });
  return -0.5 * std::pow(r, m - 1.0) * out + 0.5 * std::pow(r, -m - 1.0) * in;
}

Complex PhysicalEigenmode::vorticity(double r) const {
  return hermite_sample(g, std::log(r), [&](std::size_t k) { return dg[k]; });
}

double PhysicalEigenmode::r_min() const { return std::exp(g.t0); }
double PhysicalEigenmode::r_max() const { return std::exp(g.t_end()); }

PhysicalEigenmode eigenmode_to_physical(const ComplexEigenpair& pair, const Profile& p, const ModeOptions& options) {
  if (pair.psi.size() < 5 || pair.dpsi.size() != pair.psi.size()) {
    throw ValidationError("eigenmode_to_physical: the eigenpair carries no sampled eigenfunction");
  }
  const double mr = std::round(pair.m);
  if (std::abs(pair.m - mr) > 1e-12 || mr < 1) {
    throw ValidationError("eigenmode_to_physical: m must be a positive integer");
  }
  if (std::abs(pair.tail_coefficient) == 0.0) throw NumericalError("eigenmode_to_physical: zero tail coefficient");
  PhysicalEigenmode e;
  e.m = static_cast<int>(mr);
  e.mu = pair.mu;
  e.lambda = -I * mr * pair.mu;
  e.period = 2.0 * std::numbers::pi / mr;
  e.alpha = p.params().alpha;
  e.normalization = pair.mu / (e.alpha * pair.tail_coefficient);

  const auto& grid = pair.psi;
  const std::size_t n = grid.size();
  const double h = grid.dt;
  e.g = ComplexGrid(grid.t0, h, n);
  e.dg = ComplexGrid(grid.t0, h, n);
  e.psi_s = ComplexGrid(grid.t0, h, n);
  std::vector<Complex> fin(n), dfin(n), fout(n), dfout(n);
  const double m = mr;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.t(i);
    const Complex psi = e.normalization * pair.psi[i];
    const Complex dpsi = e.normalization * pair.dpsi[i];
    const double A = p.A(t), dA = p.A_derivative(t, 1);
    const Complex den = p.Omega(t) - pair.mu;
    const double w = std::exp(-2.0 * t);
    e.psi_s[i] = psi;
    e.g[i] = A * w * psi / den;
    e.dg[i] = w * (((dA - 2.0 * A) * psi + A * dpsi) / den - A * psi * p.Omega_prime(t) / (den * den));
    const double ein = std::exp((2.0 + m) * t), eout = std::exp((2.0 - m) * t);
    fin[i] = e.g[i] * ein;
    dfin[i] = (e.dg[i] + (2.0 + m) * e.g[i]) * ein;
    fout[i] = e.g[i] * eout;
    dfout[i] = (e.dg[i] + (2.0 - m) * e.g[i]) * eout;
  }
  // left of the grid g e^{(2+m)t} ~ e^{(2+2m)t}; right of it g e^{(2-m)t} ~ e^{-(2m+alpha)t}
  auto cin = cumulative(fin, dfin, h);
  auto cout = cumulative(fout, dfout, h);
  refine_critical_cells(p, pair, e.normalization, m, cin, cout, options.layer_cells);
  const Complex left_tail = fin.front() / (2.0 + 2.0 * m);
  const Complex right_tail = fout.back() / (2.0 * m + e.alpha);
  e.inner = ComplexGrid(grid.t0, h, n);
  e.outer = ComplexGrid(grid.t0, h, n);
  double psi_max = 0.0, stream_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e.inner[i] = left_tail + cin[i];
    e.outer[i] = right_tail + cout.back() - cout[i];
    const double t = grid.t(i);
    const Complex psi = -(std::exp(m * t) * e.outer[i] + std::exp(-m * t) * e.inner[i]) / (2.0 * m);
    psi_max = std::max(psi_max, std::abs(e.psi_s[i]));
    stream_err = std::max(stream_err, std::abs(psi - e.psi_s[i]));
  }
  e.stream_residual = stream_err / psi_max;

  // moment: grid part plus c s^{-alpha}/alpha, c fitted on the last decade
  const double t_end = grid.t_end();
  Complex c{};
  std::size_t count = 0;
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.t(i);
    if (t >= t_end - std::log(10.0)) {
      c += e.g[i] * std::exp((m + e.alpha + 2.0) * t);
      ++count;
    }
    if (t >= t_end - options.decay_window) {
      ts.push_back(t);
      logs.push_back(std::log(std::abs(e.g[i])));
    }
  }
  c /= static_cast<double>(count);
  e.moment = left_tail + cin.back() + c * std::exp(-e.alpha * t_end) / e.alpha;
  e.moment_residual = std::abs(pair.mu + e.alpha * e.moment / (2.0 * m)) / std::abs(pair.mu);
  e.decay_fit = fit_slope(ts, logs);
  e.degenerate = std::abs(e.moment) < options.moment_tol;
  return e;
}

AnnulusGrid default_annulus(const Profile& p, int n) {
  const double logM = p.params().logM;
  return {n, std::exp(logM + 0.25), std::exp(logM + 1.25)};
}

VelocityField perturbation_velocity(const PhysicalEigenmode& mode, const AnnulusGrid& grid) {
  if (grid.n < 8) throw ValidationError("perturbation_velocity: grid too small");
  if (!(grid.r_in > 0.0) || !(grid.r_out > grid.r_in)) throw ValidationError("perturbation_velocity: bad annulus");
  const double dx = grid.spacing();
  const double lo = grid.r_in - 3.0 * dx, reach = grid.r_out + 3.0 * dx;
  if (lo <= mode.r_min() || lo <= 0.0) {
    throw ValidationError("perturbation_velocity: the annulus reaches the origin region below s_min");
  }
  if (reach >= mode.r_max()) throw ValidationError("perturbation_velocity: the annulus leaves the mode's window");
  VelocityField f;
  f.grid = grid;
  const std::size_t total = static_cast<std::size_t>(grid.n) * grid.n;
  f.wx.assign(total, Complex{});
  f.wy.assign(total, Complex{});
  const double m = mode.m;
  for (int j = 0; j < grid.n; ++j) {
    const double y = grid.coord(j);
    for (int i = 0; i < grid.n; ++i) {
      const double x = grid.coord(i);
      const double r = std::hypot(x, y);
      if (r < lo || r > reach) continue;
      const Complex phase = std::pow(Complex(x, y) / r, m);
      const Complex psi = mode.stream(r), dpsi = mode.stream_derivative(r);
      const Complex a = dpsi * phase / r, b = -I * m * psi * phase / (r * r);
      const auto k = static_cast<std::size_t>(j) * grid.n + i;
      f.wx[k] = -a * y + b * x;
      f.wy[k] = a * x + b * y;
    }
  }
  return f;
}

VelocityResiduals velocity_residuals(const PhysicalEigenmode& mode, const VelocityField& field) {
  const auto& grid = field.grid;
  const double h = grid.spacing();
  VelocityResiduals res;
  double div_max = 0.0, curl_max = 0.0;
  auto d = [&](auto get, int i, int j, int di, int dj) {
    return (get(i - 2 * di, j - 2 * dj) - 8.0 * get(i - di, j - dj) + 8.0 * get(i + di, j + dj) -
            get(i + 2 * di, j + 2 * dj)) /
           (12.0 * h);
  };
  auto wx = [&](int i, int j) { return field.at_x(i, j); };
  auto wy = [&](int i, int j) { return field.at_y(i, j); };
  for (int j = 2; j + 2 < grid.n; ++j) {
    const double y = grid.coord(j);
    for (int i = 2; i + 2 < grid.n; ++i) {
      const double x = grid.coord(i);
      const double r = std::hypot(x, y);
      if (r < grid.r_in || r > grid.r_out) continue;
      const Complex div = d(wx, i, j, 1, 0) + d(wy, i, j, 0, 1);
      const Complex curl = d(wy, i, j, 1, 0) - d(wx, i, j, 0, 1);
      const Complex g = std::pow(Complex(x, y) / r, static_cast<double>(mode.m)) * mode.vorticity(r);
      res.max_vorticity = std::max(res.max_vorticity, std::abs(g));
      div_max = std::max(div_max, std::abs(div));
      curl_max = std::max(curl_max, std::abs(curl - g));
      ++res.points;
    }
  }
  if (res.points == 0 || res.max_vorticity == 0.0) {
    throw NumericalError("velocity_residuals: no vorticity on the annulus");
  }
  res.divergence = div_max / res.max_vorticity;
  res.curl = curl_max / res.max_vorticity;
  return res;
}

}  // namespace vstab
