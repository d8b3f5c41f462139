#include "vstab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "vstab/errors.hpp"

namespace vstab {

namespace {

Jet2 left_tail_jet(double c0, double t) {
  const double v = -8.0 * c0 * std::exp(2.0 * t);
  return {v, 2.0 * v, 4.0 * v};
}

Jet2 right_tail_jet(double alpha, double t) {
  const double v = -alpha * std::exp(-alpha * t);
  return {v, -alpha * v, alpha * alpha * v};
}

}  // namespace

PiecewiseA::PiecewiseA(double c0, double alpha, double logM1, double logM,
                       std::vector<HermiteKnot> interior)
    : c0_(c0), alpha_(alpha), logM1_(logM1), logM_(logM) {
  std::sort(interior.begin(), interior.end(),
            [](const HermiteKnot& x, const HermiteKnot& y) { return x.t < y.t; });
  knots_.push_back({logM1, left_tail_jet(c0, logM1)});
  for (const auto& k : interior) {
    if (!(k.t > knots_.back().t) || !(k.t < logM)) {
      throw ValidationError("PiecewiseA: interior knots must be distinct and inside (logM1, logM)");
    }
    knots_.push_back(k);
  }
  knots_.push_back({logM, right_tail_jet(alpha, logM)});

  cum_left_.push_back(-4.0 * c0 * std::exp(2.0 * logM1));
  cum_weighted_.push_back(-2.0 * c0 * std::exp(4.0 * logM1));
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    const double h = knots_[k + 1].t - knots_[k].t;
    segs_.push_back(Quintic::hermite(knots_[k].jet, knots_[k + 1].jet, h));
    cum_left_.push_back(cum_left_.back() + segs_.back().integral(h));
    cum_weighted_.push_back(cum_weighted_.back() + std::exp(2.0 * knots_[k].t) *
                                                       segs_.back().exp_weighted_integral(2.0, h));
  }
  total_ = cum_left_.back() - std::exp(-alpha * logM);
}

std::vector<HermiteKnot> PiecewiseA::interior_knots() const {
  return {knots_.begin() + 1, knots_.end() - 1};
}

std::size_t PiecewiseA::segment(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const HermiteKnot& k) { return x < k.t; });
  auto idx = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, segs_.size() - 1);
}

double PiecewiseA::value(double t) const {
  if (t <= logM1_) return -8.0 * c0_ * std::exp(2.0 * t);
  if (t >= logM_) return -alpha_ * std::exp(-alpha_ * t);
  const auto k = segment(t);
  return segs_[k](t - knots_[k].t);
}

double PiecewiseA::derivative(double t, int order) const {
  if (order == 0) return value(t);
  if (t <= logM1_) return -8.0 * c0_ * std::pow(2.0, order) * std::exp(2.0 * t);
  if (t >= logM_) return -alpha_ * std::pow(-alpha_, order) * std::exp(-alpha_ * t);
  const auto k = segment(t);
  return segs_[k].derivative(t - knots_[k].t, order);
}

double PiecewiseA::integral_from_left(double t) const {
  if (t <= logM1_) return -4.0 * c0_ * std::exp(2.0 * t);
  if (t >= logM_) return total_ + std::exp(-alpha_ * t);
  const auto k = segment(t);
  return cum_left_[k] + segs_[k].integral(t - knots_[k].t);
}

double PiecewiseA::integral_to_right(double t) const {
  if (t >= logM_) return -std::exp(-alpha_ * t);
  if (t <= logM1_) return total_ + 4.0 * c0_ * std::exp(2.0 * t);
  const auto k = segment(t);
  const double rest = cum_left_.back() - cum_left_[k] - segs_[k].integral(t - knots_[k].t);
  return rest - std::exp(-alpha_ * logM_);
}

double PiecewiseA::weighted_integral(double t) const {
  if (t <= logM1_) return -2.0 * c0_ * std::exp(4.0 * t);
  if (t >= logM_) {
    const double r = 2.0 - alpha_;
    return cum_weighted_.back() - alpha_ / r * (std::exp(r * t) - std::exp(r * logM_));
  }
  const auto k = segment(t);
  const double tk = knots_[k].t;
  return cum_weighted_[k] + std::exp(2.0 * tk) * segs_[k].exp_weighted_integral(2.0, t - tk);
}

// ---------------------------------------------------------------------------

Profile::Profile(ProfileParams params, std::vector<Term> terms, std::string kind, double resolution)
    : params_(params), terms_(std::move(terms)), kind_(std::move(kind)), resolution_(resolution) {
  if (terms_.empty()) throw ValidationError("Profile: at least one term is required");
  if (!(resolution_ > 0.0)) throw ValidationError("Profile: resolution must be positive");
  double total = 0.0, k_tail = 0.0;
  const double r = 2.0 - params_.alpha;
  for (const auto& term : terms_) {
    total += term.weight * term.a.total_integral();
    const double wM = term.a.weighted_integral(term.a.logM());
    k_tail += term.weight * (wM + params_.alpha / r * std::exp(r * term.a.logM()));
  }
  omega_minus_inf_ = -0.5 * total;
  tail_constant_ = -k_tail / (2.0 * params_.alpha);
}

Profile Profile::from_knots(const ProfileParams& params, std::vector<HermiteKnot> interior) {
  PiecewiseA a(params.c0, params.alpha, params.logM1, params.logM, std::move(interior));
  double resolution = 0.5;
  const auto& k = a.knots();
  for (std::size_t i = 2; i + 1 < k.size(); ++i) resolution = std::min(resolution, k[i].t - k[i - 1].t);
  return Profile(params, {Term{1.0, std::move(a)}}, "custom", resolution);
}

double Profile::A(double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.a.value(t);
  return s;
}

double Profile::A_derivative(double t, int order) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.a.derivative(t, order);
  return s;
}

double Profile::G(double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s -= term.weight * term.a.integral_to_right(t);
  return s;
}

double Profile::weighted_integral(double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.a.weighted_integral(t);
  return s;
}

double Profile::Omega_prime(double t) const {
  if (t >= params_.logM) {
    const double alpha = params_.alpha;
    return -2.0 * alpha * tail_constant_ * std::exp(-2.0 * t) -
           alpha / (2.0 - alpha) * std::exp(-alpha * t);
  }
  return std::exp(-2.0 * t) * weighted_integral(t);
}

double Profile::Omega(double t) const {
  if (t >= params_.logM) {
    const double alpha = params_.alpha;
    return tail_constant_ * alpha * std::exp(-2.0 * t) + std::exp(-alpha * t) / (2.0 - alpha);
  }
  if (t <= params_.logM1) return omega_minus_inf_ - c0() * std::exp(2.0 * t);
  return 0.5 * (G(t) - Omega_prime(t));
}

double Profile::c0() const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.a.c0();
  return s;
}

std::vector<double> Profile::knot_locations() const {
  std::vector<double> out;
  for (const auto& term : terms_)
    for (const auto& k : term.a.knots()) out.push_back(k.t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------

void check_params(const ProfileParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 2.0)) {
    throw ValidationError("alpha must lie in (0, 2), got " + std::to_string(p.alpha));
  }
  if (!(p.logM1 < p.a && p.a < p.b && p.b < p.logM)) {
    throw ValidationError("knot order logM1 < a < b < logM violated");
  }
  if (!(p.B >= 0.0) || !std::isfinite(p.B)) throw ValidationError("deep-well strength B must be >= 0");
  if (!(p.c0 > 0.0)) throw ValidationError("left-tail amplitude c0 must be positive");
  const auto& s = p.shape;
  if (!(s.hump_height > 0.0 && s.hump_height < std::exp(-2.0))) {
    throw ValidationError("hump_height must lie in (0, e^-2)");
  }
  if (!(s.plateau_end > p.a && s.plateau_end < p.b)) {
    throw ValidationError("plateau_end must lie in (a, b)");
  }
  if (!(s.right_trough > 0.0 && s.right_trough < 1.0)) {
    throw ValidationError("right_trough must lie in (0, 1)");
  }
  if (!(s.trough_width > 0.0 && s.base_width > 0.0 && s.g0_target > 0.0 &&
        s.min_right_depth > 0.0)) {
    throw ValidationError("shape widths and targets must be positive");
  }
}

namespace {

struct LeftDesign {
  std::vector<HermiteKnot> knots(double base_level) const {
    auto out = fixed;
    out.insert(out.begin(), HermiteKnot{base_t, {base_level, 0.0, 0.0}});
    return out;
  }
  double base_t = 0.0;
  std::vector<HermiteKnot> fixed;  // knots right of base_t, up to and including t = 0
};

LeftDesign left_design(const ProfileParams& p) {
  LeftDesign d;
  const auto& s = p.shape;
  if (p.B > 0.0) {
    const double B = p.B;
    const double eps = 1e-2 / std::sqrt(B);
    const double w = s.trough_width / std::sqrt(std::max(B, 1.0));
    const Jet2 at_eps{(4.0 + B) * (-eps) + B * eps * eps, (4.0 + B) - 2.0 * B * eps, 2.0 * B};
    const double trough_t = -eps - w;
    const double trough_level = at_eps.value - 0.5 * at_eps.slope * w;
    d.base_t = trough_t - w;
    d.fixed = {{trough_t, {trough_level, 0.0, 0.0}},
               {-eps, at_eps},
               {0.0, {0.0, 4.0 + B, 2.0 * B}}};
  } else {
    d.base_t = -s.base_width;
    d.fixed = {{0.0, {0.0, 4.0, 0.0}}};
  }
  if (!(d.base_t > p.logM1 + 0.1)) {
    throw ConstructionError("left_bridge",
                            "trough does not fit between logM1 and a; widen logM1 or narrow the trough");
  }
  return d;
}

std::vector<HermiteKnot> right_knots(const ProfileParams& p, double depth) {
  const auto& s = p.shape;
  const double h = s.hump_height;
  const double slope0 = p.B > 0.0 ? 4.0 + p.B : 4.0;
  const double rise = 2.0 * h / slope0;
  if (!(rise < s.plateau_end)) {
    throw ConstructionError("hump", "rise to the plateau overlaps plateau_end");
  }
  const double s1 = -2.0 * h / (p.b - s.plateau_end);
  const double q = p.b + s.right_trough * (p.logM - p.b);
  return {{rise, {h, 0.0, 0.0}},
          {s.plateau_end, {h, 0.0, 0.0}},
          {p.b, {0.0, s1, 0.0}},
          {q, {-depth, 0.0, 0.0}}};
}

}  // namespace

Profile build_deep_well(const ProfileParams& params) {
  check_params(params);
  if (params.a != 0.0 || params.b != 1.0) {
    throw ValidationError("the deep-well family is defined with a = 0, b = 1");
  }
  const auto left = left_design(params);

  auto assemble = [&](double base_level, double depth) {
    auto knots = left.knots(base_level);
    auto right = right_knots(params, depth);
    knots.insert(knots.end(), right.begin(), right.end());
    return PiecewiseA(params.c0, params.alpha, params.logM1, params.logM, std::move(knots));
  };

  // Both unknowns enter A linearly; the two affine solves are decoupled by the knot at t = 0.
  const double w0 = assemble(0.0, 0.0).weighted_integral(0.0);
  const double w1 = assemble(1.0, 0.0).weighted_integral(0.0);
  const double base_level = (-1.0 - w0) / (w1 - w0);
  if (!(base_level < 0.0)) {
    throw ConstructionError("normalization",
                            "left extension cannot reach int e^{2t} A = -1 with a negative base level");
  }
  const double g0 = -assemble(base_level, 0.0).integral_to_right(0.0);
  const double g1 = -assemble(base_level, 1.0).integral_to_right(0.0);
  const double depth =
      std::max(params.shape.min_right_depth, (params.shape.g0_target - g0) / (g1 - g0));

  const double slope0 = params.B > 0.0 ? 4.0 + params.B : 4.0;
  const double rise = 2.0 * params.shape.hump_height / slope0;
  const double well = params.B > 0.0 ? params.shape.trough_width / std::sqrt(std::max(params.B, 1.0))
                                     : params.shape.base_width;
  Profile prof(params, {Profile::Term{1.0, assemble(base_level, depth)}},
               params.B > 0.0 ? "deep_well" : "baseline", std::min(well, rise));

  const auto report = validate_class_C(prof);
  for (const auto& c : report.checks) {
    if (!c.passed) throw ConstructionError(c.name, c.detail);
  }
  // hump bound of the family: 0 < A < e^{-2} on (a, b)
  const double cap = std::exp(-2.0);
  for (int i = 1; i < 4000; ++i) {
    const double t = i / 4000.0;
    const double v = prof.A(t);
    if (!(v > 0.0 && v < cap)) {
      throw ConstructionError("hump", "A leaves (0, e^-2) on (a, b) at t = " + std::to_string(t));
    }
  }
  return prof;
}

Profile blend(const Profile& p0, const Profile& p1, double theta) {
  const auto& a = p0.params();
  const auto& b = p1.params();
  if (a.alpha != b.alpha || a.a != b.a || a.b != b.b || a.logM1 != b.logM1 || a.logM != b.logM) {
    throw ValidationError("blend: profiles must share alpha, a, b, logM1 and logM");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("blend: theta must lie in [0, 1]");
  std::vector<Profile::Term> terms;
  for (const auto& t : p0.terms()) terms.push_back({(1.0 - theta) * t.weight, t.a});
  for (const auto& t : p1.terms()) terms.push_back({theta * t.weight, t.a});
  ProfileParams params = a;
  params.c0 = (1.0 - theta) * a.c0 + theta * b.c0;
  params.B = (1.0 - theta) * a.B + theta * b.B;
  return Profile(params, std::move(terms), "blend", std::min(p0.resolution(), p1.resolution()));
}

// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  return os.str();
}

namespace {

double omega_by_quadrature(const Profile& p, double t) {
  // Omega(t) = int_{-inf}^t e^{-2(t - tau)} G(tau) dtau. G is smooth between knots, so a
  // fixed Gauss rule on short pieces between the knots is accurate to round-off.
  const auto& par = p.params();
  const double lo = par.logM1 - 30.0;
  std::vector<double> cuts{lo};
  for (double k : p.knot_locations())
    if (k > lo && k < t) cuts.push_back(k);
  cuts.push_back(t);
  auto f = [&](double tau) { return std::exp(-2.0 * (t - tau)) * p.G(tau); };
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    for (int j = 0; j < pieces; ++j) {
      const double x0 = cuts[i] + len * j / pieces;
      const double x1 = cuts[i] + len * (j + 1) / pieces;
      s += boost::math::quadrature::gauss<double, 20>::integrate(f, x0, x1);
    }
  }
  // below lo, G = G(-inf) - 4 c0 e^{2 tau} up to e^{-60}
  s += std::exp(-2.0 * (t - lo)) * 0.5 * p.G(lo);
  return s;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

ValidationReport validate_class_C(const Profile& p) {
  ValidationReport r;
  const auto& par = p.params();
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    r.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  add("alpha_range", par.alpha > 0.0 && par.alpha < 2.0, "alpha = " + fmt(par.alpha));
  add("knot_order", par.logM1 < par.a && par.a < par.b && par.b < par.logM);
  add("left_tail_amplitude", p.c0() > 0.0, "c0 = " + fmt(p.c0()));

  // sample grid: uniform plus the knots and both zeros
  std::vector<double> ts;
  const double lo = par.logM1 - 2.0, hi = par.logM + 2.0;
  const int n = static_cast<int>((hi - lo) / 1e-3);
  for (int i = 0; i <= n; ++i) ts.push_back(lo + (hi - lo) * i / n);
  for (double k : p.knot_locations()) ts.push_back(k);
  ts.push_back(par.a);
  ts.push_back(par.b);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  // sign changes of A
  std::vector<double> roots;
  std::vector<int> directions;
  int prev_sign = 0;
  double prev_t = lo;
  for (double t : ts) {
    const double v = p.A(t);
    const int s = (v > 0.0) - (v < 0.0);
    if (s == 0) continue;
    if (prev_sign != 0 && s != prev_sign) {
      roots.push_back(0.5 * (prev_t + t));
      directions.push_back(s);
    }
    prev_sign = s;
    prev_t = t;
  }
  {
    bool ok = roots.size() == 2;
    std::string detail = std::to_string(roots.size()) + " sign changes";
    if (ok) {
      const double tol = 0.05;
      ok = std::abs(roots[0] - par.a) < tol && directions[0] > 0 &&
           std::abs(roots[1] - par.b) < tol && directions[1] < 0;
      if (!ok) detail += " not at (a, b) with the required directions";
    }
    add("A_two_simple_zeros", ok, detail);
  }
  add("A_zero_at_a", std::abs(p.A(par.a)) < 1e-12 && p.A_derivative(par.a) > 0.0,
      "A(a) = " + fmt(p.A(par.a)) + ", A'(a) = " + fmt(p.A_derivative(par.a)));
  add("A_zero_at_b", std::abs(p.A(par.b)) < 1e-12 && p.A_derivative(par.b) < 0.0,
      "A(b) = " + fmt(p.A(par.b)) + ", A'(b) = " + fmt(p.A_derivative(par.b)));

  double worst_w = -1e300, worst_op = -1e300, min_g = 1e300, min_om = 1e300;
  for (double t : ts) {
    worst_w = std::max(worst_w, p.weighted_integral(t));
    worst_op = std::max(worst_op, p.Omega_prime(t));
    min_g = std::min(min_g, p.G(t));
    min_om = std::min(min_om, p.Omega(t));
  }
  add("weighted_integral_negative", worst_w < 0.0, "max = " + fmt(worst_w));
  add("Omega_decreasing", worst_op < 0.0, "max Omega' = " + fmt(worst_op));
  add("Omega_minus_inf_positive", p.Omega_minus_inf() > 0.0, "Omega(-inf) = " + fmt(p.Omega_minus_inf()));
  add("G_positive", min_g > 0.0, "min G = " + fmt(min_g));
  add("Omega_positive", min_om > 0.0, "min Omega = " + fmt(min_om));

  {
    double err = 0.0;
    for (double t : {par.logM1 - 3.0, par.logM1 - 1.0, par.logM1}) {
      const double expect = p.Omega_minus_inf() - p.c0() * std::exp(2.0 * t);
      err = std::max(err, std::abs(omega_by_quadrature(p, t) - expect));
      err = std::max(err, std::abs(p.A(t) + 8.0 * p.c0() * std::exp(2.0 * t)));
    }
    add("left_tail_formula", err < 1e-9, "max deviation " + fmt(err));
  }
  {
    double err = 0.0;
    const double al = par.alpha;
    for (double t : {par.logM, par.logM + 1.0, par.logM + 3.0}) {
      const double om = p.tail_constant() * al * std::exp(-2.0 * t) + std::exp(-al * t) / (2.0 - al);
      err = std::max(err, std::abs(omega_by_quadrature(p, t) - om));
      err = std::max(err, std::abs(p.G(t) - std::exp(-al * t)));
      err = std::max(err, std::abs(p.A(t) + al * std::exp(-al * t)));
    }
    add("right_tail_formula", err < 1e-9, "max deviation " + fmt(err));
  }
  {
    double err = 0.0;
    for (double t : {par.a - 0.5, par.a, 0.5 * (par.a + par.b), par.b, par.b + 0.5}) {
      err = std::max(err, std::abs(omega_by_quadrature(p, t) - p.Omega(t)));
    }
    add("Omega_quadrature_consistency", err < 1e-9, "max deviation " + fmt(err));
  }
  return r;
}

}  // namespace vstab
