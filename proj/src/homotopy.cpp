#include "vstab/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "vstab/errors.hpp"

namespace vstab {

void GapCurves::insert(const GapRow& row) {
  auto it = std::lower_bound(rows.begin(), rows.end(), row.theta,
                             [](const GapRow& r, double t) { return r.theta < t; });
  if (it != rows.end() && it->theta == row.theta) {
    *it = row;
  } else {
    rows.insert(it, row);
  }
}

double GapCurves::N_interpolated(double theta) const {
  if (rows.empty()) throw ValidationError("GapCurves: empty table");
  if (theta <= rows.front().theta) return rows.front().N;
  if (theta >= rows.back().theta) return rows.back().N;
  auto it = std::lower_bound(rows.begin(), rows.end(), theta,
                             [](const GapRow& r, double t) { return r.theta < t; });
  const auto& r = *it;
  const auto& l = *(it - 1);
  const double w = (theta - l.theta) / (r.theta - l.theta);
  return l.N + w * (r.N - l.N);
}

Profile BlendFamily::at(double theta) const {
  auto p = blend(p0_, p1_, theta);
  const auto report = validate_class_C(p);
  if (!report.all_passed()) {
    throw ValidationError("blend at theta = " + std::to_string(theta) + " fails the class checks: " + report.summary());
  }
  return p;
}

GapRow BlendFamily::row(double theta) {
  if (auto it = cache_.find(theta); it != cache_.end()) return it->second;
  const auto cw = critical_wavenumbers(at(theta));
  GapRow r{theta, cw.m_a, cw.m_b};
  cache_.emplace(theta, r);
  return r;
}

namespace {

GapRow gap_row(const Profile& p0, const Profile& p1, double theta) {
  BlendFamily family(p0, p1);
  return family.row(theta);
}

}  // namespace

GapCurves gap_curves_serial(const Profile& p0, const Profile& p1, const std::vector<double>& grid) {
  GapCurves c;
  for (double theta : grid) c.insert(gap_row(p0, p1, theta));
  return c;
}

GapCurves gap_curves(const Profile& p0, const Profile& p1, const std::vector<double>& grid) {
  std::vector<GapRow> rows(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  const auto n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      rows[i] = gap_row(p0, p1, grid[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  GapCurves c;
  for (const auto& r : rows) c.insert(r);
  return c;
}

std::vector<double> uniform_theta_grid(int samples) {
  if (samples < 2) throw ValidationError("theta grid needs at least two samples");
  std::vector<double> g(samples);
  for (int i = 0; i < samples; ++i) g[i] = static_cast<double>(i) / (samples - 1);
  return g;
}

ThetaCrossing find_theta0(const GapCurves& curves, int m, const std::function<double(double)>& N_of_theta,
                          double tol) {
  const auto& rows = curves.rows;
  if (rows.size() < 2) throw ValidationError("find_theta0: need at least two samples");
  const double target = m;
  if (!(rows.front().N < target)) {
    throw ValidationError("find_theta0: N at theta = " + std::to_string(rows.front().theta) + " is " +
                          std::to_string(rows.front().N) + ", not below m = " + std::to_string(m));
  }
  if (!(rows.back().N > target)) {
    throw ValidationError("find_theta0: N at theta = " + std::to_string(rows.back().theta) + " is " +
                          std::to_string(rows.back().N) + ", not above m = " + std::to_string(m));
  }
  std::size_t k = rows.size() - 1;
  while (rows[k - 1].N > target) --k;
  // bracket [rows[k-1], rows[k]] with every sample from k on above m
  const auto N = N_of_theta ? N_of_theta : [&](double t) { return curves.N_interpolated(t); };
  double lo = rows[k - 1].theta, hi = rows[k].theta;
  ThetaCrossing x;
  double nlo = rows[k - 1].N, nhi = rows[k].N;
  double mid = lo, nmid = nlo;
  for (int it = 0; it < 200; ++it) {
    // regula falsi guard: secant point kept inside the middle half of the bracket
    const double w = std::clamp((target - nlo) / (nhi - nlo), 0.25, 0.75);
    mid = lo + w * (hi - lo);
    nmid = N(mid);
    ++x.bisection_steps;
    if (std::abs(nmid - target) < tol) break;
    if (nmid > target) {
      hi = mid;
      nhi = nmid;
    } else {
      lo = mid;
      nlo = nmid;
    }
    if (hi - lo < 1e-14) break;
  }
  if (!(std::abs(nmid - target) < tol)) {
    throw NumericalError("find_theta0: no theta with |N - m| < tol in [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  x.theta0 = mid;
  x.N_at_theta0 = nmid;
  return x;
}

DeltaChoice select_delta(const std::function<GapRow(double)>& row_at, double theta0, int m, double margin, int K,
                         int levels) {
  if (!(margin > 0.0)) throw ValidationError("select_delta: margin must be positive");
  if (!(margin < 0.5)) throw ValidationError("select_delta: margin must be below 1/2");
  if (K < 1 || levels < 1) throw ValidationError("select_delta: grid needs K >= 1 and at least one level");
  if (!(theta0 >= 0.0 && theta0 < 1.0)) throw ValidationError("select_delta: theta0 must lie in [0, 1)");
  auto admissible = [&](const GapRow& r) {
    return r.W < m - margin && r.N > m + margin && r.N < m + 1 - margin;
  };
  DeltaChoice best;
  bool found = false;
  for (int level = 0, n = K; level < levels; ++level, n *= 2) {
    const double step = (1.0 - theta0) / n;
    // grid points beyond the coarser level's answer cannot improve it
    const int last = found ? static_cast<int>(std::ceil(best.delta / step - 1e-9)) : n;
    for (int k = 1; k <= last; ++k) {
      const double delta = k * step;
      const auto r = row_at(std::min(1.0, theta0 + delta));
      if (admissible(r)) {
        if (!found || delta <= best.delta) {
          best.delta = delta;
          best.row = r;
        }
        found = true;
        break;
      }
    }
    if (found) best.by_level.push_back(best.delta);
  }
  if (!found) {
    throw NumericalError("select_delta: no admissible delta on (0, " + std::to_string(1.0 - theta0) + "] for m = " +
                         std::to_string(m));
  }
  return best;
}

int choose_wavenumber(double N0, std::optional<int> hint) {
  if (hint) {
    if (*hint < 2 || !(*hint > N0)) {
      throw ValidationError("m = " + std::to_string(*hint) + " must be an integer >= 2 above N0 = " +
                            std::to_string(N0));
    }
    return *hint;
  }
  return std::max(2, static_cast<int>(std::floor(N0)) + 1);
}

bool HomotopyResult::certified() const {
  const auto& cw = final_wavenumbers;
  if (!(cw.m_b < m && m < cw.m_a && cw.m_a < m + 1)) return false;
  if (!(eigenpair.mu.imag() > 0.0) || !eigenpair.residuals.acceptable()) return false;
  if (!multi.all_converged() || multi.spread > 1e-8) return false;
  if (!(branch_agreement < 1e-6)) return false;
  if (!unstable_scan.conclusive || unstable_scan.winding != 1) return false;
  if (exclusions.empty()) return false;
  return std::all_of(exclusions.begin(), exclusions.end(), [](const auto& c) { return c.certifies_empty(); });
}

namespace {

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(name + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

HomotopyResult construct_unstable_profile(double alpha, const HomotopyOptions& options) {
  auto log = [&](const std::string& s) {
    if (options.log) options.log(s);
  };
  HomotopyResult r;
  r.alpha = alpha;
  ProfileParams base = options.base;
  base.alpha = alpha;
  base.B = 0.0;

  r.baseline = stage("baseline", [&] { return build_deep_well(base); });
  r.N0 = stage("baseline spectrum", [&] { return critical_wavenumbers(r.baseline).m_a; });
  r.m = stage("choose m", [&] { return choose_wavenumber(r.N0, options.m_hint); });
  log("N0 = " + std::to_string(r.N0) + ", m = " + std::to_string(r.m));

  const auto sweep = stage("deep-well sweep", [&] {
    auto s = sweep_deep_well(base, options.B_grid, r.m + options.headroom);
    if (!s.reached()) throw NumericalError("no B on the grid reaches N1 >= m + headroom");
    return s;
  });
  r.sweep = sweep.rows;
  r.B = sweep.B_star;
  ProfileParams deep = base;
  deep.B = r.B;
  r.deep_well = stage("deep well", [&] { return build_deep_well(deep); });
  r.N1 = sweep.rows.back().m_a;
  log("B = " + std::to_string(r.B) + ", N1 = " + std::to_string(r.N1));

  BlendFamily family(r.baseline, r.deep_well);
  const auto grid = uniform_theta_grid(options.theta_samples);
  r.curves = stage("gap curves", [&] {
    return options.parallel ? gap_curves(r.baseline, r.deep_well, grid)
                            : gap_curves_serial(r.baseline, r.deep_well, grid);
  });
  for (const auto& row : r.curves.rows) {
    if (!(row.W < row.N)) r.warnings.push_back("W >= N at theta = " + std::to_string(row.theta));
  }
  auto row_at = [&](double theta) {
    const auto row = family.row(theta);
    r.curves.insert(row);
    return row;
  };
  const auto crossing = stage("theta0", [&] {
    const GapCurves table = r.curves;
    return find_theta0(table, r.m, [&](double t) { return row_at(t).N; });
  });
  r.theta0 = crossing.theta0;
  log("theta0 = " + std::to_string(r.theta0));
  const auto choice = stage("delta", [&] {
    return select_delta(row_at, r.theta0, r.m, options.margin, options.delta_K, options.delta_levels);
  });
  r.delta = choice.delta;
  log("delta = " + std::to_string(r.delta));

  const double theta = std::min(1.0, r.theta0 + r.delta);
  r.final = stage("final profile", [&] { return family.at(theta); });
  r.final_wavenumbers = stage("final spectrum", [&] { return critical_wavenumbers(r.final); });
  const auto& cw = r.final_wavenumbers;
  log("final m_a = " + std::to_string(cw.m_a) + ", m_b = " + std::to_string(cw.m_b));
  if (!(cw.m_b < r.m && r.m < cw.m_a && cw.m_a < r.m + 1)) {
    throw StageError("final spectrum", "m_b < m < m_a < m + 1 fails on the final profile");
  }

  const double omega_inf = r.final.Omega_minus_inf();
  const double delta_min = options.delta_min_factor * omega_inf;
  r.branch = stage("branch", [&] {
    BranchOptions bo;
    bo.delta_min = delta_min;
    bo.find = options.find;
    return trace_branch(r.final, cw, bo);
  });
  r.eigenpair = stage("eigenpair", [&] {
    // seed from the branch samples bracketing m
    const auto& s = r.branch.samples;
    auto it = std::min_element(s.begin(), s.end(), [&](const auto& x, const auto& y) {
      return std::abs(x.m - r.m) < std::abs(y.m - r.m);
    });
    Complex seed = it->mu + (r.m - it->m) * it->dmu_dm;
    if (!(seed.imag() > 0.0)) seed = Complex(seed.real(), 0.5 * it->mu.imag());
    return find_eigenvalue(r.final, r.m, seed, options.find);
  });
  log("mu = " + std::to_string(r.eigenpair.mu.real()) + " + " + std::to_string(r.eigenpair.mu.imag()) + "i");
  r.multi = stage("multi-start", [&] {
    const Complex mu = r.eigenpair.mu;
    const double w = options.multi_start_box * omega_inf;
    const Contour box{mu.real() - w, mu.real() + w, 0.5 * mu.imag(), mu.imag() + w};
    FindOptions fo = options.find;
    fo.sample = false;
    return multi_start(r.final, r.m, box, options.multi_start_seeds, options.seed, fo);
  });
  {
    const auto& s = r.branch.samples;
    auto it = std::min_element(s.begin(), s.end(), [&](const auto& x, const auto& y) {
      return std::abs(x.m - r.m) < std::abs(y.m - r.m);
    });
    FindOptions fo = options.find;
    fo.sample = false;
    try {
      const auto corrected = find_eigenvalue(r.final, r.m, it->mu + (r.m - it->m) * it->dmu_dm, fo);
      r.branch_agreement = std::abs(corrected.mu - r.eigenpair.mu);
    } catch (const NumericalError& e) {
      r.branch_agreement = std::numeric_limits<double>::infinity();
      r.warnings.push_back(std::string("branch corrector at m failed: ") + e.what());
    }
  }
  if (!(r.branch_agreement < 1e-6)) r.warnings.push_back("traced branch misses the eigenvalue at m by more than 1e-6");
  if (!r.multi.all_converged()) r.warnings.push_back("some multi-start seeds did not converge");

  const auto contour = default_contour(r.final, options.delta_min_factor);
  r.unstable_scan = stage("scan at m", [&] {
    // the eigenvalue may sit below delta_min when m is close to m_a
    Contour c = contour;
    c.im_lo = std::min(c.im_lo, 0.5 * r.eigenpair.mu.imag());
    return scan_no_eigenvalue(r.final, r.m, c);
  });
  std::vector<double> ms;
  for (int l = 1; l <= options.extra_exclusions; ++l) ms.push_back(r.m + l);
  const double large = 2.0 * std::ceil(cw.m_a);
  if (std::find(ms.begin(), ms.end(), large) == ms.end()) ms.push_back(large);
  for (double mm : ms) {
    r.exclusions.push_back(stage("exclusion at m = " + std::to_string(static_cast<int>(mm)),
                                 [&] { return scan_no_eigenvalue(r.final, mm, contour); }));
    log("winding at m = " + std::to_string(mm) + ": " + std::to_string(r.exclusions.back().winding));
  }
  if (contour.im_lo > 1e-2 * omega_inf) {
    r.warnings.push_back("delta_min above 1e-2 Omega(-inf): certificates are weakened");
  }
  return r;
}

}  // namespace vstab
