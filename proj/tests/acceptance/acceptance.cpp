// Acceptance run: one PASS/FAIL line per criterion. The end-to-end constructions run first
// and their final profiles feed the criteria that need them.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "vstab/dispersion.hpp"
#include "vstab/errors.hpp"
#include "vstab/greens_kernel.hpp"
#include "vstab/lambda_oracle.hpp"
#include "vstab/physical_map.hpp"
#include "vstab/profile_io.hpp"
#include "vstab/sturm_spectrum.hpp"

using namespace vstab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Construction {
  double alpha = 0.0;
  int exit_code = -1;
  double seconds = 0.0;
  json summary;
  std::optional<Profile> final_profile;
  std::optional<Profile> baseline, deep_well;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Construction construct(double alpha, const fs::path& work) {
  Construction c;
  c.alpha = alpha;
  cli::RunConfig rc;
  rc.command = "theorem11";
  rc.profile.alpha = alpha;
  rc.out = work / fmt("alpha_%.2f", alpha);
  rc.verbose = true;
  const auto t0 = std::chrono::steady_clock::now();
  c.exit_code = cli::run(rc);
  c.seconds = seconds_since(t0);
  std::ifstream in(rc.out / "summary.json");
  c.summary = json::parse(in, nullptr, false);
  if (fs::exists(rc.out / "final_profile.json")) c.final_profile = load_profile(rc.out / "final_profile.json");
  ProfileParams p;
  p.alpha = alpha;
  c.baseline = build_deep_well(p);
  if (c.summary.is_object() && c.summary.contains("B")) {
    p.B = c.summary["B"].get<double>();
    c.deep_well = build_deep_well(p);
  }
  return c;
}

double bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

// 1: second-order convergence of the kernel inverse and a small residual at dt = 1e-3
Outcome greens_identity() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_order = 1e300, worst_fine = 0.0, worst_five = 0.0;
  for (double m : {1.0, 2.0, 5.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<std::array<double, 3>> bumps;
      for (int k = 0; k < 3; ++k) bumps.push_back({4.0 * u(rng) - 2.0, 1.5 + 1.5 * u(rng), 2.0 * u(rng) - 1.0});
      auto f_of = [&](double t) {
        double s = 0.0;
        for (const auto& [c, w, a] : bumps) s += a * bump((t - c) / w);
        return s;
      };
      std::vector<double> rel;
      for (double dt : {4e-3, 2e-3, 1e-3}) {
        const auto n = static_cast<std::size_t>(std::round(12.0 / dt));
        const auto f = RealGrid::sample_window(f_of, 6.0, n);
        double fmax = 0.0;
        for (double v : f.values) fmax = std::max(fmax, std::abs(v));
        const auto psi = apply_K(m, f).output;
        rel.push_back(second_order_residual(m, psi, f) / fmax);
        if (dt == 1e-3) {
          for (std::size_t i = 2; i + 2 < psi.size(); ++i) {
            const double d2 = (-psi[i - 2] + 16.0 * psi[i - 1] - 30.0 * psi[i] + 16.0 * psi[i + 1] - psi[i + 2]) /
                              (12.0 * dt * dt);
            worst_five = std::max(worst_five, std::abs(-d2 + m * m * psi[i] - f[i]) / fmax);
          }
        }
      }
      worst_order = std::min({worst_order, std::log2(rel[0] / rel[1]), std::log2(rel[1] / rel[2])});
      worst_fine = std::max(worst_fine, rel[2]);
    }
  }
  return {worst_order >= 1.9 && worst_fine < 1e-6,
          fmt("min order %.3f (>= 1.9), max relative residual at dt=1e-3 %.2e (< 1e-6); five-point residual "
              "%.2e",
              worst_order, worst_fine, worst_five)};
}

std::vector<std::pair<std::string, const Profile*>> constructed(const std::vector<Construction>& cs) {
  std::vector<std::pair<std::string, const Profile*>> out;
  for (const auto& c : cs) {
    if (c.baseline) out.push_back({fmt("baseline a=%.1f", c.alpha), &*c.baseline});
    if (c.deep_well) out.push_back({fmt("deep well a=%.1f", c.alpha), &*c.deep_well});
    if (c.final_profile) out.push_back({fmt("final a=%.1f", c.alpha), &*c.final_profile});
  }
  return out;
}

// 2: exact quotient -1 of the critical test functions, hence m_a, m_b > 1
Outcome rayleigh_identity(const std::vector<Construction>& cs) {
  double worst = 0.0, worst_grid = 0.0;
  bool above_one = true;
  const auto profiles = constructed(cs);
  for (const auto& [name, p] : profiles) {
    const double T = default_window(*p);
    for (Critical d : {Critical::a, Critical::b}) {
      worst = std::max(worst, std::abs(critical_test_quotient(*p, d, T) + 1.0));
      const auto f = critical_test_function(*p, d, T, 40000);
      const auto v = critical_potential_grid(*p, d, f.u.t0, f.u.dt, f.u.size());
      worst_grid = std::max(worst_grid, std::abs(rayleigh_quotient(v, f.u, f.du) + 1.0));
    }
    const auto cw = critical_wavenumbers(*p);
    above_one = above_one && cw.m_a > 1.0 && cw.m_b > 1.0;
  }
  return {profiles.size() == 9 && worst < 1e-6 && above_one,
          fmt("%zu profiles, max |quotient + 1| %.2e (< 1e-6) by adaptive quadrature between knots, %.2e by "
              "uniform-grid Simpson; m_a, m_b > 1: %s",
              profiles.size(), worst, worst_grid, above_one ? "yes" : "no")};
}

// 3: exactly one eigenvalue below -1 at each critical value, stable under refinement
Outcome single_bound_state(const std::vector<Construction>& cs) {
  bool ok = true;
  std::string bad;
  const auto profiles = constructed(cs);
  for (const auto& [name, p] : profiles) {
    const double T = default_window(*p);
    const auto n = default_intervals(*p, T);
    for (Critical d : {Critical::a, Critical::b}) {
      try {
        const auto k = count_below([&](double t) { return critical_potential(*p, d, t); }, -1.0, T, n);
        if (k != 1) {
          ok = false;
          bad += fmt(" %s/%s count %zu;", name.c_str(), d == Critical::a ? "a" : "b", k);
        }
      } catch (const NumericalError& e) {
        ok = false;
        bad += " " + name + ": " + e.what() + ";";
      }
    }
  }
  return {ok && profiles.size() == 9, fmt("%zu profiles x {a, b}, count 1 on n and 2n intervals", profiles.size()) + bad};
}

// 4: the B sweep reaches bottom <= -16 and the cosine quotient keeps falling
Outcome deep_well_sweep() {
  ProfileParams base;
  const std::vector<double> grid{1.0, 10.0, 100.0, 1000.0};
  const auto s = sweep_deep_well(base, grid, 4.0, false);
  bool falling = true, accelerating = true;
  for (std::size_t i = 1; i < s.rows.size(); ++i) {
    falling = falling && s.rows[i].cosine_quotient < s.rows[i - 1].cosine_quotient;
    if (i >= 2) {
      const double d1 = s.rows[i].cosine_quotient - s.rows[i - 1].cosine_quotient;
      const double d0 = s.rows[i - 1].cosine_quotient - s.rows[i - 2].cosine_quotient;
      accelerating = accelerating && d1 < d0;
    }
  }
  const double bottom = s.reached() ? std::find_if(s.rows.begin(), s.rows.end(), [&](const auto& r) {
                                        return r.B == s.B_star;
                                      })->lambda_min
                                    : 0.0;
  return {s.reached() && bottom <= -16.0 && falling && accelerating,
          fmt("B* = %g with bottom %.3f (<= -16); cosine quotient %.3f at B=1 -> %.3f at B=1e3, decreasing with "
              "growing steps: %s",
              s.B_star, bottom, s.rows.front().cosine_quotient, s.rows.back().cosine_quotient,
              falling && accelerating ? "yes" : "no")};
}

struct FinalData {
  const Profile* p = nullptr;
  CriticalWavenumbers cw;
  DispersionBranch branch;
  double delta_min = 0.0;
  int m = 0;
};

// interior m values where the eigenvalue clears the contour floor by a factor 2
std::vector<double> interior_ms(const FinalData& f, int count) {
  std::vector<double> ms;
  std::vector<const BranchSample*> ok;
  for (const auto& s : f.branch.samples) {
    if (s.mu.imag() > 2.0 * f.delta_min) ok.push_back(&s);
  }
  if (ok.size() < static_cast<std::size_t>(count)) return ms;
  for (int k = 1; k <= count; ++k) ms.push_back(ok[ok.size() * k / (count + 1)]->m);
  return ms;
}

// 5: winding numbers inside and outside the window
Outcome branch_structure(const FinalData& f) {
  const auto contour = default_contour(*f.p);
  std::string detail;
  bool ok = true;
  const auto inside = interior_ms(f, 3);
  ok = inside.size() == 3;
  for (double m : inside) {
    const auto c = scan_no_eigenvalue(*f.p, m, contour);
    ok = ok && c.conclusive && c.winding == 1 && !c.caveat.empty();
    detail += fmt(" m=%.3f:%d", m, c.winding);
  }
  std::vector<double> outside{f.cw.m_a + 0.5, f.m + 1.0, f.m + 2.0, f.m + 3.0, 2.0 * std::ceil(f.cw.m_a)};
  if (f.cw.m_b > 1.2) outside.push_back(std::max(1.0, f.cw.m_b - 0.2));
  for (double m : outside) {
    const auto c = scan_no_eigenvalue(*f.p, m, contour);
    ok = ok && c.certifies_empty() && !c.caveat.empty();
    detail += fmt(" m=%.3f:%d", m, c.winding);
  }
  return {ok, fmt("windings (delta_min %.2e, caveat attached):", contour.im_lo) + detail};
}

// 6: extrapolated endpoints and Im mu > 0 along each branch
Outcome branch_endpoints(const std::vector<FinalData>& fs) {
  bool ok = !fs.empty();
  std::string detail;
  for (const auto& f : fs) {
    const auto& b = f.branch;
    const double ea = std::abs(b.mu_at_a - b.omega_a) / b.omega_a;
    const double eb = std::abs(b.mu_at_b - b.omega_b) / b.omega_b;
    bool im = true;
    for (const auto& s : b.samples) im = im && s.mu.imag() > 0.0;
    ok = ok && ea < 1e-2 && eb < 1e-2 && im;
    detail += fmt(" [a=%.1f: |mu_a - Omega(a)|/Omega(a) %.1e, |mu_b - Omega(b)|/Omega(b) %.1e, Im > 0 on %zu: %s]",
                  f.p->params().alpha, ea, eb, b.samples.size(), im ? "yes" : "no");
  }
  return {ok, "relative endpoint error < 1e-2:" + detail};
}

// 7: residual identities at every accepted eigenvalue
Outcome eigenpair_residuals(const std::vector<FinalData>& fs, const std::vector<Construction>& cs) {
  double imag = 0.0, pot = 0.0, trans = 1e300;
  std::size_t count = 0;
  auto take = [&](double i, double p, double t) {
    imag = std::max(imag, std::abs(i));
    pot = std::max(pot, p);
    trans = std::min(trans, t);
    ++count;
  };
  for (const auto& f : fs) {
    for (const auto& s : f.branch.samples) {
      take(s.residuals.imag_identity, s.residuals.potential_error(), std::abs(s.residuals.transversality));
    }
  }
  for (const auto& c : cs) {
    if (!c.summary.is_object() || !c.summary.contains("eigenvalue")) continue;
    const auto& r = c.summary["eigenvalue"]["residuals"];
    take(r["imag_identity"].get<double>(), r["potential_error"].get<double>(),
         std::hypot(r["transversality"][0].get<double>(), r["transversality"][1].get<double>()));
  }
  return {count > 0 && imag < 1e-6 && pot < 1e-5 && trans > 1e-6,
          fmt("%zu eigenpairs: max |imag identity| %.2e (< 1e-6), max |potential + 1| %.2e (< 1e-5), "
              "min |transversality| %.2e (> 1e-6)",
              count, imag, pot, trans)};
}

// 8: shooting vs the discretized operator
Outcome oracle_equivalence(const FinalData& f) {
  const auto ms = interior_ms(f, 3);
  bool ok = ms.size() == 3;
  std::string detail;
  for (double m : ms) {
    const auto o = lambda_oracle(*f.p, m);
    const auto pair = find_eigenvalue(*f.p, m, o.mu);
    const double d = std::abs(pair.mu - o.mu);
    ok = ok && d < 1e-4;
    detail += fmt(" m=%.3f: |diff| %.1e (n=%zu);", m, d, o.sizes.back());
  }
  return {ok, "shooting vs matrix eigenvalue < 1e-4:" + detail};
}

// 9: derivative formula vs centered differences
Outcome derivative_formula(const FinalData& f) {
  const auto& s = f.branch.samples;
  if (s.size() < 7) return {false, "branch too short"};
  double worst = 0.0;
  const double h = 1e-3;
  for (int k = 1; k <= 5; ++k) {
    const auto& x = s[s.size() * k / 6];
    const auto up = find_eigenvalue(*f.p, x.m + h, x.mu + h * x.dmu_dm);
    const auto down = find_eigenvalue(*f.p, x.m - h, x.mu - h * x.dmu_dm);
    const Complex fd = (up.mu - down.mu) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - x.dmu_dm) / std::abs(x.dmu_dm));
  }
  return {worst < 1e-3, fmt("5 samples, max relative deviation %.2e (< 1e-3)", worst)};
}

// 10: the physical-plane mode
Outcome physical_consistency(const std::vector<FinalData>& fs, const std::vector<Construction>& cs) {
  bool ok = !fs.empty();
  std::string detail;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& f = fs[i];
    const auto& e = cs[i].summary["eigenvalue"]["mu"];
    const auto pair = find_eigenvalue(*f.p, f.m, {e[0].get<double>(), e[1].get<double>()});
    const auto mode = eigenmode_to_physical(pair, *f.p);
    const double expect = -(f.m + 2.0 + f.p->params().alpha);
    const auto field = perturbation_velocity(mode, default_annulus(*f.p, 256));
    const auto r = velocity_residuals(mode, field);
    ok = ok && std::abs(mode.decay_fit - expect) <= 0.1 && mode.moment_residual < 0.02 && mode.lambda.real() > 0.0 &&
         std::abs(mode.lambda.real() - f.m * pair.mu.imag()) < 1e-14 && r.divergence < 1e-4 && r.curl < 1e-4;
    detail += fmt(" [a=%.1f: decay %.3f vs %.1f, moment %.1e, Re lambda %.2e, div %.1e, curl %.1e]",
                  f.p->params().alpha, mode.decay_fit, expect, mode.moment_residual, mode.lambda.real(),
                  r.divergence, r.curl);
  }
  return {ok, "decay +-0.1, moment < 2%, Re lambda > 0, div/curl < 1e-4 on 256^2:" + detail};
}

// 11: the end-to-end command
Outcome end_to_end(const std::vector<Construction>& cs) {
  bool ok = cs.size() == 3;
  std::string detail;
  for (const auto& c : cs) {
    bool good = c.exit_code == 0 && c.seconds < 1800.0 && c.summary.is_object() && c.summary.contains("m");
    int m = 0;
    if (good) {
      m = c.summary["m"].get<int>();
      good = m >= 2 && c.summary["unstable_scan"]["winding"] == 1 && c.summary["unstable_scan"]["conclusive"] == true;
      std::set<int> excluded;
      for (const auto& e : c.summary["exclusions"]) {
        if (e["conclusive"] == true && e["winding"] == 0) excluded.insert(static_cast<int>(e["m"].get<double>()));
      }
      for (int k = 1; k <= 3; ++k) good = good && excluded.count(m + k);
    }
    ok = ok && good;
    detail += fmt(" [a=%.1f: exit %d, m=%d, %.0f s]", c.alpha, c.exit_code, m, c.seconds);
  }
  return {ok, "exit 0, one certified eigenvalue at integer m >= 2, exclusions at m+1..m+3, < 30 min:" + detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  fs::path work = fs::temp_directory_path() / "vstab_acceptance";
  app.add_option("--work", work, "directory for the end-to-end runs");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  std::vector<Construction> cs;
  for (double alpha : {1.0, 0.5, 1.5}) {
    std::fprintf(stderr, "constructing alpha = %.1f\n", alpha);
    cs.push_back(construct(alpha, work));
  }
  std::vector<FinalData> finals;
  for (const auto& c : cs) {
    if (!c.final_profile) continue;
    FinalData f;
    f.p = &*c.final_profile;
    f.cw = critical_wavenumbers(*f.p);
    f.m = c.summary["m"].get<int>();
    f.delta_min = 1e-3 * f.p->Omega_minus_inf();
    try {
      BranchOptions bo;
      bo.delta_min = f.delta_min;
      f.branch = trace_branch(*f.p, f.cw, bo);
    } catch (const BranchError& e) {
      f.branch = e.partial();
    }
    finals.push_back(std::move(f));
  }
  const FinalData* primary = finals.empty() || cs.front().final_profile == std::nullopt ? nullptr : &finals.front();

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Green's identity", greens_identity},
      {"critical test-function identity", [&] { return rayleigh_identity(cs); }},
      {"single eigenvalue below -1", [&] { return single_bound_state(cs); }},
      {"deep-well sweep", deep_well_sweep},
      {"branch structure by winding numbers",
       [&] { return primary ? branch_structure(*primary) : Outcome{false, "no final profile"}; }},
      {"branch endpoints", [&] { return branch_endpoints(finals); }},
      {"eigenpair residuals", [&] { return eigenpair_residuals(finals, cs); }},
      {"oracle equivalence",
       [&] { return primary ? oracle_equivalence(*primary) : Outcome{false, "no final profile"}; }},
      {"derivative formula",
       [&] { return primary ? derivative_formula(*primary) : Outcome{false, "no final profile"}; }},
      {"physical consistency",
       [&] { return finals.size() == cs.size() ? physical_consistency(finals, cs) : Outcome{false, "missing runs"}; }},
      {"end-to-end construction", [&] { return end_to_end(cs); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %s (%.0f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
