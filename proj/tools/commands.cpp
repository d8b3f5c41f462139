#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "vstab/csv.hpp"
#include "vstab/dispersion.hpp"
#include "vstab/errors.hpp"
#include "vstab/homotopy.hpp"
#include "vstab/physical_map.hpp"
#include "vstab/profile_io.hpp"
#include "vstab/sturm_spectrum.hpp"

namespace vstab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& into) {
  if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name + " must be positive, got " + std::to_string(v));
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json residuals_json(const EigenpairResiduals& r) {
  return {{"matching", r.matching},
          {"imag_identity", r.imag_identity},
          {"potential_integral", complex_json(r.potential_integral)},
          {"potential_error", r.potential_error()},
          {"transversality", complex_json(r.transversality)},
          {"acceptable", r.acceptable()}};
}

json certificate_json(const ExclusionCertificate& c) {
  return {{"m", c.m},
          {"contour", {{"re_lo", c.contour.re_lo}, {"re_hi", c.contour.re_hi}, {"im_lo", c.contour.im_lo},
                       {"im_hi", c.contour.im_hi}}},
          {"winding", c.winding},
          {"winding_raw", c.winding_raw},
          {"conclusive", c.conclusive},
          {"weakened", c.weakened},
          {"max_phase_step", c.max_phase_step},
          {"min_abs_matching", c.min_abs_matching},
          {"evaluations", c.evaluations},
          {"caveat", c.caveat}};
}

json wavenumbers_json(const CriticalWavenumbers& cw) {
  return {{"m_a", cw.m_a},
          {"m_b", cw.m_b},
          {"lambda_a", cw.at_a.lambda_min},
          {"lambda_b", cw.at_b.lambda_min},
          {"window", cw.at_a.T},
          {"ordered", cw.ordered()},
          {"window_above_one", cw.m_b > 1.0}};
}

/// summary.json, replaced atomically so a reader never sees half a document.
class Summary {
 public:
  Summary(const RunConfig& c) : path_(c.out / "summary.json") {
    doc_ = {{"command", c.command}, {"status", "incomplete"}, {"config", config_to_json(c)}};
    flush();
  }
  json& operator[](const char* key) { return doc_[key]; }
  void warn(const std::string& w) {
    doc_["warnings"].push_back(w);
    std::cerr << "warning: " << w << '\n';
  }
  void finish(const std::string& status) {
    doc_["status"] = status;
    flush();
  }

 private:
  void flush() {
    const auto tmp = fs::path(path_).concat(".tmp");
    {
      std::ofstream out(tmp);
      if (!out) throw ValidationError("cannot write " + tmp.string());
      out << doc_.dump(2) << '\n';
    }
    fs::rename(tmp, path_);
  }

  fs::path path_;
  json doc_;
};

void prepare_output(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ValidationError("cannot create output directory " + c.out.string() + ": " + ec.message());
}

void log(const RunConfig& c, const std::string& s) {
  if (c.verbose) std::cerr << s << '\n';
}

Profile input_profile(const RunConfig& c) {
  if (c.profile_file) return load_profile(*c.profile_file);
  return build_deep_well(c.profile);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_profile_csv(const Profile& p, const fs::path& path, double dt) {
  const auto& par = p.params();
  const double lo = par.logM1 - 3.0, hi = par.logM + 3.0;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dt));
  CsvWriter w(path, {{"t", "1", "log radius"},
                     {"A", "1/time", "A = Omega'' + 2 Omega'"},
                     {"Omega", "1/time", "angular velocity at s = e^t"},
                     {"G", "1/time", "G = 2 Omega + Omega'"}});
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    w.row({t, p.A(t), p.Omega(t), p.G(t)});
  }
}

void write_eigvec_csv(const BottomSpectrumResult& r, const fs::path& path) {
  CsvWriter w(path, {{"t", "1", "log radius"},
                     {"u", "1", "bottom eigenvector of -u'' + v u with h sum u^2 = 1"}});
  for (std::size_t i = 0; i < r.eigvec.size(); ++i) w.row({r.eigvec.t(i), r.eigvec[i]});
}

void write_branch_csv(const std::vector<BranchSample>& samples, const fs::path& path) {
  CsvWriter w(path, {{"m", "1", "azimuthal wavenumber"},
                     {"mu_re", "1/time", "Re mu"},
                     {"mu_im", "1/time", "Im mu"},
                     {"growth", "1/time", "Re lambda = m Im mu"},
                     {"dmu_dm_re", "1/time", "Re of -2m int psi^2 / int A psi^2 (Omega - mu)^-2"},
                     {"dmu_dm_im", "1/time", "Im of the same"},
                     {"matching", "1", "|W / (-2m)|"},
                     {"imag_identity", "1", "int A |psi|^2 / |Omega - mu|^2"},
                     {"potential_error", "1", "|int A |psi|^2 / (Omega - mu) + 1|"},
                     {"transversality", "1", "|int A psi^2 / (Omega - mu)^2|"}});
  for (const auto& s : samples) {
    w.row({s.m, s.mu.real(), s.mu.imag(), s.m * s.mu.imag(), s.dmu_dm.real(), s.dmu_dm.imag(),
           s.residuals.matching, s.residuals.imag_identity, s.residuals.potential_error(),
           std::abs(s.residuals.transversality)});
  }
}

json branch_json(const DispersionBranch& b) {
  return {{"samples", b.samples.size()},
          {"m_a", b.m_a},
          {"m_b", b.m_b},
          {"omega_a", b.omega_a},
          {"omega_b", b.omega_b},
          {"mu_at_a", complex_json(b.mu_at_a)},
          {"mu_at_b", complex_json(b.mu_at_b)},
          {"stop_reason", b.stop_reason}};
}

FindOptions find_options(const RunConfig& c) {
  FindOptions f;
  f.tol = c.tolerances.root_tol;
  f.sample_dt = c.tolerances.sample_dt;
  return f;
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j,
                   {"command", "profile", "profile_file", "tolerances", "output", "seed", "verbose", "bottom_spectrum",
                    "trace_branch", "theorem11"},
                   "config");
    read(j, "command", c.command);
    if (j.contains("profile")) c.profile = params_from_json(j.at("profile"));
    std::optional<std::string> file;
    read(j, "profile_file", file);
    if (file) c.profile_file = *file;
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      reject_unknown(t, {"sample_dt", "window", "root_tol", "delta_min_factor"}, "tolerances");
      read(t, "sample_dt", c.tolerances.sample_dt);
      read(t, "window", c.tolerances.window);
      read(t, "root_tol", c.tolerances.root_tol);
      read(t, "delta_min_factor", c.tolerances.delta_min_factor);
    }
    std::string out;
    read(j, "output", out);
    if (!out.empty()) c.out = out;
    read(j, "seed", c.seed);
    read(j, "verbose", c.verbose);
    if (j.contains("bottom_spectrum")) {
      const auto& b = j.at("bottom_spectrum");
      reject_unknown(b, {"theta", "B", "target_N"}, "bottom_spectrum");
      read(b, "theta", c.bottom.theta);
      read(b, "B", c.bottom.B);
      read(b, "target_N", c.bottom.target_N);
    }
    if (j.contains("trace_branch")) {
      const auto& t = j.at("trace_branch");
      reject_unknown(t, {"m_min", "m_max", "steps"}, "trace_branch");
      read(t, "m_min", c.trace.m_min);
      read(t, "m_max", c.trace.m_max);
      read(t, "steps", c.trace.steps);
    }
    if (j.contains("theorem11")) {
      const auto& t = j.at("theorem11");
      reject_unknown(t, {"m_hint", "B_grid", "theta_samples", "margin", "multi_start_seeds", "extra_exclusions"},
                     "theorem11");
      read(t, "m_hint", c.theorem11.m_hint);
      read(t, "B_grid", c.theorem11.B_grid);
      read(t, "theta_samples", c.theorem11.theta_samples);
      read(t, "margin", c.theorem11.margin);
      read(t, "multi_start_seeds", c.theorem11.multi_start_seeds);
      read(t, "extra_exclusions", c.theorem11.extra_exclusions);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }

  positive(c.tolerances.sample_dt, "tolerances.sample_dt");
  if (c.tolerances.window) positive(*c.tolerances.window, "tolerances.window");
  positive(c.tolerances.root_tol, "tolerances.root_tol");
  positive(c.tolerances.delta_min_factor, "tolerances.delta_min_factor");
  for (double th : c.bottom.theta) {
    if (!(th >= 0.0 && th <= 1.0)) throw ValidationError("bottom_spectrum.theta values must lie in [0, 1]");
  }
  positive(c.bottom.B, "bottom_spectrum.B");
  if (c.bottom.target_N) positive(*c.bottom.target_N, "bottom_spectrum.target_N");
  if (c.trace.steps < 2) throw ValidationError("trace_branch.steps must be at least 2");
  if (c.trace.m_min && c.trace.m_max && !(*c.trace.m_min < *c.trace.m_max)) {
    throw ValidationError("trace_branch.m_min must be below m_max");
  }
  if (c.theorem11.B_grid.empty()) throw ValidationError("theorem11.B_grid must not be empty");
  for (double B : c.theorem11.B_grid) positive(B, "theorem11.B_grid entry");
  if (c.theorem11.theta_samples < 3) throw ValidationError("theorem11.theta_samples must be at least 3");
  positive(c.theorem11.margin, "theorem11.margin");
  if (c.theorem11.multi_start_seeds < 1) throw ValidationError("theorem11.multi_start_seeds must be at least 1");
  if (c.theorem11.extra_exclusions < 1) throw ValidationError("theorem11.extra_exclusions must be at least 1");
  return c;
}

json config_to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"profile", params_to_json(c.profile)},
          {"profile_file", c.profile_file ? json(c.profile_file->string()) : json(nullptr)},
          {"tolerances",
           {{"sample_dt", c.tolerances.sample_dt},
            {"window", optional_json(c.tolerances.window)},
            {"root_tol", c.tolerances.root_tol},
            {"delta_min_factor", c.tolerances.delta_min_factor}}},
          {"output", c.out.string()},
          {"seed", c.seed},
          {"verbose", c.verbose},
          {"bottom_spectrum", {{"theta", c.bottom.theta}, {"B", c.bottom.B}, {"target_N", optional_json(c.bottom.target_N)}}},
          {"trace_branch",
           {{"m_min", optional_json(c.trace.m_min)}, {"m_max", optional_json(c.trace.m_max)}, {"steps", c.trace.steps}}},
          {"theorem11",
           {{"m_hint", optional_json(c.theorem11.m_hint)},
            {"B_grid", c.theorem11.B_grid},
            {"theta_samples", c.theorem11.theta_samples},
            {"margin", c.theorem11.margin},
            {"multi_start_seeds", c.theorem11.multi_start_seeds},
            {"extra_exclusions", c.theorem11.extra_exclusions}}}};
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

int cmd_profile_build(const RunConfig& c) {
  prepare_output(c);
  Summary summary(c);
  const Profile p = input_profile(c);
  const auto report = validate_class_C(p);
  write_json(c.out / "validation.json", report_to_json(report));
  save_profile(p, c.out / "profile.json");
  write_profile_csv(p, c.out / "profile.csv", c.tolerances.sample_dt);
  summary["omega_minus_inf"] = p.Omega_minus_inf();
  summary["tail_constant"] = p.tail_constant();
  summary["validation"] = report.all_passed();
  if (!report.all_passed()) {
    std::string failed;
    for (const auto& ch : report.checks) {
      if (!ch.passed) failed += (failed.empty() ? "" : ", ") + ch.name;
    }
    summary["error"] = "class conditions failed: " + failed;
    summary.finish("failed");
    throw ValidationError("class conditions failed: " + failed);
  }
  summary.finish("ok");
  return exit_ok;
}

int cmd_bottom_spectrum(const RunConfig& c) {
  prepare_output(c);
  Summary summary(c);
  const auto window = c.tolerances.window;
  if (c.bottom.theta.empty()) {
    const Profile p = input_profile(c);
    const auto cw = critical_wavenumbers(p, window);
    CsvWriter w(c.out / "spectrum.csv", {{"N", "1", "N = m_a = sqrt(-bottom at Omega(a))"},
                                         {"W", "1", "W = m_b = sqrt(-bottom at Omega(b))"},
                                         {"lambda_a", "1", "bottom eigenvalue at Omega(a)"},
                                         {"lambda_b", "1", "bottom eigenvalue at Omega(b)"}});
    w.row({cw.m_a, cw.m_b, cw.at_a.lambda_min, cw.at_b.lambda_min});
    write_eigvec_csv(cw.at_a, c.out / "eigvec_a.csv");
    write_eigvec_csv(cw.at_b, c.out / "eigvec_b.csv");
    summary["wavenumbers"] = wavenumbers_json(cw);
    if (c.bottom.target_N) summary["target_reached"] = cw.m_a >= *c.bottom.target_N;
  } else {
    ProfileParams base = c.profile, deep = c.profile;
    base.B = 0.0;
    deep.B = c.bottom.B;
    const Profile p0 = build_deep_well(base), p1 = build_deep_well(deep);
    CsvWriter w(c.out / "spectrum.csv", {{"theta", "1", "blend weight of the deep well"},
                                         {"N", "1", "N = m_a = sqrt(-bottom at Omega(a))"},
                                         {"W", "1", "W = m_b = sqrt(-bottom at Omega(b))"},
                                         {"lambda_a", "1", "bottom eigenvalue at Omega(a)"},
                                         {"lambda_b", "1", "bottom eigenvalue at Omega(b)"}});
    json rows = json::array();
    CriticalWavenumbers last;
    for (double th : c.bottom.theta) {
      log(c, "theta = " + std::to_string(th));
      last = critical_wavenumbers(blend(p0, p1, th), window);
      w.row({th, last.m_a, last.m_b, last.at_a.lambda_min, last.at_b.lambda_min});
      rows.push_back({{"theta", th}, {"N", last.m_a}, {"W", last.m_b}});
    }
    write_eigvec_csv(last.at_a, c.out / "eigvec_a.csv");
    write_eigvec_csv(last.at_b, c.out / "eigvec_b.csv");
    summary["rows"] = rows;
    summary["eigvec_theta"] = c.bottom.theta.back();
    if (c.bottom.target_N) summary["target_reached"] = last.m_a >= *c.bottom.target_N;
  }
  summary.finish("ok");
  return exit_ok;
}

int cmd_trace_branch(const RunConfig& c) {
  prepare_output(c);
  Summary summary(c);
  const Profile p = input_profile(c);
  const auto cw = critical_wavenumbers(p, c.tolerances.window);
  summary["wavenumbers"] = wavenumbers_json(cw);
  const double lo = std::max(cw.m_b, c.trace.m_min.value_or(cw.m_b));
  const double hi = std::min(cw.m_a, c.trace.m_max.value_or(cw.m_a));
  std::vector<BranchSample> kept;
  if (!(cw.m_b < cw.m_a) || !(lo < hi)) {
    summary["branch"] = {{"samples", 0},
                         {"stop_reason", "requested m range does not meet the window (" + std::to_string(cw.m_b) + ", " +
                                             std::to_string(cw.m_a) + ")"}};
  } else {
    BranchOptions bo;
    bo.n_steps = c.trace.steps;
    bo.delta_min = c.tolerances.delta_min_factor * p.Omega_minus_inf();
    bo.find = find_options(c);
    const auto branch = trace_branch(p, cw, bo);
    for (const auto& s : branch.samples) {
      if (s.m >= lo && s.m <= hi) kept.push_back(s);
    }
    auto j = branch_json(branch);
    j["kept"] = kept.size();
    bool positive_im = true;
    for (const auto& s : kept) positive_im = positive_im && s.mu.imag() > 0.0;
    j["all_unstable"] = positive_im;
    summary["branch"] = j;
  }
  write_branch_csv(kept, c.out / "branch.csv");
  summary["range"] = {lo, hi};
  summary.finish("ok");
  return exit_ok;
}

int cmd_theorem11(const RunConfig& c) {
  prepare_output(c);
  Summary summary(c);
  HomotopyOptions o;
  o.base = c.profile;
  o.m_hint = c.theorem11.m_hint;
  o.B_grid = c.theorem11.B_grid;
  o.theta_samples = c.theorem11.theta_samples;
  o.margin = c.theorem11.margin;
  o.delta_min_factor = c.tolerances.delta_min_factor;
  o.multi_start_seeds = c.theorem11.multi_start_seeds;
  o.seed = c.seed;
  o.extra_exclusions = c.theorem11.extra_exclusions;
  o.find = find_options(c);
  o.log = [&](const std::string& s) { log(c, s); };
  const auto r = construct_unstable_profile(c.profile.alpha, o);

  save_profile(r.final, c.out / "final_profile.json");
  {
    CsvWriter w(c.out / "gap_curves.csv", {{"theta", "1", "blend weight of the deep well"},
                                           {"N", "1", "N = m_a of the blend"},
                                           {"W", "1", "W = m_b of the blend"}});
    for (const auto& row : r.curves.rows) w.row({row.theta, row.N, row.W});
  }
  {
    CsvWriter w(c.out / "sweep.csv", {{"B", "1", "deep-well strength"},
                                      {"lambda_min", "1", "bottom eigenvalue at Omega(a)"},
                                      {"m_a", "1", "m_a = sqrt(-lambda_min)"},
                                      {"cosine_quotient", "1", "Rayleigh quotient of cos(pi t / 2) on [-1 1]"}});
    for (const auto& row : r.sweep) w.row({row.B, row.lambda_min, row.m_a, row.cosine_quotient});
  }
  write_branch_csv(r.branch.samples, c.out / "branch.csv");
  {
    const auto& e = r.eigenpair;
    CsvWriter w(c.out / "eigenpair.csv", {{"t", "1", "log radius"},
                                          {"psi_re", "1", "Re psi with int |psi'|^2 + m^2 |psi|^2 = 1"},
                                          {"psi_im", "1", "Im psi"},
                                          {"dpsi_re", "1", "Re psi'"},
                                          {"dpsi_im", "1", "Im psi'"}});
    for (std::size_t i = 0; i < e.psi.size(); ++i) {
      w.row({e.psi.t(i), e.psi[i].real(), e.psi[i].imag(), e.dpsi[i].real(), e.dpsi[i].imag()});
    }
  }
  const auto mode = eigenmode_to_physical(r.eigenpair, r.final);
  {
    CsvWriter w(c.out / "mode.csv", {{"s", "length", "radius s = e^t"},
                                     {"g_re", "1/time", "Re vorticity perturbation"},
                                     {"g_im", "1/time", "Im vorticity perturbation"},
                                     {"psi_re", "length^2/time", "Re stream function"},
                                     {"psi_im", "length^2/time", "Im stream function"}});
    for (std::size_t i = 0; i < mode.g.size(); ++i) {
      w.row({std::exp(mode.g.t(i)), mode.g[i].real(), mode.g[i].imag(), mode.psi_s[i].real(), mode.psi_s[i].imag()});
    }
  }
  const auto field = perturbation_velocity(mode, default_annulus(r.final));
  const auto vres = velocity_residuals(mode, field);

  json certificates = json::array();
  for (const auto& cert : r.exclusions) certificates.push_back(certificate_json(cert));
  write_json(c.out / "certificates.json",
             {{"unstable", certificate_json(r.unstable_scan)}, {"exclusions", certificates}});

  const auto& e = r.eigenpair;
  summary["m"] = r.m;
  summary["alpha"] = r.alpha;
  summary["N0"] = r.N0;
  summary["B"] = r.B;
  summary["N1"] = r.N1;
  summary["theta0"] = r.theta0;
  summary["delta"] = r.delta;
  summary["theta"] = std::min(1.0, r.theta0 + r.delta);
  summary["final_wavenumbers"] = wavenumbers_json(r.final_wavenumbers);
  summary["omega_minus_inf"] = r.final.Omega_minus_inf();
  summary["eigenvalue"] = {{"mu", complex_json(e.mu)},
                           {"growth_rate", r.m * e.mu.imag()},
                           {"dmu_dm", complex_json(e.dmu_dm)},
                           {"residuals", residuals_json(e.residuals)},
                           {"branch_agreement", r.branch_agreement}};
  summary["multi_start"] = {{"seeds", r.multi.seeds.size()},
                            {"all_converged", r.multi.all_converged()},
                            {"spread", r.multi.spread}};
  summary["branch"] = branch_json(r.branch);
  summary["unstable_scan"] = certificate_json(r.unstable_scan);
  summary["exclusions"] = certificates;
  summary["physical"] = {{"lambda", complex_json(mode.lambda)},
                         {"decay_fit", mode.decay_fit},
                         {"decay_expected", -(r.m + 2.0 + r.alpha)},
                         {"moment_residual", mode.moment_residual},
                         {"stream_residual", mode.stream_residual},
                         {"divergence", vres.divergence},
                         {"curl", vres.curl}};
  for (const auto& w : r.warnings) summary.warn(w);
  const bool ok = r.certified();
  summary["certified"] = ok;
  if (!ok) {
    summary["error"] = "certification chain did not pass";
    summary.finish("failed");
    std::cerr << "error: certification chain did not pass\n";
    return exit_numerical;
  }
  summary.finish("ok");
  return exit_ok;
}

int run(const RunConfig& c) {
  auto fail = [&](const std::string& what, int code) {
    std::cerr << "error: " << what << '\n';
    std::error_code ec;
    const auto path = c.out / "summary.json";
    json doc;
    if (fs::exists(path, ec)) {
      std::ifstream in(path);
      doc = json::parse(in, nullptr, false);
      if (doc.is_discarded()) doc = json::object();
    } else if (!fs::create_directories(c.out, ec) && ec) {
      return code;
    }
    doc["command"] = c.command;
    doc["status"] = "failed";
    doc["error"] = what;
    doc["exit_code"] = code;
    std::ofstream(path) << doc.dump(2) << '\n';
    return code;
  };
  try {
    if (c.command == "profile-build") return cmd_profile_build(c);
    if (c.command == "bottom-spectrum") return cmd_bottom_spectrum(c);
    if (c.command == "trace-branch") return cmd_trace_branch(c);
    if (c.command == "theorem11") return cmd_theorem11(c);
    return fail("unknown command '" + c.command + "'", exit_validation);
  } catch (const ValidationError& e) {
    return fail(e.what(), exit_validation);
  } catch (const std::exception& e) {
    return fail(e.what(), exit_numerical);
  }
}

}  // namespace vstab::cli
