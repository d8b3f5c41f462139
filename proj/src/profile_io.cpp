#include "vstab/profile_io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "vstab/errors.hpp"

namespace vstab {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(std::string("profile document: '") + key + "' must be a number");
  return v.get<double>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace

ProfileParams params_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("profile parameters must be an object");
  reject_unknown(j, {"alpha", "a", "b", "c0", "logM1", "logM", "B", "shape"}, "profile parameters");
  ProfileParams p;
  p.alpha = number(j, "alpha", p.alpha);
  p.a = number(j, "a", p.a);
  p.b = number(j, "b", p.b);
  p.c0 = number(j, "c0", p.c0);
  p.logM1 = number(j, "logM1", p.logM1);
  p.logM = number(j, "logM", p.logM);
  p.B = number(j, "B", p.B);
  if (j.contains("shape")) {
    const auto& s = j.at("shape");
    if (!s.is_object()) throw ValidationError("profile parameters: 'shape' must be an object");
    reject_unknown(s,
                   {"hump_height", "plateau_end", "trough_width", "base_width", "right_trough", "g0_target",
                    "min_right_depth"},
                   "shape knobs");
    auto& k = p.shape;
    k.hump_height = number(s, "hump_height", k.hump_height);
    k.plateau_end = number(s, "plateau_end", k.plateau_end);
    k.trough_width = number(s, "trough_width", k.trough_width);
    k.base_width = number(s, "base_width", k.base_width);
    k.right_trough = number(s, "right_trough", k.right_trough);
    k.g0_target = number(s, "g0_target", k.g0_target);
    k.min_right_depth = number(s, "min_right_depth", k.min_right_depth);
  }
  check_params(p);
  return p;
}

json params_to_json(const ProfileParams& p) {
  const auto& k = p.shape;
  return {{"alpha", p.alpha},
          {"a", p.a},
          {"b", p.b},
          {"c0", p.c0},
          {"logM1", p.logM1},
          {"logM", p.logM},
          {"B", p.B},
          {"shape",
           {{"hump_height", k.hump_height},
            {"plateau_end", k.plateau_end},
            {"trough_width", k.trough_width},
            {"base_width", k.base_width},
            {"right_trough", k.right_trough},
            {"g0_target", k.g0_target},
            {"min_right_depth", k.min_right_depth}}}};
}

json profile_to_json(const Profile& p) {
  json terms = json::array();
  for (const auto& t : p.terms()) {
    json knots = json::array();
    for (const auto& k : t.a.interior_knots()) knots.push_back({k.t, k.jet.value, k.jet.slope, k.jet.curvature});
    terms.push_back({{"weight", t.weight},
                     {"c0", t.a.c0()},
                     {"alpha", t.a.alpha()},
                     {"logM1", t.a.logM1()},
                     {"logM", t.a.logM()},
                     {"knots", knots}});
  }
  return {{"kind", p.kind()},
          {"params", params_to_json(p.params())},
          {"resolution", p.resolution()},
          {"omega_minus_inf", p.Omega_minus_inf()},
          {"tail_constant", p.tail_constant()},
          {"terms", terms}};
}

Profile profile_from_json(const json& j) {
  try {
    const auto params = params_from_json(j.at("params"));
    std::vector<Profile::Term> terms;
    for (const auto& t : j.at("terms")) {
      std::vector<HermiteKnot> knots;
      for (const auto& k : t.at("knots")) {
        if (!k.is_array() || k.size() != 4) throw ValidationError("profile document: knots are [t, A, A', A'']");
        knots.push_back({k[0].get<double>(), {k[1].get<double>(), k[2].get<double>(), k[3].get<double>()}});
      }
      terms.push_back({t.at("weight").get<double>(),
                       PiecewiseA(t.at("c0").get<double>(), t.at("alpha").get<double>(), t.at("logM1").get<double>(),
                                  t.at("logM").get<double>(), std::move(knots))});
    }
    Profile p(params, std::move(terms), j.at("kind").get<std::string>(), j.at("resolution").get<double>());
    if (j.contains("omega_minus_inf")) {
      const double stored = j.at("omega_minus_inf").get<double>();
      if (std::abs(stored - p.Omega_minus_inf()) > 1e-12 * std::max(1.0, std::abs(stored))) {
        throw ValidationError("profile document: stored omega_minus_inf disagrees with the knots");
      }
    }
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed profile document: ") + e.what());
  }
}

void save_profile(const Profile& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << profile_to_json(p).dump(2) << '\n';
}

Profile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed profile document " + path.string() + ": " + e.what());
  }
  return profile_from_json(j);
}

json report_to_json(const ValidationReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"all_passed", report.all_passed()}, {"checks", checks}};
}

}  // namespace vstab
