#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vstab/profile.hpp"

namespace vstab::cli {

struct Tolerances {
  double sample_dt = 2e-3;            ///< eigenfunction sampling step in t
  std::optional<double> window;       ///< half-width T of the spectral window; unset = from the profile
  double root_tol = 1e-10;            ///< on |W / (-2m)|
  double delta_min_factor = 1e-3;     ///< lowest Im mu scanned, as a fraction of Omega(-inf)
};

struct BottomOptions {
  std::vector<double> theta;          ///< empty: the single profile; else blends toward B below
  double B = 100.0;
  std::optional<double> target_N;
};

struct TraceOptions {
  std::optional<double> m_min, m_max;
  int steps = 50;
};

struct Theorem11Options {
  std::optional<int> m_hint;
  std::vector<double> B_grid{1.0, 10.0, 100.0, 1000.0, 1e4, 1e5};
  int theta_samples = 21;
  double margin = 0.02;
  int multi_start_seeds = 5;
  int extra_exclusions = 3;
};

struct RunConfig {
  std::string command;
  ProfileParams profile{};
  std::optional<std::filesystem::path> profile_file;
  Tolerances tolerances{};
  std::filesystem::path out = "vstab_out";
  unsigned seed = 1;
  bool verbose = false;
  BottomOptions bottom{};
  TraceOptions trace{};
  Theorem11Options theorem11{};
};

/// Missing keys keep their defaults; unknown keys and out-of-range values throw ValidationError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numerical = 3;

/// Each command writes into c.out and returns its exit code; errors propagate as exceptions.
int cmd_profile_build(const RunConfig& c);
int cmd_bottom_spectrum(const RunConfig& c);
int cmd_trace_branch(const RunConfig& c);
int cmd_theorem11(const RunConfig& c);

/// Dispatches on c.command, maps ValidationError to 2 and other failures to 3, and leaves a
/// summary.json with status "failed" and the message behind.
int run(const RunConfig& c);

}  // namespace vstab::cli
