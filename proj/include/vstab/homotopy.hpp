#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vstab/dispersion.hpp"
#include "vstab/profile.hpp"
#include "vstab/sturm_spectrum.hpp"

namespace vstab {

/// N = m_a and W = m_b of the blend at theta.
struct GapRow {
  double theta = 0.0;
  double N = 0.0;
  double W = 0.0;
};

/// Rows sorted by theta.
struct GapCurves {
  std::vector<GapRow> rows;
  void insert(const GapRow& row);
  /// Linear interpolation of N in theta.
  double N_interpolated(double theta) const;
};

/// Evaluates a blend and caches rows so bisection and delta search reuse earlier work.
class BlendFamily {
 public:
  BlendFamily(Profile p0, Profile p1) : p0_(std::move(p0)), p1_(std::move(p1)) {}
  /// Throws ValidationError naming theta when the blend fails validate_class_C.
  Profile at(double theta) const;
  GapRow row(double theta);
  const Profile& start() const { return p0_; }
  const Profile& end() const { return p1_; }

 private:
  Profile p0_, p1_;
  std::map<double, GapRow> cache_;
};

/// Rows at every grid theta; the parallel version spreads theta over threads.
GapCurves gap_curves(const Profile& p0, const Profile& p1, const std::vector<double>& grid);
GapCurves gap_curves_serial(const Profile& p0, const Profile& p1, const std::vector<double>& grid);

std::vector<double> uniform_theta_grid(int samples);

struct ThetaCrossing {
  double theta0 = 0.0;
  double N_at_theta0 = 0.0;
  int bisection_steps = 0;
};

/// Last crossing of N = m: bisection inside the bracket right of the last sample with N <= m.
/// N_of_theta refines between samples; without it the table is interpolated linearly.
/// Throws ValidationError unless N(0) < m < N(1).
ThetaCrossing find_theta0(const GapCurves& curves, int m,
                          const std::function<double(double)>& N_of_theta = {}, double tol = 1e-6);

struct DeltaChoice {
  double delta = 0.0;
  GapRow row;                      ///< at theta0 + delta
  std::vector<double> by_level;    ///< smallest admissible delta per grid level
};

/// Smallest delta on uniform grids of (0, 1 - theta0] with K, 2K, ... intervals such that
/// W < m - margin and m + margin < N < m + 1 - margin at theta0 + delta.
DeltaChoice select_delta(const std::function<GapRow(double)>& row_at, double theta0, int m,
                         double margin = 0.02, int K = 20, int levels = 2);

struct HomotopyOptions {
  std::optional<int> m_hint;
  ProfileParams base{};            ///< alpha is overridden by the argument
  std::vector<double> B_grid{1.0, 10.0, 100.0, 1000.0, 1e4, 1e5};
  double headroom = 0.5;           ///< N_1 >= m + headroom
  int theta_samples = 21;
  double margin = 0.02;
  int delta_K = 20;
  int delta_levels = 2;
  double delta_min_factor = 1e-3;  ///< scan contours stop at Im mu = factor Omega(-inf)
  int multi_start_seeds = 5;
  double multi_start_box = 0.02;   ///< seeds within this fraction of Omega(-inf) of the root
  unsigned seed = 1;
  int extra_exclusions = 3;        ///< certify m + 1 .. m + extra_exclusions
  FindOptions find{};              ///< root solves on the branch and at m
  bool parallel = true;
  std::function<void(const std::string&)> log;
};

/// A failed pipeline stage; the message starts with the stage name.
class StageError : public NumericalError {
 public:
  StageError(std::string stage, const std::string& what)
      : NumericalError(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct HomotopyResult {
  int m = 0;
  double alpha = 0.0;
  double N0 = 0.0;
  double B = 0.0;
  double N1 = 0.0;
  double theta0 = 0.0;
  double delta = 0.0;
  GapCurves curves;
  std::vector<DeepWellSweepRow> sweep;
  Profile baseline, deep_well, final;
  CriticalWavenumbers final_wavenumbers;
  ComplexEigenpair eigenpair;
  MultiStartResult multi;
  DispersionBranch branch;
  double branch_agreement = 0.0;  ///< |mu - root corrected from the nearest branch sample's tangent prediction|
  ExclusionCertificate unstable_scan;
  std::vector<ExclusionCertificate> exclusions;
  std::vector<std::string> warnings;
  bool certified() const;
};

/// Baseline, deep-well sweep, blend curves, theta0 and delta, then certification on the blend.
HomotopyResult construct_unstable_profile(double alpha, const HomotopyOptions& options = {});

/// Smallest integer >= 2 above N0, or the hint after checking hint > N0 and hint >= 2.
int choose_wavenumber(double N0, std::optional<int> hint);

}  // namespace vstab
