#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vstab/numerics.hpp"

namespace vstab {

/// Knobs of the smooth gluing between the closed-form pieces of A(t).
struct ShapeKnobs {
  double hump_height = 0.08;     ///< plateau of A on (a, b); must stay below e^{-2}
  double plateau_end = 0.75;     ///< A leaves the plateau here and reaches zero at b
  double trough_width = 0.5;     ///< deep-well trough width times sqrt(B)
  double base_width = 0.5;       ///< baseline (B = 0) rise from the base level to A(a) = 0
  double right_trough = 0.5;     ///< location of the negative trough on (b, logM), as a fraction
  double g0_target = 0.1;        ///< target G(a), sizes the negative mass on (b, logM)
  double min_right_depth = 0.02; ///< floor for the depth of that trough
};

struct ProfileParams {
  double alpha = 1.0;
  double a = 0.0;
  double b = 1.0;
  double c0 = 10.0;
  double logM1 = -3.0;
  double logM = 3.0;
  double B = 0.0;  ///< deep-well strength, 0 = baseline
  ShapeKnobs shape{};
};

/// Knot of a piecewise-quintic A(t): A, A', A'' at t.
struct HermiteKnot {
  double t = 0.0;
  Jet2 jet{};
};

/// A(t) = -8 c0 e^{2t} for t <= logM1, quintic Hermite bridges between knots,
/// A(t) = -alpha e^{-alpha t} for t >= logM. Interior integrals are closed form.
class PiecewiseA {
 public:
  PiecewiseA() = default;
  /// interior knots strictly inside (logM1, logM); tail knots are added automatically.
  PiecewiseA(double c0, double alpha, double logM1, double logM,
             std::vector<HermiteKnot> interior);

  double value(double t) const;
  double derivative(double t, int order) const;
  /// int_{-inf}^t A
  double integral_from_left(double t) const;
  /// int_t^{inf} A
  double integral_to_right(double t) const;
  /// int_{-inf}^t e^{2 tau} A(tau) d tau
  double weighted_integral(double t) const;
  double total_integral() const { return total_; }

  double c0() const { return c0_; }
  double alpha() const { return alpha_; }
  double logM1() const { return logM1_; }
  double logM() const { return logM_; }
  /// All knots including the two tail knots.
  const std::vector<HermiteKnot>& knots() const { return knots_; }
  std::vector<HermiteKnot> interior_knots() const;

 private:
  std::size_t segment(double t) const;

  double c0_ = 0.0, alpha_ = 1.0, logM1_ = -3.0, logM_ = 3.0;
  std::vector<HermiteKnot> knots_;
  std::vector<Quintic> segs_;
  std::vector<double> cum_left_;      // int_{-inf}^{t_k} A
  std::vector<double> cum_weighted_;  // int_{-inf}^{t_k} e^{2tau} A
  double total_ = 0.0;
};

/// A class-C candidate profile in log-radius coordinates. A is a weighted sum of
/// piecewise terms so convex blends stay exact; everything else follows from A:
///   G(t) = -int_t^inf A,  Omega'(t) = e^{-2t} int_{-inf}^t e^{2tau} A,  Omega = (G - Omega')/2.
class Profile {
 public:
  struct Term {
    double weight = 1.0;
    PiecewiseA a;
  };

  Profile() = default;
  /// resolution: width of the narrowest feature of A, used to size grids downstream.
  Profile(ProfileParams params, std::vector<Term> terms, std::string kind, double resolution);

  /// Profile with the given interior knots, no validation.
  static Profile from_knots(const ProfileParams& params, std::vector<HermiteKnot> interior);

  double A(double t) const;
  double A_derivative(double t, int order = 1) const;
  double G(double t) const;
  double Omega(double t) const;
  double Omega_prime(double t) const;
  double Omega_second(double t) const { return A(t) - 2.0 * Omega_prime(t); }
  double Omega_third(double t) const { return A_derivative(t, 1) - 2.0 * Omega_second(t); }
  /// int_{-inf}^t e^{2 tau} A
  double weighted_integral(double t) const;

  double Omega_minus_inf() const { return omega_minus_inf_; }
  /// Constant C of the right tail Omega = C alpha e^{-2t} + e^{-alpha t}/(2 - alpha).
  double tail_constant() const { return tail_constant_; }
  /// Effective left-tail amplitude (weighted sum of the terms' c0).
  double c0() const;

  const ProfileParams& params() const { return params_; }
  const std::vector<Term>& terms() const { return terms_; }
  const std::string& kind() const { return kind_; }
  /// All knot locations of all terms, sorted.
  std::vector<double> knot_locations() const;
  double resolution() const { return resolution_; }

 private:
  ProfileParams params_;
  std::vector<Term> terms_;
  std::string kind_;
  double omega_minus_inf_ = 0.0;
  double tail_constant_ = 0.0;
  double resolution_ = 0.05;
};

/// Deep-well family with a = 0, b = 1; B = 0 yields the baseline profile.
Profile build_deep_well(const ProfileParams& params);

/// theta * p1 + (1 - theta) * p0.
Profile blend(const Profile& p0, const Profile& p1, double theta);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
  const ValidationCheck* find(const std::string& name) const;
  std::string summary() const;
};

ValidationReport validate_class_C(const Profile& p);

/// Throws ValidationError on out-of-range parameters.
void check_params(const ProfileParams& params);

}  // namespace vstab
