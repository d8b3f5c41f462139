#pragma once

#include <functional>
#include <vector>

#include "vstab/grid_function.hpp"
#include "vstab/ode.hpp"
#include "vstab/profile.hpp"

namespace vstab {

/// Coefficients of -psi'' + m^2 psi + A/(Omega - mu) psi = 0 together with bounds on the tail
/// mass int |A/(Omega - mu)| beyond a window end. A bound returns +inf when T is not in the
/// range where it applies.
struct Coefficients {
  std::function<double(double)> A;
  std::function<double(double)> Omega;
  std::function<double(Complex mu, double T)> left_tail_mass;   ///< over (-inf, -T]
  std::function<double(Complex mu, double T)> right_tail_mass;  ///< over [T, inf)
  double min_left_window = 1.0;
  double min_right_window = 1.0;
  double tail_alpha = 0.0;  ///< A ~ -alpha e^{-alpha t}, Omega -> 0 on the right; 0 when unknown
};

Coefficients coefficients(const Profile& p);

/// A zero potential (A = 0), solutions e^{+-mt}.
Coefficients null_coefficients();

struct ShootOptions {
  double T = 0.0;            ///< window half-width on the side being shot; 0 selects it from the bound
  double match = 0.0;        ///< end point of the integration
  double bound_budget = 1e-10;
  double max_window = 400.0;
  OdeOptions ode{};
  bool integrals = false;    ///< also accumulate the quadratures below
  bool record = false;       ///< keep accepted steps for dense sampling
};

/// One accepted point of a shot: psi, psi' and psi'' at t.
struct ShotNode {
  double t;
  Complex psi, dpsi, d2psi;
};

/// Quadratures of the shot solution over its half line (start point normalization).
struct ShotIntegrals {
  double mass = 0.0;            ///< int |psi|^2
  double grad = 0.0;            ///< int |psi'|^2
  double abs_potential = 0.0;   ///< int A |psi|^2 / |Omega - mu|^2
  Complex potential{};          ///< int A |psi|^2 / (Omega - mu)
  Complex square{};             ///< int psi^2
  Complex transversal{};        ///< int A psi^2 / (Omega - mu)^2
  Complex moment{};             ///< int A psi e^{mt} / (Omega - mu)
};

struct Shot {
  Complex psi{}, dpsi{};  ///< at the match point
  double T = 0.0;
  double tail_bound = 0.0;  ///< exp(int |v| / 2m) - 1 beyond the window
  ShotIntegrals integrals;
  std::vector<ShotNode> nodes;
  OdeStats stats;
};

/// Solution ~ e^{mt} at -infinity, started at -T with phi = e^{-mt} psi = 1, phi' = 0 and
/// integrated to options.match.
Shot shoot_minus(const Coefficients& c, double m, Complex mu, const ShootOptions& options = {});
/// Solution ~ e^{-mt} at +infinity, started at +T with phi = e^{mt} psi = 1, phi' = 0.
Shot shoot_plus(const Coefficients& c, double m, Complex mu, const ShootOptions& options = {});

/// exp(int_{-inf}^{-T} |v| / 2m) - 1 and its mirror image.
double left_window_bound(const Coefficients& c, double m, Complex mu, double T);
double right_window_bound(const Coefficients& c, double m, Complex mu, double T);
/// Smallest window (on a 0.5 step) meeting the budget; throws WindowTooSmall beyond max_window.
double left_window(const Coefficients& c, double m, Complex mu, double budget, double max_window);
double right_window(const Coefficients& c, double m, Complex mu, double budget, double max_window);

/// W / (-2m) with W = psi_- psi_+' - psi_-' psi_+ evaluated at the match point. Equals 1 for a
/// zero potential and vanishes exactly at eigenvalues.
Complex matching(const Coefficients& c, double m, Complex mu, double match = 0.0,
                 const OdeOptions& ode = {});

}  // namespace vstab
