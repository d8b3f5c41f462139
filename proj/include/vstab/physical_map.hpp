#pragma once

#include <optional>
#include <vector>

#include "vstab/dispersion.hpp"
#include "vstab/grid_function.hpp"
#include "vstab/profile.hpp"

namespace vstab {

/// Physical-plane radial profiles: vorticity G(s), angular velocity R(s) by quadrature of
/// s^{-2} int_0^s tau G, B(s) = G'(s) / s by differentiation, and speed |V| = s R.
struct RadialProfiles {
  std::vector<double> s, G, R, B, speed;
};

/// s_grid must be positive; it need not be sorted.
RadialProfiles radial_profiles(const Profile& p, const std::vector<double>& s_grid);

struct RadialTailCheck {
  double right_B_error = 0.0;  ///< max |B + alpha s^{-alpha-2}| / (alpha s^{-alpha-2}) for s >= M
  double C_fit = 0.0;          ///< least-squares C in R - s^{-alpha}/(2-alpha) = C alpha s^{-2}, s >= M
  double C_error = 0.0;        ///< max relative misfit of that model
  double left_G_error = 0.0;   ///< max |G - (2 Omega(-inf) - 4 c0 s^2)| for s <= M1
  double round_trip_error = 0.0;  ///< max |R(e^t) - Omega(t)| and |G(e^t) - 2 Omega(t) - Omega'(t)|
  std::size_t right_points = 0, left_points = 0;
};
RadialTailCheck check_radial_tails(const Profile& p, const RadialProfiles& r);

/// Power-law continuation of a vorticity beyond its window: g(s) = g(s_end) (s / s_end)^power.
struct StreamTails {
  std::optional<double> left_power;
  std::optional<double> right_power;
};

/// psi(s) = -(1/2m) (s^m int_s^inf g tau^{1-m} + s^{-m} int_0^s g tau^{1+m}) and its derivative.
struct StreamFunction {
  ComplexGrid psi;
  ComplexGrid dpsi;
  ComplexGrid inner;  ///< int_0^s g tau^{1+m}
  ComplexGrid outer;  ///< int_s^inf g tau^{1-m}
};

/// g sampled on a uniform grid in s > 0. Cumulative integrals are trapezoid sums with the
/// endpoint-derivative correction. Nonzero ends need a declared tail.
StreamFunction stream_from_vorticity(int m, const ComplexGrid& g, const StreamTails& tails = {});

/// max over interior points of |psi'' + psi'/s - m^2 psi/s^2 - g| by centered differences of
/// order 2 or 4.
double radial_laplacian_residual(int m, const ComplexGrid& psi, const ComplexGrid& g, int order = 4);

/// Eigenmode in physical variables, on the points s_i = e^{t_i} of the eigenpair's log grid.
struct PhysicalEigenmode {
  int m = 0;
  Complex mu{};
  Complex lambda{};        ///< -i m mu
  double period = 0.0;     ///< azimuthal period 2 pi / m
  ComplexGrid g;           ///< vorticity g(e^t), normalized so g ~ s^{-m-alpha-2}
  ComplexGrid dg;          ///< d g(e^t) / dt
  ComplexGrid psi_s;       ///< stream function psi(e^t), same normalization
  ComplexGrid inner;       ///< int_0^s g tau^{1+m} as a function of t = log s
  ComplexGrid outer;       ///< int_s^inf g tau^{1-m}
  Complex normalization{}; ///< factor applied to the eigenpair's psi
  double alpha = 0.0;
  double decay_fit = 0.0;  ///< slope of log|g| against log s on the far tail
  Complex moment{};        ///< int_0^inf g tau^{1+m}, fitted power tail added in closed form
  double moment_residual = 0.0;  ///< |mu + alpha moment / (2m)| / |mu|
  double stream_residual = 0.0;  ///< max |psi from inner/outer - psi_s| / max |psi_s|
  bool degenerate = false;       ///< moment below tolerance

  /// Cubic Hermite interpolation of inner and outer in t; zero outside the grid.
  Complex stream(double r) const;
  Complex stream_derivative(double r) const;
  /// Cubic Hermite interpolation of g in t.
  Complex vorticity(double r) const;
  double r_min() const;
  double r_max() const;
};

struct ModeOptions {
  double decay_window = 5.0;  ///< fit log|g| over the last this many units of t
  double moment_tol = 1e-12;
  double layer_cells = 50.0;  ///< cells with |Omega - mu| < this many h |Omega'| are integrated on a refined Gauss rule
};

PhysicalEigenmode eigenmode_to_physical(const ComplexEigenpair& pair, const Profile& p, const ModeOptions& options = {});

/// Square n x n grid on [-r_out, r_out]^2; residuals use the points with r_in <= r <= r_out.
struct AnnulusGrid {
  int n = 256;
  double r_in = 1.0;
  double r_out = 2.0;
  double spacing() const { return 2.0 * r_out / (n - 1); }
  double coord(int i) const { return -r_out + spacing() * i; }
};

/// Default annulus [e^{logM + 0.25}, e^{logM + 1.25}] inside the power-law region.
AnnulusGrid default_annulus(const Profile& p, int n = 256);

/// w = psi'(r) e^{im theta} x_perp / r - i m psi(r) e^{im theta} x / r^2, with x_perp = (-x2, x1).
/// Points outside the annulus widened by three cells are left at zero.
struct VelocityField {
  AnnulusGrid grid;
  std::vector<Complex> wx, wy;  ///< row-major, index j * n + i for (x_i, y_j)
  Complex at_x(int i, int j) const { return wx[static_cast<std::size_t>(j) * grid.n + i]; }
  Complex at_y(int i, int j) const { return wy[static_cast<std::size_t>(j) * grid.n + i]; }
};

/// Throws ValidationError when the widened annulus reaches below the mode's smallest radius.
VelocityField perturbation_velocity(const PhysicalEigenmode& mode, const AnnulusGrid& grid);

/// Fourth-order centered div w and curl w - e^{im theta} g(r), maximized over the annulus and
/// divided by max |g| there.
struct VelocityResiduals {
  double divergence = 0.0;
  double curl = 0.0;
  double max_vorticity = 0.0;
  std::size_t points = 0;
};
VelocityResiduals velocity_residuals(const PhysicalEigenmode& mode, const VelocityField& field);

}  // namespace vstab
