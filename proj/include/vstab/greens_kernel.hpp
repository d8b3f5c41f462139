#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "vstab/grid_function.hpp"
#include "vstab/profile.hpp"

namespace vstab {

/// Exponential tails of an input beyond its window: f(t) = f(t0) e^{r_left (t - t0)} on the
/// left and f(t) = f(t_end) e^{-r_right (t - t_end)} on the right. A rate of 0 is a constant tail.
struct TailRates {
  std::optional<double> left;
  std::optional<double> right;
};

struct KernelApplication {
  double m = 0.0;
  RealGrid input;
  RealGrid output;
  double left_tail_mass = 0.0;   ///< e^{-m t0} int_{-inf}^{t0} e^{m eta} f
  double right_tail_mass = 0.0;  ///< e^{m t_end} int_{t_end}^{inf} e^{-m eta} f
};

/// psi = K_m f with K_m(xi, eta) = e^{-m|xi - eta|} / (2m), by the split form
/// e^{mt}/(2m) int_t^inf e^{-m eta} f + e^{-mt}/(2m) int_{-inf}^t e^{m eta} f. f is taken
/// piecewise linear between samples and integrated exactly, then the leading interpolation
/// error is removed, giving fourth order for smooth compact f. Inputs that do not vanish at the
/// window ends need declared tails.
KernelApplication apply_K(double m, const RealGrid& f, const TailRates& tails = {});

/// Matrix of the piecewise-linear discretization on arbitrary increasing nodes: entry (i, j) is
/// (1/2m) int hat_j(eta) e^{-m|t_i - eta|} d eta, with f assumed zero outside the nodes. On
/// uniform nodes with spacing h, apply_K equals (1 - h^2 m^2 / 12) K + (h^2 / 12) I.
Eigen::MatrixXd kernel_matrix(double m, const std::vector<double>& nodes);

/// Integrals of each hat function against e^{-ms} and e^{+ms} over its left and right cells.
struct HatIntegrals {
  std::vector<double> decay_left, decay_right, growth_left, growth_right;
};
HatIntegrals hat_integrals(double m, const std::vector<double>& nodes);

/// Column j of kernel_matrix written to out[0 .. nodes.size()).
void kernel_column(double m, const std::vector<double>& nodes, const HatIntegrals& w, std::size_t j,
                   double* out);

/// Which zero of A a critical value refers to.
enum class Critical { a, b };

/// v(t) = A(t) / (Omega(t) - mu).
Complex potential_value(const Profile& p, Complex mu, double t);

/// v(t) = A(t) / (Omega(t) - Omega(d)), with the removable singularity at t = d filled by
/// A'(d) / Omega'(d) through a local Taylor quotient.
double critical_potential(const Profile& p, Critical d, double t);

/// Samples of A / (Omega - mu) for Im mu > 0 (or any mu off [0, Omega(-inf)]).
ComplexGrid potential_v(const Profile& p, Complex mu, double t0, double dt, std::size_t n);

/// Real mu: allowed off [0, Omega(-inf)] or at Omega(a), Omega(b); otherwise ValidationError.
RealGrid potential_v(const Profile& p, double mu, double t0, double dt, std::size_t n);

RealGrid critical_potential_grid(const Profile& p, Critical d, double t0, double dt, std::size_t n);

/// max over interior nodes of |-D^2 psi + m^2 psi - f| with centered second differences.
double second_order_residual(double m, const RealGrid& psi, const RealGrid& f);

double critical_point(const Profile& p, Critical d);
double critical_value(const Profile& p, Critical d);

}  // namespace vstab
