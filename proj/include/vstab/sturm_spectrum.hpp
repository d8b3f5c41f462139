#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vstab/greens_kernel.hpp"
#include "vstab/grid_function.hpp"
#include "vstab/profile.hpp"

namespace vstab {

using RealFunction = std::function<double(double)>;

/// Spectrum of the symmetric tridiagonal discretization of -d^2/dt^2 + v on [-T, T] with
/// Dirichlet ends: diagonal 2/h^2 + v_i, off-diagonal -1/h^2, interior nodes only.
class Tridiagonal {
 public:
  Tridiagonal(const RealGrid& v);

  /// Number of eigenvalues strictly below lambda (Sturm count of LDL^T pivots).
  std::size_t count_below(double lambda) const;
  /// k-th smallest eigenvalue (k = 1, 2, ...) by bisection to absolute tolerance tol.
  double eigenvalue(std::size_t k, double tol = 1e-10) const;
  /// Eigenvector for an isolated eigenvalue by inverse iteration, including the zero end
  /// samples, normalized to h sum u^2 = 1 and positive at its largest entry.
  RealGrid eigenvector(double lambda) const;

  std::size_t size() const { return scaled_v_.size(); }

 private:
  // pivots are tracked as q_i = (1 + s_i) / h^2, s_i = h^2 (v_i - lambda) + s_{i-1} / (1 + s_{i-1}),
  // which keeps full relative precision in the small quantities s_i on fine grids
  std::vector<double> pivots(double lambda) const;

  double t0_, h_;
  std::vector<double> scaled_v_;  // h^2 v at interior nodes
};

struct BottomSpectrumResult {
  double lambda_min = 0.0;  ///< Richardson-extrapolated bottom eigenvalue
  double lambda_fd = 0.0;   ///< raw eigenvalue on the finest grid (the eigvec's eigenvalue)
  RealGrid eigvec;          ///< finest grid, h sum u^2 = 1
  double T = 0.0;
  std::size_t n = 0;        ///< intervals of the coarsest grid
  bool converged = false;
  std::vector<std::size_t> sizes;
  std::vector<double> history;  ///< raw FD eigenvalues per grid
  std::vector<double> extrapolated;
};

/// Uniform grid with n intervals on [-T, T].
RealGrid sample_window(const RealFunction& v, double T, std::size_t n);

/// Bottom eigenvalue on n, 2n and 4n intervals, Richardson-extrapolated in h^2. Throws
/// NumericalError with the history when the two extrapolants differ by more than rtol.
BottomSpectrumResult bottom_eigenvalue(const RealFunction& v, double T, std::size_t n,
                                       double rtol = 1e-6);

/// Discrete energy quotient (sum (u_{i+1} - u_i)^2 / h + h sum v u^2) / (h sum u^2); for an
/// eigenvector of Tridiagonal it reproduces the eigenvalue.
double rayleigh_quotient(const RealGrid& v, const RealGrid& u);

/// (int u'^2 + v u^2) / int u^2 by composite Simpson with the derivative supplied.
double rayleigh_quotient(const RealGrid& v, const RealGrid& u, const RealGrid& du);

/// Number of eigenvalues strictly below threshold on n and 2n intervals; throws NumericalError
/// when the two counts differ.
std::size_t count_below(const RealFunction& v, double threshold, double T, std::size_t n);

struct SpectralGap {
  std::vector<std::size_t> sizes;
  std::vector<double> lowest;
  std::vector<double> second;
  double gap() const { return second.back() - lowest.back(); }
  bool stable(double rtol = 0.05) const;
};

/// Lowest two FD eigenvalues on n and 2n intervals.
SpectralGap spectral_gap(const RealFunction& v, double T, std::size_t n);

/// Window half-width T = max(|logM1|, logM) + 30 / min(2, alpha).
double default_window(const Profile& p);
/// Coarse interval count resolving the profile's narrowest feature.
std::size_t default_intervals(const Profile& p, double T);

struct CriticalWavenumbers {
  double m_a = 0.0;
  double m_b = 0.0;
  BottomSpectrumResult at_a;
  BottomSpectrumResult at_b;
  bool ordered() const { return m_a > m_b; }
};

/// m_d = sqrt(-bottom(-d^2 + v_d)) with v_d the potential at mu = Omega(d), d = a, b.
/// Throws ValidationError when a bottom eigenvalue is not below -1. The window half-width
/// defaults to default_window(p).
CriticalWavenumbers critical_wavenumbers(const Profile& p, std::optional<double> window = {});

/// The bottom eigenvalue at one zero of A only.
BottomSpectrumResult critical_bottom(const Profile& p, Critical d, std::optional<double> window = {});

/// u(t) = (Omega(t) - Omega(d)) e^t on [-T, d] and its derivative, n intervals; u = 0 for t > d.
struct TestFunction {
  RealGrid u;
  RealGrid du;
};
TestFunction critical_test_function(const Profile& p, Critical d, double T, std::size_t n);

/// Rayleigh quotient of the same u against the potential at Omega(d), integrated adaptively
/// between the profile knots on [-T, d]. The potential term is A (Omega - Omega(d)) e^{2t}.
double critical_test_quotient(const Profile& p, Critical d, double T);

/// Rayleigh quotient of eta(t) = cos(pi t / 2) on [-1, 1] against the potential at Omega(a).
double cosine_test_quotient(const Profile& p, std::size_t n);

struct DeepWellSweepRow {
  double B = 0.0;
  double lambda_min = 0.0;
  double m_a = 0.0;
  double cosine_quotient = 0.0;
};

struct DeepWellSweep {
  std::vector<DeepWellSweepRow> rows;
  double B_star = 0.0;  ///< first grid value reaching the target, 0 when none did
  bool reached() const { return B_star > 0.0; }
};

/// Sweeps B over the given grid (in order) until the bottom eigenvalue at Omega(a) is <= -N^2.
/// With stop_at_target false every grid value is evaluated.
DeepWellSweep sweep_deep_well(const ProfileParams& base, const std::vector<double>& B_grid,
                              double target_N, bool stop_at_target = true);

}  // namespace vstab
