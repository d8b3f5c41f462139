#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vstab/greens_kernel.hpp"
#include "vstab/shooting.hpp"
#include "vstab/sturm_spectrum.hpp"

namespace vstab {

struct EigenpairResiduals {
  double matching = 0.0;            ///< |W / (-2m)| at the accepted mu
  double imag_identity = 0.0;       ///< int A |psi|^2 / |Omega - mu|^2
  Complex potential_integral{};     ///< int A |psi|^2 / (Omega - mu), should be -1
  Complex transversality{};         ///< int A psi^2 / (Omega - mu)^2
  double potential_error() const { return std::abs(potential_integral + 1.0); }
  bool acceptable(double imag_tol = 1e-6, double potential_tol = 1e-5,
                  double transversal_floor = 1e-6) const;
};

/// Eigenvalue mu (Im mu > 0) and eigenfunction psi, normalized so int |psi'|^2 + m^2 |psi|^2 = 1.
struct ComplexEigenpair {
  double m = 0.0;
  Complex mu{};
  ComplexGrid psi;
  ComplexGrid dpsi;
  EigenpairResiduals residuals;
  bool normalized = false;
  Complex square{};           ///< int psi^2
  Complex dmu_dm{};           ///< -2m int psi^2 / int A psi^2 / (Omega - mu)^2
  Complex moment{};           ///< int A psi e^{mt} / (Omega - mu), tail added in closed form
  Complex tail_coefficient{}; ///< lim e^{mt} psi(t) as t -> inf
  double left_window = 0.0, right_window = 0.0;
  int iterations = 0;
};

class EigenvalueNotFound : public NumericalError {
 public:
  enum class Reason { collapse, divergence, residual };
  EigenvalueNotFound(Reason reason, const std::string& what) : NumericalError(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

struct FindOptions {
  double tol = 1e-10;         ///< on |W / (-2m)|
  int max_iterations = 60;
  double collapse_floor = 0.0;  ///< Im mu below this counts as collapse; 0 uses 1e-9 Omega(-inf)
  double sample_dt = 2e-3;
  bool sample = true;
  bool check_residuals = true;
  OdeOptions ode{1e-12, 1e-15};
};

/// Secant iteration on the matching function, with a central-difference Newton fallback and
/// step halving to stay in Im mu > 0. The accepted pair carries its residuals.
ComplexEigenpair find_eigenvalue(const Profile& p, double m, Complex seed, const FindOptions& options = {});

/// Assembles the eigenpair at an already converged mu.
ComplexEigenpair assemble_eigenpair(const Profile& p, const Coefficients& c, double m, Complex mu,
                                    double left_T, double right_T, const FindOptions& options);

struct BranchSeed {
  Critical d = Critical::a;
  double m = 0.0;    ///< m_d - h at a, m_d + h at b
  Complex mu{};
  Complex D{};       ///< principal value plus i pi v(d) psi0(d)^2 / |Omega'(d)|
  double m_d = 0.0;
  double psi0_at_d = 0.0;
};

/// First-order guess near the end of the branch at Omega(d):
/// mu = Omega(d) - 2 m_d (m - m_d) / D.
BranchSeed seed_from_branch_point(const Profile& p, Critical d, double h,
                                  const BottomSpectrumResult* bottom = nullptr);

struct BranchSample {
  double m = 0.0;
  Complex mu{};
  Complex dmu_dm{};
  EigenpairResiduals residuals;
};

struct DispersionBranch {
  std::vector<BranchSample> samples;
  double m_a = 0.0, m_b = 0.0;
  double omega_a = 0.0, omega_b = 0.0;
  Complex mu_at_a{}, mu_at_b{};  ///< quadratic extrapolations to the endpoints
  std::string stop_reason;
};

struct BranchOptions {
  int n_steps = 50;
  double h0 = 0.0;         ///< distance from the endpoints; 0 picks 0.02 (m_a - m_b) capped at 0.05
  double min_step = 1e-4;
  double delta_min = 0.0;  ///< stop when Im mu falls below; 0 uses 1e-3 Omega(-inf)
  FindOptions find{};
};

class BranchError : public NumericalError {
 public:
  BranchError(const std::string& what, DispersionBranch partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const DispersionBranch& partial() const { return partial_; }

 private:
  DispersionBranch partial_;
};

/// Continuation in m from m_a - h0 down toward m_b with a tangent predictor. Below m_b + h0 the
/// remaining distance to m_b is halved per step until it is h0 / 16. Stops early when Im mu
/// falls below delta_min while decreasing.
DispersionBranch trace_branch(const Profile& p, const CriticalWavenumbers& cw,
                              const BranchOptions& options = {});

struct Contour {
  double re_lo = 0.0, re_hi = 1.0, im_lo = 1e-3, im_hi = 1.0;
};

/// Re in [-0.05, 1.05] Omega(-inf), Im in [delta_min, Omega(-inf)], delta_min = factor Omega(-inf).
Contour default_contour(const Profile& p, double delta_min_factor = 1e-3);

struct ExclusionCertificate {
  double m = 0.0;
  Contour contour;
  int winding = 0;
  double winding_raw = 0.0;     ///< accumulated phase / 2 pi
  bool conclusive = false;
  bool weakened = false;        ///< im_lo above 1e-2 Omega(-inf)
  double max_phase_step = 0.0;
  double min_abs_matching = 0.0;
  std::size_t evaluations = 0;
  std::string caveat;
  bool certifies_empty() const { return conclusive && winding == 0; }
};

/// Winding number of the matching function around the contour by adaptive phase tracking.
ExclusionCertificate scan_no_eigenvalue(const Profile& p, double m, const Contour& contour,
                                        int initial_per_edge = 24, int max_depth = 24);

struct MultiStartResult {
  std::vector<Complex> seeds;
  std::vector<std::optional<Complex>> roots;
  double spread = 0.0;  ///< largest distance between converged roots
  bool all_converged() const;
};

/// Independent solves from seeds drawn uniformly in the box around the branch window.
MultiStartResult multi_start(const Profile& p, double m, const Contour& box, int n_seeds,
                             unsigned seed, const FindOptions& options = {});

}  // namespace vstab
