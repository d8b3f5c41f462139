#pragma once

#include <vector>

#include "vstab/grid_function.hpp"
#include "vstab/profile.hpp"

namespace vstab {

/// Node concentration around center: a Cauchy-shaped density bump of the given half width
/// holding roughly share times the number of background nodes.
struct Cluster {
  double center = 0.0;
  double width = 0.1;
  double share = 0.5;
};

/// n_intervals + 1 increasing nodes on [lo, hi] from the smooth map inverting
/// s(t) = (t - lo) + sum_k c_k w_k (atan((t - t_k)/w_k) - atan((lo - t_k)/w_k)), normalized.
std::vector<double> clustered_nodes(double lo, double hi, std::size_t n_intervals,
                                    const std::vector<Cluster>& clusters);

/// All eigenvalues of the discretized Omega g + A K_m g on the nodes.
std::vector<Complex> lambda_spectrum(const Profile& p, double m, const std::vector<double>& nodes,
                                     bool parallel = true);

struct OracleOptions {
  std::size_t coarse = 600;                   ///< uniform first pass locating the critical layer
  std::vector<std::size_t> sizes{1000, 2000}; ///< clustered passes, each twice the previous
  double lo = 0.0, hi = 0.0;                  ///< window; 0 derives it from the tail decay
  double decay_digits = 30.0;                 ///< e-folds of the eigenfunction's source at the window ends
  bool cluster = true;
  bool parallel = true;
};

struct OracleResult {
  Complex mu{};      ///< Richardson extrapolation of the last two passes
  Complex coarse{};
  std::vector<std::size_t> sizes;
  std::vector<Complex> raw;
  double lo = 0.0, hi = 0.0;
  std::vector<Cluster> clusters;
  std::size_t unstable_count = 0;  ///< eigenvalues with Im > 1e-3 Omega(-inf) on the finest pass
};

/// Eigenvalue of largest imaginary part of the discretized operator, tracked through the passes.
/// Throws NumericalError when no eigenvalue lies in the upper half plane.
OracleResult lambda_oracle(const Profile& p, double m, const OracleOptions& options = {});

}  // namespace vstab
