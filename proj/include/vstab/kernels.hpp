#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vstab/grid_function.hpp"
#include "vstab/profile.hpp"
#include "vstab/shooting.hpp"

/// Data-parallel loops in an OpenMP version and a serial reference version with identical
/// arithmetic, so results agree bit for bit.
namespace vstab::kernels {

/// A / (Omega - mu) on a uniform grid.
ComplexGrid sample_potential_serial(const Profile& p, Complex mu, double t0, double dt, std::size_t n);
ComplexGrid sample_potential(const Profile& p, Complex mu, double t0, double dt, std::size_t n);

/// matching(c, m, mu) for every mu.
std::vector<Complex> matching_batch_serial(const Coefficients& c, double m, const std::vector<Complex>& mus,
                                           const OdeOptions& ode = {});
std::vector<Complex> matching_batch(const Coefficients& c, double m, const std::vector<Complex>& mus,
                                    const OdeOptions& ode = {});

/// diag(Omega) + diag(A) K_m on increasing nodes, with K_m as in kernel_matrix.
Eigen::MatrixXd lambda_matrix_serial(const Profile& p, double m, const std::vector<double>& nodes);
Eigen::MatrixXd lambda_matrix(const Profile& p, double m, const std::vector<double>& nodes);

}  // namespace vstab::kernels
