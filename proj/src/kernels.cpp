#include "vstab/kernels.hpp"

#include <exception>

#include "vstab/greens_kernel.hpp"

namespace vstab::kernels {

ComplexGrid sample_potential_serial(const Profile& p, Complex mu, double t0, double dt, std::size_t n) {
  ComplexGrid g(t0, dt, n);
  for (std::size_t i = 0; i < n; ++i) g.values[i] = potential_value(p, mu, g.t(i));
  return g;
}

ComplexGrid sample_potential(const Profile& p, Complex mu, double t0, double dt, std::size_t n) {
  ComplexGrid g(t0, dt, n);
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    g.values[k] = potential_value(p, mu, g.t(k));
  }
  return g;
}

std::vector<Complex> matching_batch_serial(const Coefficients& c, double m, const std::vector<Complex>& mus,
                                           const OdeOptions& ode) {
  std::vector<Complex> out(mus.size());
  for (std::size_t i = 0; i < mus.size(); ++i) out[i] = matching(c, m, mus[i], 0.0, ode);
  return out;
}

std::vector<Complex> matching_batch(const Coefficients& c, double m, const std::vector<Complex>& mus,
                                    const OdeOptions& ode) {
  std::vector<Complex> out(mus.size());
  std::vector<std::exception_ptr> errors(mus.size());
  const auto count = static_cast<long>(mus.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = matching(c, m, mus[k], 0.0, ode);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Eigen::MatrixXd lambda_matrix_serial(const Profile& p, double m, const std::vector<double>& nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd L = kernel_matrix(m, nodes);
  for (Eigen::Index i = 0; i < n; ++i) {
    L.row(i) *= p.A(nodes[i]);
    L(i, i) += p.Omega(nodes[i]);
  }
  return L;
}

Eigen::MatrixXd lambda_matrix(const Profile& p, double m, const std::vector<double>& nodes) {
  const auto w = hat_integrals(m, nodes);
  const auto n = static_cast<long>(nodes.size());
  Eigen::MatrixXd L(n, n);
  std::vector<double> a(nodes.size()), omega(nodes.size());
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) {
      a[i] = p.A(nodes[i]);
      omega[i] = p.Omega(nodes[i]);
    }
#pragma omp for schedule(static)
    for (long j = 0; j < n; ++j) {
      double* col = L.col(j).data();
      kernel_column(m, nodes, w, static_cast<std::size_t>(j), col);
      for (long i = 0; i < n; ++i) col[i] *= a[i];
      col[j] += omega[j];
    }
  }
  return L;
}

}  // namespace vstab::kernels
