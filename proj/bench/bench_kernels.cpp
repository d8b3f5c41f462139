// Serial reference vs OpenMP for the four parallel loops: potential sampling, batched
// matching evaluation, Lambda_m assembly and theta-grid gap curves.
#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include <CLI11.hpp>

#include "vstab/homotopy.hpp"
#include "vstab/kernels.hpp"
#include "vstab/lambda_oracle.hpp"

using namespace vstab;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, double diff) {
  std::printf("%-18s serial %9.4f s  openmp %9.4f s  speedup %5.2f  max diff %.1e\n", name, serial, parallel,
              serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernels"};
  std::size_t samples = 200000, mus = 32, nodes = 1000;
  int thetas = 6, reps = 3;
  app.add_option("--samples", samples, "potential samples");
  app.add_option("--mus", mus, "matching evaluations");
  app.add_option("--nodes", nodes, "Lambda_m nodes");
  app.add_option("--thetas", thetas, "gap-curve theta samples");
  app.add_option("--reps", reps, "repetitions, best time reported");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads %d\n", omp_get_max_threads());
  ProfileParams base;
  const Profile p0 = build_deep_well(base);
  ProfileParams deep = base;
  deep.B = 100.0;
  const Profile p1 = build_deep_well(deep);
  const Profile p = blend(p0, p1, 0.3);
  const Complex mu(0.5 * p.Omega(0.5), 0.02 * p.Omega_minus_inf());
  const double m = 2.0;

  {
    ComplexGrid a, b;
    const double dt = 40.0 / static_cast<double>(samples);
    const double ts = seconds([&] { a = kernels::sample_potential_serial(p, mu, -20.0, dt, samples); }, reps);
    const double tp = seconds([&] { b = kernels::sample_potential(p, mu, -20.0, dt, samples); }, reps);
    double d = 0.0;
    for (std::size_t i = 0; i < samples; ++i) d = std::max(d, std::abs(a[i] - b[i]));
    report("potential", ts, tp, d);
  }
  {
    const auto c = coefficients(p);
    std::vector<Complex> zs;
    for (std::size_t k = 0; k < mus; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(mus);
      zs.emplace_back(p.Omega_minus_inf() * (0.1 + 0.8 * s), 0.05 * p.Omega_minus_inf());
    }
    std::vector<Complex> a, b;
    const double ts = seconds([&] { a = kernels::matching_batch_serial(c, m, zs); }, reps);
    const double tp = seconds([&] { b = kernels::matching_batch(c, m, zs); }, reps);
    double d = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    report("matching batch", ts, tp, d);
  }
  {
    const auto x = clustered_nodes(-10.0, 20.0, nodes - 1, {});
    Eigen::MatrixXd a, b;
    const double ts = seconds([&] { a = kernels::lambda_matrix_serial(p, m, x); }, reps);
    const double tp = seconds([&] { b = kernels::lambda_matrix(p, m, x); }, reps);
    report("lambda matrix", ts, tp, (a - b).cwiseAbs().maxCoeff());
  }
  {
    const auto grid = uniform_theta_grid(thetas);
    GapCurves a, b;
    const double ts = seconds([&] { a = gap_curves_serial(p0, p1, grid); }, 1);
    const double tp = seconds([&] { b = gap_curves(p0, p1, grid); }, 1);
    double d = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      d = std::max({d, std::abs(a.rows[i].N - b.rows[i].N), std::abs(a.rows[i].W - b.rows[i].W)});
    }
    report("gap curves", ts, tp, d);
  }
}
