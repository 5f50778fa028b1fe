#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "subdiff/core/errors.hpp"
#include "subdiff/core/initial_data.hpp"
#include "subdiff/frac/memory.hpp"

namespace subdiff {

namespace detail {

/// Periodic three-point Laplacian.
inline Eigen::SparseMatrix<double> periodic_laplacian(std::size_t n, double h) {
  std::vector<Eigen::Triplet<double>> trip;
  const double c = 1.0 / (h * h);
  const auto N = static_cast<long>(n);
  for (long j = 0; j < N; ++j) {
    trip.emplace_back(j, j, -2.0 * c);
    trip.emplace_back(j, (j + 1) % N, c);
    trip.emplace_back(j, (j + N - 1) % N, c);
  }
  Eigen::SparseMatrix<double> L(N, N);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

/// Output of the sub-diffusion solver; v = rho - rho0 is the variable actually stepped.
struct SubdiffusionSolution {
  DensityHistory rho;
  DensityHistory v;
  std::vector<double> rho0;
  double alpha = 0.0;
  double A = 0.0;
  double moment_factor = 0.5;
  double min_value = 0.0;  // monitored, not asserted

  double coefficient() const { return A * moment_factor; }
};

/// Memory-operator equation d/dt int rho (t-s)^-alpha = c rho_xx + t^-alpha rho0 on a periodic grid,
/// stepped in v = rho - rho0 with v(0) = 0, implicit diffusion and L1 memory weights.
inline SubdiffusionSolution solve_subdiffusion(double alpha, double A, const std::vector<double>& rho0,
                                               const PeriodicGrid& grid, double dt, double t_end,
                                               double moment_factor = 0.5) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigurationError("alpha must lie in (0, 1)");
  if (!(A >= 0.0)) throw ConfigurationError("diffusion coefficient must be nonnegative");
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw ConfigurationError("time step and horizon must be positive");
  if (rho0.size() != grid.cells) throw ConfigurationError("initial profile does not match the grid");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t n = grid.cells;
  const double c = A * moment_factor;
  const MemoryWeights w(alpha, dt, steps + 1);

  const Eigen::SparseMatrix<double> L = detail::periodic_laplacian(n, grid.dx());
  Eigen::SparseMatrix<double> S(static_cast<long>(n), static_cast<long>(n));
  S.setIdentity();
  S = w.newest() * S - c * L;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(S);
  if (solver.info() != Eigen::Success) throw NumericalFailure("memory-step matrix factorization failed");

  const Eigen::VectorXd r0 = detail::to_eigen(rho0);
  const Eigen::VectorXd source = c * (L * r0);

  SubdiffusionSolution out;
  out.alpha = alpha;
  out.A = A;
  out.moment_factor = moment_factor;
  out.rho0 = rho0;
  out.v.grid = out.rho.grid = grid;
  out.v.dt = out.rho.dt = dt;
  out.v.values.reserve(steps + 1);
  out.v.values.emplace_back(n, 0.0);
  out.min_value = *std::min_element(rho0.begin(), rho0.end());

  std::vector<double> hist(n);
  for (std::size_t k = 1; k <= steps; ++k) {
    // history part of the memory sum: sum_{i <= k-2} b_{k-1-i} (v_{i+1} - v_i)
    std::fill(hist.begin(), hist.end(), 0.0);
    for (std::size_t i = 0; i + 2 <= k; ++i) {
      const double b = w[k - 1 - i];
      const auto& a1 = out.v.values[i + 1];
      const auto& a0 = out.v.values[i];
      for (std::size_t j = 0; j < n; ++j) hist[j] += b * (a1[j] - a0[j]);
    }
    Eigen::VectorXd rhs = source + w.newest() * detail::to_eigen(out.v.values[k - 1]) - detail::to_eigen(hist);
    Eigen::VectorXd vk = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !vk.allFinite()) throw NumericalFailure("memory-step solve failed");
    out.v.values.push_back(detail::from_eigen(vk));
  }
  out.rho.values.reserve(out.v.values.size());
  for (const auto& vk : out.v.values) {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = vk[j] + rho0[j];
    out.min_value = std::min(out.min_value, *std::min_element(r.begin(), r.end()));
    out.rho.values.push_back(std::move(r));
  }
  return out;
}

inline SubdiffusionSolution solve_subdiffusion(double alpha, double A, const SpatialProfile& rho0,
                                               const PeriodicGrid& grid, double dt, double t_end,
                                               double moment_factor = 0.5) {
  return solve_subdiffusion(alpha, A, rho0.nodal_values(grid), grid, dt, t_end, moment_factor);
}

enum class TimeScheme { ImplicitEuler, CrankNicolson };

/// d rho / dt = D0 c rho_xx with c = A * moment_factor on a periodic grid.
inline DensityHistory solve_diffusion(double D0, double A, const std::vector<double>& rho0, const PeriodicGrid& grid,
                                      double dt, double t_end, double moment_factor = 0.5,
                                      TimeScheme scheme = TimeScheme::CrankNicolson) {
  if (!(D0 > 0.0) || !(A >= 0.0)) throw ConfigurationError("diffusion coefficients must be positive");
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw ConfigurationError("time step and horizon must be positive");
  if (rho0.size() != grid.cells) throw ConfigurationError("initial profile does not match the grid");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t n = grid.cells;
  const double c = D0 * A * moment_factor;
  const double theta = scheme == TimeScheme::CrankNicolson ? 0.5 : 1.0;
  const Eigen::SparseMatrix<double> L = detail::periodic_laplacian(n, grid.dx());
  Eigen::SparseMatrix<double> I(static_cast<long>(n), static_cast<long>(n));
  I.setIdentity();
  const Eigen::SparseMatrix<double> left = I - theta * dt * c * L;
  const Eigen::SparseMatrix<double> right = I + (1.0 - theta) * dt * c * L;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(left);
  if (solver.info() != Eigen::Success) throw NumericalFailure("diffusion matrix factorization failed");

  DensityHistory h;
  h.grid = grid;
  h.dt = dt;
  h.values.reserve(steps + 1);
  h.values.push_back(rho0);
  Eigen::VectorXd r = detail::to_eigen(rho0);
  for (std::size_t k = 1; k <= steps; ++k) {
    r = solver.solve(right * r);
    if (solver.info() != Eigen::Success || !r.allFinite()) throw NumericalFailure("diffusion solve failed");
    h.values.push_back(detail::from_eigen(r));
  }
  return h;
}

inline DensityHistory solve_diffusion(double D0, double A, const SpatialProfile& rho0, const PeriodicGrid& grid,
                                      double dt, double t_end, double moment_factor = 0.5,
                                      TimeScheme scheme = TimeScheme::CrankNicolson) {
  return solve_diffusion(D0, A, rho0.nodal_values(grid), grid, dt, t_end, moment_factor, scheme);
}

/// Amplitude of cos(2 pi k x / L) in a field on the grid (projection onto the mode).
inline double cosine_mode(const PeriodicGrid& grid, const std::vector<double>& f, int k = 1) {
  double s = 0.0;
  for (std::size_t j = 0; j < grid.cells; ++j)
    s += f[j] * std::cos(2.0 * std::numbers::pi * k * grid.center(j) / grid.length);
  return 2.0 * s / static_cast<double>(grid.cells);
}

}  // namespace subdiff
