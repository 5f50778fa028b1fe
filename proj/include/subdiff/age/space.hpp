#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "subdiff/age/homogeneous.hpp"
#include "subdiff/core/kernel.hpp"

namespace subdiff {

/// Discretization of the spatial renewal coupling.
enum class SpaceMethod {
  Direct,          // per-cell cohorts, cell-averaged kernel weights, periodic discrete convolution
  ModalDiscrete,   // Fourier modes with the discrete convolution's multiplier (same result as Direct)
  ModalContinuum,  // Fourier modes with the exact kernel multiplier
};

struct SpaceOptions {
  SpaceMethod method = SpaceMethod::ModalContinuum;
  std::vector<double> snapshot_times;  // macroscopic; empty means the final time only
  bool record_trace = true;            // renewal and mass at every step
  double a_max = 0.0;                  // 0 selects the initial support plus all reachable ages
  double tail_tolerance = 1e-17;
  double drift_tolerance = 1e-9;
  double mode_cutoff = 1e-14;          // modes below this fraction of the largest are dropped
  double min_cells_across_support = 8.0;
};

namespace detail {

inline std::vector<std::size_t> snapshot_steps(const std::vector<double>& times, double t_end, double unit,
                                               std::size_t steps) {
  std::vector<std::size_t> out;
  if (times.empty()) {
    out.push_back(steps);
    return out;
  }
  for (double t : times) {
    if (t < 0.0 || t > t_end * (1.0 + 1e-12)) throw ConfigurationError("snapshot time outside [0, t_end]");
    out.push_back(std::min(steps, static_cast<std::size_t>(std::llround(t / unit))));
  }
  return out;
}

inline void periodic_convolve(const std::vector<double>& w, const std::vector<double>& in, std::vector<double>& out) {
  const long n = static_cast<long>(in.size());
  const long r = static_cast<long>(w.size() / 2);
  std::fill(out.begin(), out.end(), 0.0);
  for (long m = -r; m <= r; ++m) {
    const double wm = w[static_cast<std::size_t>(m + r)];
    if (wm == 0.0) continue;
    long shift = ((m % n) + n) % n;
    for (long j = 0; j < n; ++j) {
      long src = j + shift;
      if (src >= n) src -= n;
      out[static_cast<std::size_t>(j)] += wm * in[static_cast<std::size_t>(src)];
    }
  }
}

inline RenewalTrace solve_space_direct(const HazardModel& model, const InitialAgeData& u0, const JumpKernel& kernel,
                                       double unit, double t_end, double da, const PeriodicGrid& grid,
                                       const SpaceOptions& opt) {
  const double dx = grid.dx();
  if (!kernel.is_dirac() && 2.0 * kernel.epsilon() / dx < opt.min_cells_across_support)
    throw ConfigurationError("space grid does not resolve the kernel support: 2*eps/dx = " +
                             std::to_string(2.0 * kernel.epsilon() / dx));
  const std::size_t steps = step_count(t_end / unit, da);
  const AgeGrid agrid = make_age_grid(u0.ages, da, steps, opt.a_max, opt.tail_tolerance);
  const SurvivalTable table(model, agrid, used_cells(u0.ages, agrid, steps, opt.tail_tolerance));
  const InitialCohorts init = initial_cohorts(u0.ages, table, opt.tail_tolerance);
  const std::vector<double> w = kernel.cell_weights(dx);
  const std::vector<double> rho0 = u0.rho0.cell_averages(grid);
  for (double v : rho0)
    if (v < 0.0) throw ConfigurationError("initial density must be nonnegative");
  const std::size_t nx = grid.cells;
  const double rho_max = *std::max_element(rho0.begin(), rho0.end());

  // cohort rows, oldest first; row sums kept for cheap mass and renewal totals
  std::vector<double> q;
  std::vector<double> rowsum;
  const std::size_t n0 = init.normalized.size();
  q.reserve((n0 + steps + 1) * nx);
  for (std::size_t p = 0; p < n0; ++p) {
    double s = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      q.push_back(rho0[j] * init.normalized[n0 - 1 - p]);
      s += q.back();
    }
    rowsum.push_back(s);
  }
  std::size_t start = 0;
  std::vector<double> bin(nx);
  for (std::size_t j = 0; j < nx; ++j) bin[j] = rho0[j] * init.tail_mass;
  const double retention = std::exp(-table.bin_hazard() * da);
  const double again = 1.0 - table.mean(0);

  RenewalTrace tr;
  tr.grid = grid;
  tr.da = da;
  tr.time_scale = unit;
  tr.a_max = agrid.a_max();
  tr.comparison_checked = true;
  tr.comparison_initial = rho_max * init.max_ratio;
  tr.comparison_max = tr.comparison_initial;

  auto count = [&]() { return rowsum.size() - start; };
  auto totals = [&](double& mass, double& renewal) {
    const std::size_t c = count();
    double bsum = 0.0;
    for (double b : bin) bsum += b;
    mass = (dot(rowsum.data() + start, table.mean_for(c), c) + bsum) * dx;
    renewal = (dot(rowsum.data() + start, table.rate_for(c), c) + table.bin_hazard() * bsum) * dx;
  };
  auto snapshot = [&](std::size_t n) {
    std::vector<double> rho(bin);
    const std::size_t c = count();
    const double* mean = table.mean_for(c);
    for (std::size_t p = 0; p < c; ++p) {
      const double* row = q.data() + (start + p) * nx;
      for (std::size_t j = 0; j < nx; ++j) rho[j] += mean[p] * row[j];
    }
    tr.snapshots.push_back({static_cast<double>(n) * da * unit, std::move(rho)});
  };

  const auto snaps = snapshot_steps(opt.snapshot_times, t_end, unit * da, steps);
  double m0 = 0.0, u_init = 0.0;
  totals(m0, u_init);
  tr.initial_mass = m0;
  auto record = [&](std::size_t n) {
    if (!opt.record_trace) return;
    double m = 0.0, u = 0.0;
    totals(m, u);
    tr.t.push_back(static_cast<double>(n) * da * unit);
    tr.renewal.push_back(u);
    tr.mass.push_back(m);
    tr.max_mass_drift = std::max(tr.max_mass_drift, m0 > 0.0 ? std::abs(m - m0) / m0 : std::abs(m));
  };
  record(0);
  for (std::size_t k : snaps)
    if (k == 0) snapshot(0);

  std::vector<double> exits(nx), births(nx), term(nx), tmp(nx);
  for (std::size_t n = 1; n <= steps; ++n) {
    const std::size_t c = count();
    if (c > table.size()) throw NumericalFailure("age table too short for the cohort rows");
    const double* drop = table.drop_for(c);
    double bsum = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      const double loss = bin[j] * (1.0 - retention);
      exits[j] = loss;
      bin[j] -= loss;
      bsum += bin[j];
    }
    for (std::size_t p = 0; p < c; ++p) {
      const double dp = drop[p];
      const double* row = q.data() + (start + p) * nx;
      for (std::size_t j = 0; j < nx; ++j) exits[j] += dp * row[j];
    }
    // births = sum_m again^m K^{m+1} exits
    periodic_convolve(w, exits, term);
    births = term;
    double bmax = *std::max_element(births.begin(), births.end());
    for (int it = 0; it < 200 && again > 0.0; ++it) {
      periodic_convolve(w, term, tmp);
      double tmax = 0.0;
      for (std::size_t j = 0; j < nx; ++j) {
        term[j] = again * tmp[j];
        births[j] += term[j];
        tmax = std::max(tmax, std::abs(term[j]));
      }
      if (tmax <= 1e-18 * bmax) break;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      q.push_back(births[j]);
      s += births[j];
      tr.comparison_max = std::max(tr.comparison_max, births[j] / da);
    }
    rowsum.push_back(s);
    while (count() > table.cells()) {
      const double mfin = table.mean(table.cells());
      const double* row = q.data() + start * nx;
      for (std::size_t j = 0; j < nx; ++j) bin[j] += row[j] * mfin;
      ++start;
    }
    tr.overflow_bias_bound = std::max(tr.overflow_bias_bound, bsum * dx * table.bin_hazard());
    record(n);
    for (std::size_t k : snaps)
      if (k == n) snapshot(n);
  }
  if (tr.max_mass_drift > opt.drift_tolerance)
    throw NumericalFailure("mass drift " + std::to_string(tr.max_mass_drift) + " exceeds tolerance");
  return tr;
}

inline RenewalTrace solve_space_modal(const HazardModel& model, const InitialAgeData& u0, const JumpKernel& kernel,
                                      double unit, double t_end, double da, const PeriodicGrid& grid,
                                      const SpaceOptions& opt) {
  const std::size_t steps = step_count(t_end / unit, da);
  const AgeGrid agrid = make_age_grid(u0.ages, da, steps, opt.a_max, opt.tail_tolerance);
  const SurvivalTable table(model, agrid, used_cells(u0.ages, agrid, steps, opt.tail_tolerance));
  const InitialCohorts init = initial_cohorts(u0.ages, table, opt.tail_tolerance);
  const std::vector<double> rho0 = u0.rho0.cell_averages(grid);
  for (double v : rho0)
    if (v < 0.0) throw ConfigurationError("initial density must be nonnegative");
  const std::size_t nx = grid.cells;
  const double dx = grid.dx();

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, rho0);
  double amax = 0.0;
  for (const auto& c : spectrum) amax = std::max(amax, std::abs(c));

  std::vector<double> w;
  if (opt.method == SpaceMethod::ModalDiscrete) w = kernel.cell_weights(dx);
  auto multiplier = [&](std::size_t k) {
    if (opt.method == SpaceMethod::ModalContinuum)
      return kernel.fourier_multiplier(2.0 * std::numbers::pi * static_cast<double>(k) / grid.length);
    const long r = static_cast<long>(w.size() / 2);
    double m = 0.0;
    for (long i = -r; i <= r; ++i)
      m += w[static_cast<std::size_t>(i + r)] *
           std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(nx));
    return m;
  };

  const auto snaps = snapshot_steps(opt.snapshot_times, t_end, unit * da, steps);
  const std::size_t half = nx / 2;
  std::map<std::size_t, std::vector<double>> ratios;  // mode -> ratio at each snapshot
  RenewalTrace tr;
  tr.grid = grid;
  tr.da = da;
  tr.time_scale = unit;
  tr.a_max = agrid.a_max();
  const double total = total_mass(grid, rho0);
  tr.initial_mass = total;

  for (std::size_t k = 0; k <= half; ++k) {
    const bool active = std::abs(spectrum[k]) > opt.mode_cutoff * amax;
    if (!active) continue;
    if (k == 0 && !opt.record_trace) {
      // the zero mode carries the total mass, which the scheme conserves
      ratios[k] = std::vector<double>(snaps.size(), 1.0);
      continue;
    }
    CohortChain chain(table, init, 1.0, k == 0 ? 1.0 : multiplier(k));
    chain.reserve(steps);
    const double m0 = chain.mass();
    std::vector<double> r(snaps.size(), 0.0);
    auto visit = [&](std::size_t n) {
      for (std::size_t i = 0; i < snaps.size(); ++i)
        if (snaps[i] == n) r[i] = chain.mass() / m0;
      if (k == 0) {
        const double m = chain.mass();
        tr.t.push_back(static_cast<double>(n) * da * unit);
        tr.renewal.push_back(chain.renewal() / m0 * total);
        tr.mass.push_back(m / m0 * total);
        tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(m - m0) / m0);
        tr.overflow_bias_bound = std::max(tr.overflow_bias_bound, chain.bin_mass() / m0 * total * table.bin_hazard());
      }
    };
    visit(0);
    for (std::size_t n = 1; n <= steps; ++n) {
      chain.step();
      visit(n);
    }
    ratios[k] = std::move(r);
  }
  if (tr.max_mass_drift > opt.drift_tolerance)
    throw NumericalFailure("mass drift " + std::to_string(tr.max_mass_drift) + " exceeds tolerance");

  for (std::size_t i = 0; i < snaps.size(); ++i) {
    std::vector<std::complex<double>> s(nx, {0.0, 0.0});
    for (const auto& [k, r] : ratios) {
      s[k] = spectrum[k] * r[i];
      if (k != 0 && nx - k != k) s[nx - k] = spectrum[nx - k] * r[i];
    }
    std::vector<double> rho;
    fft.inv(rho, s);
    tr.snapshots.push_back({static_cast<double>(snaps[i]) * da * unit, std::move(rho)});
  }
  return tr;
}

}  // namespace detail

/// Scaled age-structured jump model on a periodic grid, stepped in internal time tau = t / eps^beta.
inline RenewalTrace solve_age_space(const HazardModel& model, const InitialAgeData& u0, const JumpKernel& kernel,
                                    double eps, double beta, double t_end, double da, const PeriodicGrid& grid,
                                    const SpaceOptions& opt = {}) {
  if (!(eps > 0.0) || !(beta > 0.0)) throw ConfigurationError("eps and beta must be positive");
  if (!(t_end >= 0.0)) throw ConfigurationError("t_end must be nonnegative");
  const JumpKernel k = kernel.with_epsilon(eps);
  const double unit = std::pow(eps, beta);
  if (opt.method == SpaceMethod::Direct) return detail::solve_space_direct(model, u0, k, unit, t_end, da, grid, opt);
  return detail::solve_space_modal(model, u0, k, unit, t_end, da, grid, opt);
}

}  // namespace subdiff
