#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "subdiff/age/cohorts.hpp"
#include "subdiff/core/space_grid.hpp"

namespace subdiff {

/// Time series produced by the age-structured solvers.
struct RenewalTrace {
  struct Snapshot {
    double t = 0.0;
    std::vector<double> rho;
  };

  std::vector<double> t;        // macroscopic times
  std::vector<double> renewal;  // U(t), integrated over space for spatial runs
  std::vector<double> mass;     // total mass

  std::vector<Snapshot> snapshots;  // rho(t, x) on `grid` (spatial runs)
  PeriodicGrid grid{};

  double da = 0.0;
  double time_scale = 1.0;  // macroscopic time per unit internal time
  double initial_mass = 0.0;
  double max_mass_drift = 0.0;       // max relative deviation of mass from its initial value
  bool comparison_checked = false;
  double comparison_initial = 0.0;   // initial max of u / mean survival
  double comparison_max = 0.0;       // max over the run
  double overflow_bias_bound = 0.0;  // max of bin mass * frozen hazard
  double a_max = 0.0;
};

struct HomogeneousOptions {
  double a_max = 0.0;           // 0 selects the initial support plus all reachable ages
  double tail_tolerance = 1e-17;
  double drift_tolerance = 1e-9;  // relative mass drift treated as a numerical failure
  bool keep_final_field = false;
};

struct HomogeneousResult {
  RenewalTrace trace;
  AgeDensityField final_field;
};

namespace detail {

inline std::size_t step_count(double t_internal, double da) {
  const double n = t_internal / da;
  if (!(n >= 0.0) || !std::isfinite(n)) throw ConfigurationError("time horizon must be nonnegative");
  return static_cast<std::size_t>(std::llround(n));
}

inline AgeGrid make_age_grid(const AgeProfile& g, double da, std::size_t steps, double a_max, double tail_tol) {
  if (!(da > 0.0)) throw ConfigurationError("age step must be positive");
  AgeGrid grid{da, 0};
  if (a_max > 0.0) {
    grid.cells = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(a_max / da)));
  } else {
    grid.cells = static_cast<std::size_t>(std::ceil(g.support_cutoff(tail_tol) / da)) + steps + 1;
  }
  return grid;
}

inline std::size_t used_cells(const AgeProfile& g, const AgeGrid& grid, std::size_t steps, double tail_tol) {
  return static_cast<std::size_t>(std::ceil(g.support_cutoff(tail_tol) / grid.da)) + steps + 2;
}

}  // namespace detail

/// Renewal equation without space: transport along characteristics with time step equal to the age step.
inline HomogeneousResult solve_age_homogeneous_full(const HazardModel& model, const AgeProfile& g, double t_end,
                                                    double da, const HomogeneousOptions& opt = {}) {
  const std::size_t steps = detail::step_count(t_end, da);
  const AgeGrid grid = detail::make_age_grid(g, da, steps, opt.a_max, opt.tail_tolerance);
  const detail::SurvivalTable table(model, grid, detail::used_cells(g, grid, steps, opt.tail_tolerance));
  const detail::InitialCohorts init = detail::initial_cohorts(g, table, opt.tail_tolerance);
  detail::CohortChain chain(table, init, 1.0, 1.0);
  chain.reserve(steps);

  HomogeneousResult out;
  RenewalTrace& tr = out.trace;
  tr.da = da;
  tr.a_max = grid.a_max();
  tr.t.reserve(steps + 1);
  tr.renewal.reserve(steps + 1);
  tr.mass.reserve(steps + 1);
  tr.comparison_checked = true;
  tr.comparison_initial = init.max_ratio;
  tr.comparison_max = init.max_ratio;

  const double m0 = chain.mass();
  tr.initial_mass = m0;
  auto record = [&](std::size_t n) {
    const double m = chain.mass();
    tr.t.push_back(static_cast<double>(n) * da);
    tr.renewal.push_back(chain.renewal());
    tr.mass.push_back(m);
    const double drift = m0 > 0.0 ? std::abs(m - m0) / m0 : std::abs(m);
    tr.max_mass_drift = std::max(tr.max_mass_drift, drift);
    tr.overflow_bias_bound = std::max(tr.overflow_bias_bound, chain.bin_mass() * table.bin_hazard());
  };
  record(0);
  for (std::size_t n = 1; n <= steps; ++n) {
    const double b = chain.step();
    tr.comparison_max = std::max(tr.comparison_max, b / da);
    record(n);
  }
  if (tr.max_mass_drift > opt.drift_tolerance)
    throw NumericalFailure("mass drift " + std::to_string(tr.max_mass_drift) + " exceeds tolerance");

  if (opt.keep_final_field) {
    out.final_field.grid = grid;
    out.final_field.space_cells = 1;
    out.final_field.values = chain.density();
    out.final_field.overflow = {chain.bin_mass()};
    out.final_field.t = static_cast<double>(steps) * da;
  }
  return out;
}

inline RenewalTrace solve_age_homogeneous(const HazardModel& model, const AgeProfile& g, double t_end, double da,
                                          const HomogeneousOptions& opt = {}) {
  return solve_age_homogeneous_full(model, g, t_end, da, opt).trace;
}

}  // namespace subdiff
