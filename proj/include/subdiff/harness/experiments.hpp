#pragma once

#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "subdiff/age/checks.hpp"
#include "subdiff/age/homogeneous.hpp"
#include "subdiff/age/space.hpp"
#include "subdiff/core/errors.hpp"
#include "subdiff/core/hazard.hpp"
#include "subdiff/core/initial_data.hpp"
#include "subdiff/core/kernel.hpp"
#include "subdiff/ctrw/particles.hpp"
#include "subdiff/ctrw/statistics.hpp"
#include "subdiff/frac/identities.hpp"
#include "subdiff/frac/mittag_leffler.hpp"
#include "subdiff/frac/solvers.hpp"
#include "subdiff/harness/config.hpp"
#include "subdiff/laplace/identities.hpp"
#include "subdiff/laplace/lemma.hpp"

namespace subdiff {

// Thresholds of the discretization-level checks.
inline constexpr double kMassDriftLimit = 1e-8;
inline constexpr double kComparisonSlack = 1e-12;
inline constexpr double kConstantRateLimit = 1e-10;
inline constexpr double kRenewalGapLimit = 0.02;
inline constexpr double kMittagLefflerLimit = 0.01;
inline constexpr double kDiffusionDecayLimit = 0.005;
inline constexpr double kEnergyLimit = 0.05;
inline constexpr double kConvexSlack = 1e-12;
inline constexpr double kMassConservationLimit = 1e-10;
inline constexpr double kNoiseMultiple = 2.0;

/// One line of report.csv; `pass` is empty for informational rows.
struct CheckRow {
  std::string check;
  double value = 0.0;
  std::optional<double> threshold;
  std::optional<bool> pass;
};

inline bool all_pass(const std::vector<CheckRow>& rows) {
  for (const auto& r : rows)
    if (r.pass && !*r.pass) return false;
  return true;
}

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers; results are written by index.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Block averages of a fine periodic field onto a grid with `coarse` cells.
inline std::vector<double> block_average(const std::vector<double>& fine, std::size_t coarse) {
  if (coarse == 0 || fine.size() % coarse != 0)
    throw ConfigurationError("reference grid is not a refinement of the comparison grid");
  const std::size_t r = fine.size() / coarse;
  std::vector<double> out(coarse, 0.0);
  for (std::size_t j = 0; j < coarse; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < r; ++i) s += fine[j * r + i];
    out[j] = s / static_cast<double>(r);
  }
  return out;
}

/// Least-squares slope of log y against log x; nullopt with fewer than two usable points.
inline std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  return sxy / sxx;
}

}  // namespace detail

inline HazardModel make_model(const ExperimentConfig& c) {
  return c.kind == CaseKind::SubDiffusion ? HazardModel::power_law(c.alpha) : HazardModel::constant(c.d0);
}

inline JumpKernel make_kernel(const ExperimentConfig& c, double eps = 1.0) {
  if (c.kernel == "gaussian") return JumpKernel(TruncatedGaussian{c.kernel_sigma}, eps);
  if (c.kernel == "dirac") return JumpKernel(Dirac{}, eps);
  return JumpKernel(Triangular{}, eps);
}

inline SpatialProfile make_profile(const ExperimentConfig& c) {
  if (c.initial_profile == "uniform") return SpatialProfile::uniform(c.profile_mean);
  if (c.initial_profile == "gaussian") return SpatialProfile::gaussian(c.profile_center, c.profile_width, c.profile_mean);
  if (std::abs(c.domain_length - 2.0 * std::numbers::pi) > 1e-12)
    throw ConfigurationError("the cosine profile needs domain_length = 2 pi");
  return SpatialProfile::cosine(c.profile_mean, c.profile_amplitude);
}

inline PeriodicGrid make_grid(const ExperimentConfig& c, std::size_t cells) { return {0.0, c.domain_length, cells}; }

inline SpaceMethod make_method(const ExperimentConfig& c) {
  if (c.method == "direct") return SpaceMethod::Direct;
  if (c.method == "modal-discrete") return SpaceMethod::ModalDiscrete;
  return SpaceMethod::ModalContinuum;
}

inline InitialAgeData make_initial(const ExperimentConfig& c) {
  return {make_profile(c), AgeProfile::exponential(c.age_rate)};
}

/// Macroscopic limit solution on a refined grid, sampled at the requested times.
struct ReferenceSolution {
  PeriodicGrid grid{};
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> rho;  // on `grid`
  std::optional<double> exact_discrepancy;  // relative error of the first cosine mode at t_end

  std::vector<double> on(std::size_t cells, std::size_t i) const { return detail::block_average(rho.at(i), cells); }
};

/// dt = max(min_eps^beta / 4, floor) and dx <= min_eps / divisor, with the cell count a power-of-two multiple of
/// `coarse_cells` so the reference can be averaged onto the comparison grid.
inline ReferenceSolution reference_solution(const ExperimentConfig& c, std::size_t coarse_cells,
                                            const std::vector<double>& times) {
  if (c.epsilons.empty()) throw ConfigurationError("reference solution needs at least one epsilon");
  const double min_eps = c.epsilons.back();
  ReferenceSolution ref;
  const double dt_rule = std::max(std::pow(min_eps, c.beta) / 4.0, c.reference_dt_floor);
  const double steps = std::ceil(c.t_end / dt_rule - 1e-9);
  ref.dt = c.t_end / steps;
  std::size_t cells = coarse_cells;
  while (c.domain_length / static_cast<double>(cells) > min_eps / c.reference_dx_divisor) cells *= 2;
  ref.grid = make_grid(c, cells);
  ref.times = times;

  const JumpKernel kernel = make_kernel(c);
  const double A = kernel.moment2();
  const SpatialProfile profile = make_profile(c);
  const std::vector<double> rho0 = profile.cell_averages(ref.grid);
  DensityHistory hist;
  double exact_ratio = 0.0;
  const double ccoef = A * c.moment_factor;
  if (c.kind == CaseKind::SubDiffusion) {
    hist = solve_subdiffusion(c.alpha, A, rho0, ref.grid, ref.dt, c.t_end, c.moment_factor).rho;
    exact_ratio = mittag_leffler(c.alpha, -ccoef / std::tgamma(1.0 - c.alpha) * std::pow(c.t_end, c.alpha));
  } else {
    hist = solve_diffusion(c.d0, A, rho0, ref.grid, ref.dt, c.t_end, c.moment_factor);
    exact_ratio = std::exp(-c.d0 * ccoef * c.t_end);
  }
  for (double t : times) ref.rho.push_back(hist.at(hist.index_of(t)));
  if (profile.is<SpatialProfile::Cosine>() && profile.as<SpatialProfile::Cosine>().amplitude != 0.0) {
    const double amp0 = cosine_mode(ref.grid, rho0);
    const double amp = cosine_mode(ref.grid, hist.values.back());
    ref.exact_discrepancy = std::abs(amp - amp0 * exact_ratio) / std::abs(amp0 * exact_ratio);
  }
  return ref;
}

struct ConvergenceRow {
  double eps = 0.0;
  double t = 0.0;
  double l1 = 0.0;
  bool ok = true;
  std::string error;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;          // eps-major, then comparison time
  std::vector<double> comparison_times;
  std::vector<std::optional<double>> order;  // fitted order in eps per comparison time
  std::vector<double> runtimes;              // seconds per eps, not part of the numeric payload
  std::size_t reference_cells = 0;
  double reference_dt = 0.0;
  std::optional<double> reference_discrepancy;
  double da = 0.0;
  std::size_t cells = 0;

  /// True when every row succeeded and the distance strictly decreases along the eps list at every time.
  bool monotone() const {
    const std::size_t nt = comparison_times.size();
    if (nt == 0) return true;
    const std::size_t ne = rows.size() / nt;
    for (std::size_t k = 0; k < nt; ++k)
      for (std::size_t e = 0; e < ne; ++e) {
        const auto& r = rows[e * nt + k];
        if (!r.ok) return false;
        if (e > 0 && !(r.l1 < rows[(e - 1) * nt + k].l1)) return false;
      }
    return true;
  }
};

/// L1 distance between the scaled age-structured density and the limit equation, per eps and comparison time.
inline ConvergenceReport run_convergence(const ExperimentConfig& c) {
  ConvergenceReport rep;
  rep.comparison_times = c.comparison_times;
  rep.da = c.da;
  rep.cells = c.cells;
  if (c.epsilons.empty()) return rep;
  const ReferenceSolution ref = reference_solution(c, c.cells, c.comparison_times);
  rep.reference_cells = ref.grid.cells;
  rep.reference_dt = ref.dt;
  rep.reference_discrepancy = ref.exact_discrepancy;

  const PeriodicGrid grid = make_grid(c, c.cells);
  const HazardModel model = make_model(c);
  const JumpKernel kernel = make_kernel(c);
  const InitialAgeData u0 = make_initial(c);
  SpaceOptions opt;
  opt.method = make_method(c);
  opt.snapshot_times = c.comparison_times;
  opt.record_trace = false;

  const std::size_t nt = c.comparison_times.size();
  rep.rows.resize(c.epsilons.size() * nt);
  rep.runtimes.assign(c.epsilons.size(), 0.0);
  std::vector<std::vector<double>> ref_coarse;
  for (std::size_t k = 0; k < nt; ++k) ref_coarse.push_back(ref.on(c.cells, k));

  detail::parallel_for(c.epsilons.size(), c.threads, [&](std::size_t e) {
    const auto t0 = std::chrono::steady_clock::now();
    const double eps = c.epsilons[e];
    for (std::size_t k = 0; k < nt; ++k) rep.rows[e * nt + k] = {eps, c.comparison_times[k], 0.0, true, {}};
    try {
      const RenewalTrace tr = solve_age_space(model, u0, kernel, eps, c.beta, c.t_end, c.da, grid, opt);
      for (std::size_t k = 0; k < nt; ++k)
        rep.rows[e * nt + k].l1 = l1_distance(grid, tr.snapshots.at(k).rho, ref_coarse[k]);
    } catch (const std::exception& ex) {
      for (std::size_t k = 0; k < nt; ++k) {
        rep.rows[e * nt + k].ok = false;
        rep.rows[e * nt + k].error = ex.what();
      }
    }
    rep.runtimes[e] = detail::seconds_since(t0);
  });

  for (std::size_t k = 0; k < nt; ++k) {
    std::vector<double> x, y;
    for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
      const auto& r = rep.rows[e * nt + k];
      if (r.ok) {
        x.push_back(r.eps);
        y.push_back(r.l1);
      }
    }
    rep.order.push_back(x.size() >= 2 ? detail::loglog_slope(x, y) : std::nullopt);
  }
  return rep;
}

/// One row of the identity battery and of the transform report.
struct BatteryRow {
  std::string identity;
  std::string parameters;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline std::string param(const std::string& name, double v) { return name + "=" + format_double(v); }

inline void push_row(std::vector<BatteryRow>& rows, std::string id, std::string params, double residual, double tol) {
  const bool pass = std::isfinite(residual) && residual < tol;
  rows.push_back({std::move(id), std::move(params), residual, tol, pass});
}

/// Runs fn and records a failing row with an infinite residual if it throws.
inline void guarded(std::vector<BatteryRow>& rows, const std::string& id, const std::string& params, double tol,
                    const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception&) {
    rows.push_back({id, params, std::numeric_limits<double>::infinity(), tol, false});
  }
}

inline AnalyticFunction battery_exponential() {
  return {[](double t) { return std::exp(-t); }, TailBound{1.0, 0.0}, {}, 0.0};
}

inline AnalyticFunction battery_indicator() {
  return {[](double t) { return t <= 1.0 ? 1.0 : 0.0; }, TailBound{1.0, 0.0}, {1.0}, 0.0};
}

}  // namespace detail

/// Transform identities for one alpha: memory-kernel transform, shifted-kernel transform, derivative rule and
/// scaling rule, plus the integral-decay bounds for u = t^(alpha-1).
inline void laplace_rows(std::vector<BatteryRow>& rows, double alpha, double tol) {
  using detail::param;
  const std::vector<std::pair<std::string, AnalyticFunction>> tests = {{"exp(-a)", detail::battery_exponential()},
                                                                       {"indicator(0..1)", detail::battery_indicator()}};
  for (const auto& [name, P] : tests)
    for (double s : {0.25, 1.0, 4.0}) {
      const std::string p = param("alpha", alpha) + ";" + param("s", s) + ";P=" + name;
      detail::guarded(rows, "fund_laplace", p, tol,
                      [&] { detail::push_row(rows, "fund_laplace", p, verify_fund_laplace(P, alpha, s).residual, tol); });
      detail::guarded(rows, "fund_laplace2", p, tol, [&] {
        detail::push_row(rows, "fund_laplace2", p, verify_fund_laplace2(P, alpha, s).residual, tol);
      });
    }
  // f = t^alpha e^-t vanishes at 0; its derivative has an integrable t^(alpha-1) singularity
  AnalyticFunction f{[alpha](double t) { return std::pow(t, alpha) * std::exp(-t); }, TailBound{1.0, 0.0}, {}, 0.0};
  AnalyticFunction fp{[alpha](double t) { return (alpha * std::pow(t, alpha - 1.0) - std::pow(t, alpha)) * std::exp(-t); },
                      TailBound{1.0 + alpha, 0.0}, {}, 1.0 - alpha};
  for (double s : {0.5, 1.0, 2.0}) {
    const std::string p = param("alpha", alpha) + ";" + param("s", s) + ";f=t^alpha*exp(-t)";
    detail::guarded(rows, "derivative_rule", p, tol,
                    [&] { detail::push_row(rows, "derivative_rule", p, derivative_rule(f, fp, s).residual, tol); });
  }
  for (double s : {0.25, 1.0, 4.0}) {
    const std::string p = param("alpha", alpha) + ";" + param("s", s);
    detail::guarded(rows, "scaling_rule", p, tol, [&] {
      detail::push_row(rows, "scaling_rule", p,
                       relative_residual(scaling_rule_value(alpha, s), boost::math::tgamma(alpha)), tol);
    });
  }
  const double eps = 0.5 * (1.0 - alpha);
  const std::string p = param("alpha", alpha) + ";" + param("eps", eps) + ";u=t^(alpha-1)";
  detail::guarded(rows, "lemma_bounds", p, 1.0, [&] {
    AnalyticFunction u{[alpha](double t) { return std::pow(t, alpha - 1.0); }, TailBound{1.0, alpha - 1.0}, {},
                       1.0 - alpha};
    const LemmaReport lr = lemma_integral_bounds(u, alpha, eps);
    // ratios below one mean the inequality holds
    rows.push_back({"lemma_upper", p, lr.upper_lhs / lr.upper_bound, 1.0, lr.precondition_ok && lr.upper_holds});
    rows.push_back({"lemma_lower", p, lr.lower_bound / lr.lower_lhs, 1.0, lr.precondition_ok && lr.lower_holds});
  });
}

/// Age-solver rows for one alpha: renewal identity and decay bounds.
inline void age_rows(std::vector<BatteryRow>& rows, double alpha) {
  using detail::param;
  const AgeProfile g = AgeProfile::exponential();
  const HazardModel model = HazardModel::power_law(alpha);
  detail::guarded(rows, "renewal_identity", param("alpha", alpha), kRenewalGapLimit, [&] {
    const RenewalTrace tr = solve_age_homogeneous(model, g, 100.0, 0.01);
    for (double t : {10.0, 100.0}) {
      const auto r = renewal_integral_check(tr, g, alpha, t);
      detail::push_row(rows, "renewal_identity", param("alpha", alpha) + ";" + param("t", t) + ";da=0.01",
                       r.relative_gap(), kRenewalGapLimit);
    }
  });
  detail::guarded(rows, "decay_bounds", param("alpha", alpha), 1.0, [&] {
    const RenewalTrace tr = solve_age_homogeneous(model, g, 1000.0, 0.1);
    for (double delta : {0.5, 0.9}) {
      const auto d = decay_weighted_integrals(tr, g, alpha, delta);
      const std::string p = param("alpha", alpha) + ";" + param("delta", delta) + ";t_end=1000";
      rows.push_back({"decay_upper", p, d.upper_integral / d.upper_bound, 1.0, d.upper_holds});
      rows.push_back({"decay_lower", p, d.lower_bound / d.lower_integral, 1.0, d.lower_holds});
    }
  });
}

/// Memory-operator rows for one alpha: chain rule, energy balance, convexity and the Mittag-Leffler cross-check.
inline void frac_rows(std::vector<BatteryRow>& rows, double alpha, double tol) {
  using detail::param;
  const SmoothPath lin{[](double t) { return t; }, [](double) { return 1.0; }};
  const SmoothPath quad_path{[](double t) { return t * t; }, [](double t) { return 2.0 * t; }};
  for (const auto& [name, v] : {std::pair{std::string("v=t"), lin}, std::pair{std::string("v=t^2"), quad_path}}) {
    const std::string p = param("alpha", alpha) + ";" + name + ";t=1";
    detail::guarded(rows, "chain_rule", p, tol,
                    [&] { detail::push_row(rows, "chain_rule", p, chain_rule_residual(v, alpha, 1.0).residual, tol); });
  }
  const std::string p = param("alpha", alpha) + ";cells=256;dt=0.001;t=1";
  detail::guarded(rows, "energy_balance", p, kEnergyLimit, [&] {
    const PeriodicGrid grid{0.0, 2.0 * std::numbers::pi, 256};
    const auto profile = SpatialProfile::cosine(1.0, 0.5);
    const auto sol = solve_subdiffusion(alpha, 1.0, profile.cell_averages(grid), grid, 1e-3, 1.0);
    detail::push_row(rows, "energy_balance", p, energy_balance(sol, sol.v.steps()).residual, kEnergyLimit);
    detail::push_row(rows, "convex_inequality", p, std::max(0.0, convex_inequality_violation(sol)), kConvexSlack);
    const double amp0 = cosine_mode(grid, sol.rho0);
    const double expected = amp0 * mittag_leffler(alpha, -0.5 / std::tgamma(1.0 - alpha));
    detail::push_row(rows, "mittag_leffler", p,
                     std::abs(cosine_mode(grid, sol.rho.values.back()) - expected) / std::abs(expected),
                     kMittagLefflerLimit);
  });
}

/// Transform identities only, for every alpha.
inline std::vector<BatteryRow> run_laplace_report(const std::vector<double>& alphas, double tolerance) {
  std::vector<BatteryRow> rows;
  for (double a : alphas) laplace_rows(rows, a, tolerance);
  return rows;
}

/// Every verification operation across the alpha list; identity rows use `tolerance`, discretization rows
/// (renewal, energy, Mittag-Leffler, convexity, inequality ratios) carry their own thresholds.
inline std::vector<BatteryRow> run_identity_battery(const std::vector<double>& alphas, double tolerance,
                                                    unsigned threads = 1) {
  std::vector<std::vector<BatteryRow>> parts(alphas.size());
  detail::parallel_for(alphas.size(), threads, [&](std::size_t i) {
    laplace_rows(parts[i], alphas[i], tolerance);
    age_rows(parts[i], alphas[i]);
    frac_rows(parts[i], alphas[i], tolerance);
  });
  std::vector<BatteryRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

inline bool battery_passes(const std::vector<BatteryRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

struct MicroMacroRow {
  double eps = 0.0;
  double t = 0.0;
  double mc_age = 0.0;
  double mc_pde = 0.0;
  double age_pde = 0.0;
  double noise = 0.0;
};

struct MicroMacroReport {
  std::vector<MicroMacroRow> rows;  // eps-major, then snapshot time
  std::vector<double> times;
  HistogramGrid bins;
  // per eps and time: empirical density, age-solver density, limit density on the bins
  std::vector<std::vector<std::vector<double>>> mc, age, pde;
  std::vector<double> runtimes;

  bool mc_within_noise() const {
    for (const auto& r : rows)
      if (!(r.mc_age < kNoiseMultiple * r.noise)) return false;
    return true;
  }

  /// Age-vs-limit distance strictly decreasing in eps at every time.
  bool age_pde_decreasing() const {
    const std::size_t nt = times.size();
    if (nt == 0) return true;
    for (std::size_t e = 1; e < rows.size() / nt; ++e)
      for (std::size_t k = 0; k < nt; ++k)
        if (!(rows[e * nt + k].age_pde < rows[(e - 1) * nt + k].age_pde)) return false;
    return true;
  }
};

/// Particle simulation, age-structured solver and limit equation on a common histogram grid.
inline MicroMacroReport run_micro_macro(const ExperimentConfig& c) {
  MicroMacroReport rep;
  rep.times = c.snapshot_times;
  const PeriodicGrid grid = make_grid(c, c.bins);
  rep.bins = HistogramGrid::from(grid);
  if (c.epsilons.empty()) return rep;
  const ReferenceSolution ref = reference_solution(c, c.bins, c.snapshot_times);
  const HazardModel model = make_model(c);
  const JumpKernel kernel = make_kernel(c);
  const InitialAgeData u0 = make_initial(c);
  const std::size_t nt = c.snapshot_times.size(), ne = c.epsilons.size();
  rep.rows.resize(ne * nt);
  rep.mc.resize(ne);
  rep.age.resize(ne);
  rep.pde.resize(ne);
  rep.runtimes.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const double eps = c.epsilons[e];
    ParticleSetup ps;
    ps.model = model;
    ps.kernel = kernel;
    ps.eps = eps;
    ps.beta = c.beta;
    ps.particles = c.particles;
    ps.snapshot_times = c.snapshot_times;
    ps.rho0 = u0.rho0;
    ps.domain = grid;
    ps.ages = u0.ages;
    ps.seed = c.seed + e;
    ps.threads = c.threads;
    const ParticleSnapshots snaps = simulate_particles(ps);

    SpaceOptions opt;
    opt.method = make_method(c);
    opt.snapshot_times = c.snapshot_times;
    opt.record_trace = false;
    const RenewalTrace tr = solve_age_space(model, u0, kernel, eps, c.beta, c.t_end, c.da, grid, opt);
    for (std::size_t k = 0; k < nt; ++k) {
      const auto dens = empirical_density(snaps.positions[k], rep.bins, snaps.mass);
      const auto noise = bootstrap_noise(snaps.positions[k], rep.bins, snaps.mass, c.bootstrap, c.seed + 1000003 * (e + 1) + k);
      const std::vector<double> age = tr.snapshots.at(k).rho;
      const std::vector<double> pde = ref.on(c.bins, k);
      MicroMacroRow& r = rep.rows[e * nt + k];
      r.eps = eps;
      r.t = c.snapshot_times[k];
      r.mc_age = histogram_l1(rep.bins, dens.rho_hat, age);
      r.mc_pde = histogram_l1(rep.bins, dens.rho_hat, pde);
      r.age_pde = histogram_l1(rep.bins, age, pde);
      r.noise = noise.mean;
      rep.mc[e].push_back(dens.rho_hat);
      rep.age[e].push_back(age);
      rep.pde[e].push_back(pde);
    }
    rep.runtimes[e] = detail::seconds_since(t0);
  }
  return rep;
}

/// Energy terms of a sub-diffusion run at the requested times, with the convexity check over the whole run.
struct EnergyCheck {
  std::vector<EnergyReport> terms;
  double convex_violation = 0.0;
  double mass_drift = 0.0;
};

inline EnergyCheck run_energy_check(const ExperimentConfig& c, const std::vector<double>& times) {
  if (c.kind != CaseKind::SubDiffusion) throw ConfigurationError("energy check needs the subdiffusion case");
  const PeriodicGrid grid = make_grid(c, c.cells);
  const auto profile = make_profile(c);
  const auto sol = solve_subdiffusion(c.alpha, 1.0, profile.cell_averages(grid), grid, c.dt, c.t_end, c.moment_factor);
  EnergyCheck out;
  for (double t : times) {
    const std::size_t k = sol.v.index_of(t);
    if (k == 0) continue;
    out.terms.push_back(energy_balance(sol, k));
  }
  out.convex_violation = std::max(0.0, convex_inequality_violation(sol));
  const double m0 = total_mass(grid, sol.rho.values.front());
  for (const auto& r : sol.rho.values) out.mass_drift = std::max(out.mass_drift, std::abs(total_mass(grid, r) - m0) / m0);
  return out;
}

}  // namespace subdiff
