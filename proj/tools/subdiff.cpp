#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>

#include "subdiff/subdiff.hpp"

namespace fs = std::filesystem;
using namespace subdiff;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr const char* kSchemas = R"(Output files (all numbers in shortest round-trip form):
  report.csv                       check,value,threshold,pass
  run-metadata.txt                 config echo, versions, seed, threads, wall time
  simulate-age     age-trace[-eps<i>].csv       t,U,mass
                   age-snapshots-eps<i>.csv     t,x,rho
  simulate-ctrw    ctrw-snapshots.csv           t,mean,q01,q05,q25,q50,q75,q95,q99
                   ctrw-density.csv             t,x,rho_hat
                   ctrw-msd.csv                 t,msd
  solve-subdiffusion / solve-diffusion
                   solution.csv                 t,x,rho
  verify-laplace   laplace-report.csv           identity,parameters,residual,tolerance,pass
  identity-battery battery.csv                  identity,parameters,residual,tolerance,pass
  converge         convergence.csv              eps,t,l1,status
                   convergence-order.csv        t,order
  micro-macro      micro-macro.csv              eps,t,mc_age,mc_pde,age_pde,noise
                   micro-macro-density-eps<i>.csv t,x,rho_hat,rho_eps,rho0
  energy-check     energy.csv                   t,term1,term2,term3,term4,rhs,residual
Exit codes: 0 all checks pass, 1 check failure, 2 configuration error, 3 numerical failure.)";

struct Run {
  ExperimentConfig cfg;
  fs::path out;
  std::vector<CheckRow> checks;
  std::vector<std::pair<std::string, std::string>> meta;

  void check(std::string name, double value, double threshold, bool pass) {
    checks.push_back({std::move(name), value, threshold, pass});
  }
  void info(std::string name, double value) { checks.push_back({std::move(name), value, std::nullopt, std::nullopt}); }
  fs::path file(const std::string& name) const { return out / name; }
};

std::string tag(const std::string& base, std::size_t i) { return base + "-eps" + std::to_string(i) + ".csv"; }

/// Row stride keeping long traces at most `cap` rows; the last row is always written.
template <class F>
void strided(std::size_t n, std::size_t cap, F&& emit) {
  if (n == 0) return;
  const std::size_t stride = std::max<std::size_t>(1, (n + cap - 1) / cap);
  for (std::size_t i = 0; i < n; i += stride) emit(i);
  if ((n - 1) % stride != 0) emit(n - 1);
}

void write_trace(const fs::path& path, const RenewalTrace& tr) {
  CsvWriter w(path, {"t", "U", "mass"});
  strided(tr.t.size(), 20000, [&](std::size_t i) { w.row({tr.t[i], tr.renewal[i], tr.mass[i]}); });
}

void write_field(CsvWriter& w, const PeriodicGrid& g, double t, const std::vector<double>& rho) {
  for (std::size_t j = 0; j < g.cells; ++j) w.row({t, g.center(j), rho[j]});
}

void trace_checks(Run& r, const RenewalTrace& tr, const std::string& prefix) {
  r.check(prefix + "mass_drift", tr.max_mass_drift, kMassDriftLimit, tr.max_mass_drift < kMassDriftLimit);
  if (tr.comparison_checked) {
    const double excess = tr.comparison_max - tr.comparison_initial;
    r.check(prefix + "comparison_excess", excess, kComparisonSlack, excess <= kComparisonSlack);
  }
}

void cmd_simulate_age(Run& r) {
  const auto& c = r.cfg;
  const HazardModel model = make_model(c);
  const InitialAgeData u0 = make_initial(c);
  if (!c.spatial) {
    const RenewalTrace tr = solve_age_homogeneous(model, u0.ages, c.t_end, c.da);
    write_trace(r.file("age-trace.csv"), tr);
    trace_checks(r, tr, "");
    if (c.kind == CaseKind::NormalDiffusion) {
      double worst = 0.0;
      for (std::size_t i = 0; i < tr.t.size(); ++i)
        worst = std::max(worst, std::abs(tr.renewal[i] - c.d0 * tr.mass[i]) / (c.d0 * tr.initial_mass));
      r.check("constant_rate_deviation", worst, kConstantRateLimit, worst <= kConstantRateLimit);
    } else {
      for (double t : c.comparison_times) {
        if (t <= 0.0) continue;
        const auto id = renewal_integral_check(tr, u0.ages, c.alpha, t);
        r.check("renewal_identity_gap[t=" + format_double(t) + "]", id.relative_gap(), kRenewalGapLimit,
                id.relative_gap() < kRenewalGapLimit);
      }
      for (double delta : c.decay_deltas) {
        const auto d = decay_weighted_integrals(tr, u0.ages, c.alpha, delta);
        const std::string p = "[delta=" + format_double(delta) + "]";
        r.check("decay_upper_ratio" + p, d.upper_integral / d.upper_bound, 1.0, d.upper_holds);
        r.check("decay_lower_ratio" + p, d.lower_bound / d.lower_integral, 1.0, d.lower_holds);
      }
    }
    return;
  }
  const PeriodicGrid grid = make_grid(c, c.cells);
  const JumpKernel kernel = make_kernel(c);
  SpaceOptions opt;
  opt.method = make_method(c);
  opt.snapshot_times = c.snapshot_times;
  for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const RenewalTrace tr = solve_age_space(model, u0, kernel, c.epsilons[e], c.beta, c.t_end, c.da, grid, opt);
    write_trace(r.file(tag("age-trace", e)), tr);
    CsvWriter w(r.file(tag("age-snapshots", e)), {"t", "x", "rho"});
    for (const auto& s : tr.snapshots) write_field(w, grid, s.t, s.rho);
    trace_checks(r, tr, "eps=" + format_double(c.epsilons[e]) + ":");
    r.meta.emplace_back("runtime_seconds[eps=" + format_double(c.epsilons[e]) + "]",
                        format_double(detail::seconds_since(t0)));
  }
}

void cmd_simulate_ctrw(Run& r) {
  const auto& c = r.cfg;
  if (c.epsilons.empty()) throw ConfigurationError("simulate-ctrw needs an epsilon");
  const PeriodicGrid grid = make_grid(c, c.bins);
  ParticleSetup ps;
  ps.model = make_model(c);
  ps.kernel = make_kernel(c);
  ps.eps = c.epsilons.front();
  ps.beta = c.beta;
  ps.particles = c.particles;
  ps.snapshot_times = c.snapshot_times;
  ps.rho0 = make_profile(c);
  ps.domain = grid;
  ps.ages = AgeProfile::exponential(c.age_rate);
  ps.seed = c.seed;
  ps.threads = c.threads;
  const ParticleSnapshots snaps = simulate_particles(ps);

  std::vector<std::string> header = {"t", "mean"};
  for (double q : summary_levels()) {
    const int pct = static_cast<int>(std::lround(q * 100));
    header.push_back(std::string("q") + (pct < 10 ? "0" : "") + std::to_string(pct));
  }
  CsvWriter qs(r.file("ctrw-snapshots.csv"), header);
  CsvWriter ds(r.file("ctrw-density.csv"), {"t", "x", "rho_hat"});
  const HistogramGrid bins = HistogramGrid::from(grid);
  for (std::size_t s = 0; s < snaps.times.size(); ++s) {
    const auto sum = summarize_positions(snaps.times[s], snaps.positions[s]);
    std::vector<double> row = {sum.t, sum.mean};
    row.insert(row.end(), sum.quantiles.begin(), sum.quantiles.end());
    qs.row(row);
    const auto d = empirical_density(snaps.positions[s], bins, snaps.mass);
    for (std::size_t j = 0; j < bins.bins; ++j) ds.row({snaps.times[s], bins.center(j), d.rho_hat[j]});
  }
  r.info("renewals", static_cast<double>(snaps.renewals));

  if (snaps.times.size() >= 2) {
    const MsdSeries m = msd(snaps, c.msd_window[0], c.msd_window[1]);
    CsvWriter w(r.file("ctrw-msd.csv"), {"t", "msd"});
    for (std::size_t i = 0; i < m.t.size(); ++i) w.row({m.t[i], m.msd[i]});
    if (m.fit) {
      const double target = c.kind == CaseKind::SubDiffusion ? c.alpha : 1.0;
      const double err = std::abs(m.fit->slope - target);
      r.info("msd_slope", m.fit->slope);
      r.check("msd_slope_error", err, c.msd_tolerance, err <= c.msd_tolerance);
    }
  }
  if (!snaps.times.empty()) {
    const DriftSummary d = mean_displacement(snaps);
    const double z = d.standard_error.back() > 0.0 ? std::abs(d.mean.back()) / d.standard_error.back() : 0.0;
    r.check("final_drift_in_standard_errors", z, 3.0, z <= 3.0);
  }
}

void solution_output(Run& r, const DensityHistory& h) {
  CsvWriter w(r.file("solution.csv"), {"t", "x", "rho"});
  for (double t : r.cfg.snapshot_times) {
    const std::size_t k = h.index_of(t);
    write_field(w, h.grid, h.time(k), h.at(k));
  }
  const double m0 = total_mass(h.grid, h.values.front());
  double drift = 0.0;
  for (const auto& v : h.values) drift = std::max(drift, std::abs(total_mass(h.grid, v) - m0) / std::abs(m0));
  r.check("mass_drift", drift, kMassConservationLimit, drift <= kMassConservationLimit);
  double mn = h.values.front()[0];
  for (const auto& v : h.values)
    for (double x : v) mn = std::min(mn, x);
  r.info("min_value", mn);
}

void cmd_solve(Run& r, bool subdiffusion) {
  const auto& c = r.cfg;
  const PeriodicGrid grid = make_grid(c, c.cells);
  const SpatialProfile profile = make_profile(c);
  const double A = make_kernel(c).moment2();
  const std::vector<double> rho0 = profile.cell_averages(grid);
  DensityHistory h;
  double exact_ratio = 0.0;
  const double coef = A * c.moment_factor;
  if (subdiffusion) {
    if (c.kind != CaseKind::SubDiffusion) throw ConfigurationError("solve-subdiffusion needs case = subdiffusion");
    h = solve_subdiffusion(c.alpha, A, rho0, grid, c.dt, c.t_end, c.moment_factor).rho;
    exact_ratio = mittag_leffler(c.alpha, -coef / std::tgamma(1.0 - c.alpha) * std::pow(h.time(h.steps()), c.alpha));
  } else {
    if (c.kind != CaseKind::NormalDiffusion) throw ConfigurationError("solve-diffusion needs case = diffusion");
    h = solve_diffusion(c.d0, A, rho0, grid, c.dt, c.t_end, c.moment_factor);
    exact_ratio = std::exp(-c.d0 * coef * h.time(h.steps()));
  }
  solution_output(r, h);
  if (profile.is<SpatialProfile::Cosine>() && profile.as<SpatialProfile::Cosine>().amplitude != 0.0) {
    const double a0 = cosine_mode(grid, rho0);
    const double err = std::abs(cosine_mode(grid, h.values.back()) - a0 * exact_ratio) / std::abs(a0 * exact_ratio);
    const double lim = subdiffusion ? kMittagLefflerLimit : kDiffusionDecayLimit;
    r.check(subdiffusion ? "mittag_leffler_mode_error" : "exponential_mode_error", err, lim, err < lim);
  }
  if (h.steps() >= 1) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < grid.cells; ++j) {
      num = std::max(num, std::abs(h.values[1][j] - rho0[j]));
      den = std::max(den, std::abs(rho0[j]));
    }
    r.info("first_step_relative_change", den > 0.0 ? num / den : 0.0);
  }
}

void battery_output(Run& r, const std::vector<BatteryRow>& rows, const std::string& name) {
  CsvWriter w(r.file(name), {"identity", "parameters", "residual", "tolerance", "pass"});
  for (const auto& row : rows) {
    w.row_strings({row.identity, row.parameters, format_double(row.residual), format_double(row.tolerance),
                   row.pass ? "true" : "false"});
    r.check(row.identity + "[" + row.parameters + "]", row.residual, row.tolerance, row.pass);
  }
  r.info("rows", static_cast<double>(rows.size()));
}

void cmd_converge(Run& r) {
  const ConvergenceReport rep = run_convergence(r.cfg);
  CsvWriter w(r.file("convergence.csv"), {"eps", "t", "l1", "status"});
  for (const auto& row : rep.rows)
    w.row_strings({format_double(row.eps), format_double(row.t), row.ok ? format_double(row.l1) : "",
                   row.ok ? "ok" : "failed: " + row.error});
  CsvWriter o(r.file("convergence-order.csv"), {"t", "order"});
  for (std::size_t k = 0; k < rep.comparison_times.size(); ++k)
    o.row_strings({format_double(rep.comparison_times[k]), rep.order[k] ? format_double(*rep.order[k]) : ""});
  r.info("reference_cells", static_cast<double>(rep.reference_cells));
  r.info("reference_dt", rep.reference_dt);
  if (rep.reference_discrepancy) r.info("reference_exact_mode_error", *rep.reference_discrepancy);
  for (std::size_t k = 0; k < rep.comparison_times.size(); ++k)
    if (rep.order[k]) r.info("order[t=" + format_double(rep.comparison_times[k]) + "]", *rep.order[k]);
  std::size_t failed = 0;
  for (const auto& row : rep.rows) failed += row.ok ? 0 : 1;
  r.check("failed_runs", static_cast<double>(failed), 0.0, failed == 0);
  if (r.cfg.epsilons.size() >= 2) r.check("l1_strictly_decreasing", rep.monotone() ? 1.0 : 0.0, 1.0, rep.monotone());
  for (std::size_t e = 0; e < rep.runtimes.size(); ++e)
    r.meta.emplace_back("runtime_seconds[eps=" + format_double(r.cfg.epsilons[e]) + "]", format_double(rep.runtimes[e]));
}

void cmd_micro_macro(Run& r) {
  const MicroMacroReport rep = run_micro_macro(r.cfg);
  CsvWriter w(r.file("micro-macro.csv"), {"eps", "t", "mc_age", "mc_pde", "age_pde", "noise"});
  for (const auto& row : rep.rows) w.row({row.eps, row.t, row.mc_age, row.mc_pde, row.age_pde, row.noise});
  for (std::size_t e = 0; e < rep.mc.size(); ++e) {
    CsvWriter d(r.file(tag("micro-macro-density", e)), {"t", "x", "rho_hat", "rho_eps", "rho0"});
    for (std::size_t k = 0; k < rep.times.size(); ++k)
      for (std::size_t j = 0; j < rep.bins.bins; ++j)
        d.row({rep.times[k], rep.bins.center(j), rep.mc[e][k][j], rep.age[e][k][j], rep.pde[e][k][j]});
    r.meta.emplace_back("runtime_seconds[eps=" + format_double(r.cfg.epsilons[e]) + "]", format_double(rep.runtimes[e]));
  }
  for (const auto& row : rep.rows) {
    const std::string p = "[eps=" + format_double(row.eps) + ";t=" + format_double(row.t) + "]";
    const double ratio = row.noise > 0.0 ? row.mc_age / row.noise : INFINITY;
    r.check("mc_age_over_noise" + p, ratio, kNoiseMultiple, ratio < kNoiseMultiple);
  }
  if (r.cfg.epsilons.size() >= 2)
    r.check("age_pde_strictly_decreasing", rep.age_pde_decreasing() ? 1.0 : 0.0, 1.0, rep.age_pde_decreasing());
}

void cmd_energy(Run& r) {
  const EnergyCheck ec = run_energy_check(r.cfg, r.cfg.snapshot_times);
  CsvWriter w(r.file("energy.csv"), {"t", "term1", "term2", "term3", "term4", "rhs", "residual"});
  for (const auto& e : ec.terms) {
    w.row({e.t, e.term1, e.term2, e.term3, e.term4, e.rhs, e.residual});
    r.check("energy_residual[t=" + format_double(e.t) + "]", e.residual, kEnergyLimit, e.residual < kEnergyLimit);
  }
  r.check("convex_violation", ec.convex_violation, kConvexSlack, ec.convex_violation <= kConvexSlack);
  r.check("mass_drift", ec.mass_drift, kMassConservationLimit, ec.mass_drift <= kMassConservationLimit);
}

void write_report(const Run& r) {
  CsvWriter w(r.file("report.csv"), {"check", "value", "threshold", "pass"});
  for (const auto& c : r.checks)
    w.row_strings({c.check, format_double(c.value), c.threshold ? format_double(*c.threshold) : "",
                   c.pass ? (*c.pass ? "true" : "false") : "info"});
}

void write_metadata(const Run& r, const std::string& sub, const std::string& config_path, double seconds,
                    const std::string& status) {
  std::ofstream m(r.file("run-metadata.txt"));
  m << "subcommand: " << sub << "\n";
  m << "config_path: " << config_path << "\n";
  m << "subdiff_version: " << kVersion << "\n";
  m << "compiler: " << __VERSION__ << "\n";
  m << "cxx_standard: " << __cplusplus << "\n";
  m << "boost_version: " << BOOST_LIB_VERSION << "\n";
  m << "eigen_version: " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
  m << "seed: " << r.cfg.seed << "\n";
  m << "threads: " << r.cfg.threads << "\n";
  m << "wall_time_seconds: " << format_double(seconds) << "\n";
  m << "status: " << status << "\n";
  for (const auto& [k, v] : r.meta) m << k << ": " << v << "\n";
  m << "\n# effective configuration\n" << r.cfg.to_config().serialize();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-structured renewal, random walk and memory-equation laboratory"};
  app.footer(kSchemas);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"simulate-age", "age-structured renewal solver (homogeneous or spatial)"},
      {"simulate-ctrw", "Monte Carlo random walk: quantiles, density, MSD"},
      {"solve-subdiffusion", "memory-equation solver with Mittag-Leffler check"},
      {"solve-diffusion", "diffusion solver with exponential-decay check"},
      {"verify-laplace", "transform identities over the alpha list"},
      {"identity-battery", "all identity and discretization checks over the alpha list"},
      {"converge", "L1 distance of the scaled age model to the limit equation per epsilon"},
      {"micro-macro", "particles vs age solver vs limit equation"},
      {"energy-check", "energy balance and convexity of the memory-equation solution"}};
  for (const auto& [name, desc] : subs) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->add_option("--config", config_path, "flat key = value config file")->required();
    s->add_option("--out", out_dir, "output directory (overrides output_dir)");
    s->add_option("--seed", seed, "random seed (overrides seed)");
    s->add_option("--threads", threads, "worker threads (overrides threads)")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  Run run;
  int code = 0;
  std::string status = "pass";
  try {
    run.cfg = ExperimentConfig::from(Config::load(config_path));
    if (seed) run.cfg.seed = *seed;
    if (threads) run.cfg.threads = *threads;
    if (!out_dir.empty()) run.cfg.output_dir = out_dir;
    run.cfg.validate();
    run.out = run.cfg.output_dir;
    fs::create_directories(run.out);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sub == "simulate-age") cmd_simulate_age(run);
    else if (sub == "simulate-ctrw") cmd_simulate_ctrw(run);
    else if (sub == "solve-subdiffusion") cmd_solve(run, true);
    else if (sub == "solve-diffusion") cmd_solve(run, false);
    else if (sub == "verify-laplace") battery_output(run, run_laplace_report(run.cfg.alphas, run.cfg.tolerance), "laplace-report.csv");
    else if (sub == "identity-battery")
      battery_output(run, run_identity_battery(run.cfg.alphas, run.cfg.tolerance, run.cfg.threads), "battery.csv");
    else if (sub == "converge") cmd_converge(run);
    else if (sub == "micro-macro") cmd_micro_macro(run);
    else if (sub == "energy-check") cmd_energy(run);
    if (!all_pass(run.checks)) {
      code = 1;
      status = "check failure";
    }
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    code = 2;
    status = std::string("configuration error: ") + e.what();
  } catch (const UnsupportedConfiguration& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    code = 2;
    status = std::string("configuration error: ") + e.what();
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    code = 3;
    status = std::string("numerical failure: ") + e.what();
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    code = 3;
    status = std::string("numerical failure: ") + e.what();
  }

  try {
    write_report(run);
    write_metadata(run, sub, config_path, detail::seconds_since(t0), status);
  } catch (const std::exception& e) {
    std::cerr << "cannot write outputs: " << e.what() << "\n";
    return code == 0 ? 3 : code;
  }
  for (const auto& c : run.checks)
    if (c.pass && !*c.pass) std::cerr << "FAILED " << c.check << " value " << format_double(c.value) << "\n";
  std::cout << sub << ": " << status << " (" << run.checks.size() << " report rows, output in " << run.out.string()
            << ")\n";
  return code;
}
