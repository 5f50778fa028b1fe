#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "subdiff/subdiff.hpp"

using namespace subdiff;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0.0 && secs >= time_limit) {
    o.pass = false;
    o.detail += fmt("; over time limit %.0f s", time_limit);
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %-34s %s; %.1f s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

ExperimentConfig load(const std::string& name) {
  return ExperimentConfig::from(Config::load(std::string(SUBDIFF_CONFIGS) + "/" + name + ".cfg"));
}

const PeriodicGrid kGrid{0.0, 2.0 * std::numbers::pi, 256};

std::vector<double> cosine_data() { return SpatialProfile::cosine(1.0, 0.5).cell_averages(kGrid); }

/// Every deterministic age run used for the mass and comparison criteria.
std::vector<RenewalTrace> deterministic_age_runs() {
  std::vector<RenewalTrace> out;
  for (double a : {0.25, 0.5, 0.75})
    out.push_back(solve_age_homogeneous(HazardModel::power_law(a), AgeProfile::exponential(), 100.0, 0.01));
  out.push_back(solve_age_homogeneous(HazardModel::constant(1.0), AgeProfile::exponential(), 20.0, 0.01));
  const auto c = load("age-spatial");
  // 256 cells keep eight cells across the smallest kernel support for the direct method
  const PeriodicGrid grid = make_grid(c, 256);
  for (auto method : {SpaceMethod::Direct, SpaceMethod::ModalDiscrete, SpaceMethod::ModalContinuum})
    for (double eps : c.epsilons) {
      SpaceOptions opt;
      opt.method = method;
      opt.snapshot_times = c.snapshot_times;
      out.push_back(solve_age_space(make_model(c), make_initial(c), make_kernel(c), eps, c.beta, c.t_end, c.da, grid,
                                    opt));
    }
  return out;
}

Outcome convergence(const std::string& cfg) {
  const auto rep = run_convergence(load(cfg));
  std::string d = "L1";
  for (const auto& r : rep.rows) d += fmt(" %.3e", r.l1);
  if (!rep.order.empty() && rep.order.front()) d += fmt("; order %.2f", *rep.order.front());
  return {rep.monotone() && rep.rows.size() >= 3, d};
}

}  // namespace

int main() {
  criterion(1, "transform identities", 10.0, [] {
    const auto rows = run_laplace_report({0.25, 0.5, 0.75}, 1e-5);
    double worst = 0.0;
    std::size_t n = 0;
    bool ok = true;
    for (const auto& r : rows) {
      if (r.identity.rfind("lemma", 0) == 0) continue;
      worst = std::max(worst, r.residual);
      ok = ok && r.pass;
      ++n;
    }
    return Outcome{ok && n == 3 * (12 + 3 + 3), fmt("max residual %.2e", worst) + fmt(" over %.0f rows", n)};
  });

  criterion(2, "renewal identity", 60.0, [] {
    const auto g = AgeProfile::exponential();
    const auto tr = solve_age_homogeneous(HazardModel::power_law(0.5), g, 100.0, 0.01);
    const auto r10 = renewal_integral_check(tr, g, 0.5, 10.0);
    const auto r100 = renewal_integral_check(tr, g, 0.5, 100.0);
    const double far = renewal_identity_rhs(g, 0.5, 1e8);
    const bool toward_one = r10.lhs < r100.lhs && r10.rhs < r100.rhs && r100.lhs < 1.0 && far > 0.999 && far < 1.0;
    const bool ok = r10.relative_gap() < 0.02 && r100.relative_gap() < 0.02 && toward_one;
    return Outcome{ok, fmt("gap %.2e", r10.relative_gap()) + fmt(", %.2e", r100.relative_gap()) +
                           fmt("; sides at t=100 %.4f", r100.lhs) + fmt("/%.4f", r100.rhs) +
                           fmt("; rhs at 1e8 %.6f", far)};
  });

  criterion(3, "decay bounds", 0.0, [] {
    const auto g = AgeProfile::exponential();
    bool ok = true;
    double worst = 0.0;
    for (double a : {0.25, 0.5, 0.75}) {
      const auto tr = solve_age_homogeneous(HazardModel::power_law(a), g, 1000.0, 0.1);
      for (double delta : {0.5, 0.9}) {
        const auto d = decay_weighted_integrals(tr, g, a, delta);
        ok = ok && d.upper_holds && d.lower_holds;
        worst = std::max({worst, d.upper_integral / d.upper_bound, d.lower_bound / d.lower_integral});
      }
    }
    return Outcome{ok, fmt("largest integral/bound ratio %.3f", worst)};
  });

  criterion(4, "constant rate renewal", 0.0, [] {
    double worst = 0.0;
    for (double d0 : {0.5, 1.0, 2.0}) {
      const auto tr = solve_age_homogeneous(HazardModel::constant(d0), AgeProfile::exponential(d0), 20.0, 0.01);
      for (double u : tr.renewal) worst = std::max(worst, std::abs(u - d0));
    }
    return Outcome{worst < 1e-10, fmt("max |U - D0| %.2e", worst)};
  });

  const auto runs = deterministic_age_runs();

  criterion(5, "mass conservation", 0.0, [&] {
    double worst = 0.0;
    for (const auto& tr : runs) worst = std::max(worst, tr.max_mass_drift);
    for (double a : {0.3, 0.5, 0.7}) {
      const auto sol = solve_subdiffusion(a, 1.0 / 6.0, cosine_data(), kGrid, 1e-3, 1.0);
      const double m0 = total_mass(kGrid, sol.rho.values.front());
      for (const auto& r : sol.rho.values) worst = std::max(worst, std::abs(total_mass(kGrid, r) - m0) / m0);
    }
    const auto h = solve_diffusion(1.0, 1.0 / 6.0, cosine_data(), kGrid, 1e-3, 1.0);
    const double m0 = total_mass(kGrid, h.values.front());
    for (const auto& r : h.values) worst = std::max(worst, std::abs(total_mass(kGrid, r) - m0) / m0);
    return Outcome{worst < 1e-8, fmt("max relative drift %.2e", worst) + fmt(" over %.0f runs", runs.size() + 4)};
  });

  criterion(6, "comparison principle", 0.0, [&] {
    // homogeneous and direct runs hold pointwise cohorts; modal runs do not and report unchecked
    bool ok = true;
    double excess = -INFINITY;
    std::size_t checked = 0;
    for (const auto& tr : runs) {
      if (!tr.comparison_checked) continue;
      ++checked;
      ok = ok && tr.comparison_max <= tr.comparison_initial + 1e-12;
      excess = std::max(excess, tr.comparison_max - tr.comparison_initial);
    }
    ok = ok && checked == 4 + load("age-spatial").epsilons.size();
    return Outcome{ok, fmt("max excess over initial %.2e", excess) + fmt(" over %.0f pointwise runs", checked)};
  });

  criterion(7, "Mittag-Leffler mode decay", 60.0, [] {
    bool ok = true;
    std::string d = "relative error";
    for (double a : {0.3, 0.5, 0.7}) {
      const auto rho0 = cosine_data();
      const auto sol = solve_subdiffusion(a, 1.0 / 6.0, rho0, kGrid, 1e-3, 1.0);
      const double expected = cosine_mode(kGrid, rho0) * mittag_leffler(a, -sol.coefficient() / std::tgamma(1.0 - a));
      const double err = std::abs(cosine_mode(kGrid, sol.rho.values.back()) - expected) / std::abs(expected);
      ok = ok && err < 0.01;
      d += fmt(" %.2e", err);
    }
    return Outcome{ok, d};
  });

  criterion(8, "first step stability", 0.0, [] {
    double worst = 0.0;
    for (double a : {0.3, 0.5, 0.7}) {
      const auto rho0 = cosine_data();
      const auto sol = solve_subdiffusion(a, 1.0 / 6.0, rho0, kGrid, 1e-4, 1e-4);
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < kGrid.cells; ++j) {
        num = std::max(num, std::abs(sol.rho.values[1][j] - rho0[j]));
        den = std::max(den, std::abs(rho0[j]));
      }
      worst = std::max(worst, num / den);
    }
    return Outcome{worst < 0.05, fmt("max relative change %.2e", worst)};
  });

  criterion(9, "chain rule", 0.0, [] {
    const SmoothPath lin{[](double t) { return t; }, [](double) { return 1.0; }};
    const SmoothPath sq{[](double t) { return t * t; }, [](double t) { return 2.0 * t; }};
    double worst = 0.0;
    for (double a : {0.25, 0.5})
      for (const auto& v : {lin, sq})
        for (double t : {0.5, 1.0, 2.0}) worst = std::max(worst, chain_rule_residual(v, a, t).residual);
    const auto w = chain_rule_residual(lin, 0.5, 1.0);
    const bool worked = std::abs(w.lhs - 2.0) < 1e-8 && std::abs(w.rhs - 2.0) < 1e-8;
    return Outcome{worst < 1e-6 && worked,
                   fmt("max residual %.2e", worst) + fmt("; worked lhs %.10f", w.lhs) + fmt(" rhs %.10f", w.rhs)};
  });

  criterion(10, "energy balance", 0.0, [] {
    const auto sol = solve_subdiffusion(0.5, 1.0, cosine_data(), kGrid, 1e-3, 1.0);
    const auto e = energy_balance(sol, sol.v.index_of(1.0));
    return Outcome{e.residual < 0.05 && std::abs(e.t - 1.0) < 1e-12, fmt("residual %.2e", e.residual)};
  });

  criterion(11, "convergence, normal diffusion", 300.0, [] { return convergence("converge-diffusion"); });
  criterion(12, "convergence, sub-diffusion", 900.0, [] { return convergence("converge-subdiffusion"); });

  criterion(13, "MSD slope", 300.0, [] {
    bool ok = true;
    std::string d = "slope";
    for (double a : {0.5, 0.7}) {
      ParticleSetup p;
      p.model = HazardModel::power_law(a);
      p.eps = 0.2;
      p.beta = 2.0 / a;
      p.particles = 100000;
      for (int i = 0; i <= 20; ++i) p.snapshot_times.push_back(std::pow(10.0, 1.0 + i / 10.0));
      p.domain = kGrid;
      p.rho0 = SpatialProfile::cosine(1.0, 0.5);
      p.seed = 1;
      const auto m = msd(simulate_particles(p), 10.0, 1000.0);
      ok = ok && m.fit && std::abs(m.fit->slope - a) <= 0.1;
      d += m.fit ? fmt(" %.4f", m.fit->slope) : " none";
    }
    return Outcome{ok, d};
  });

  criterion(14, "particles vs age solver", 0.0, [] {
    const auto rep = run_micro_macro(load("micro-macro"));
    std::string d = "distance/noise";
    for (const auto& r : rep.rows) d += fmt(" %.3f", r.mc_age / r.noise);
    return Outcome{rep.mc_within_noise() && !rep.rows.empty(), d};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
