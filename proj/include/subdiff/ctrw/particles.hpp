#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "subdiff/core/errors.hpp"
#include "subdiff/core/hazard.hpp"
#include "subdiff/core/initial_data.hpp"
#include "subdiff/core/kernel.hpp"
#include "subdiff/core/rng.hpp"
#include "subdiff/core/space_grid.hpp"

namespace subdiff {

struct ParticleSetup {
  HazardModel model = HazardModel::power_law(0.5);
  JumpKernel kernel{Triangular{}, 1.0};
  double eps = 0.1;
  double beta = 4.0;
  std::size_t particles = 100000;
  std::vector<double> snapshot_times;  // macroscopic, strictly increasing
  SpatialProfile rho0 = SpatialProfile::cosine();
  PeriodicGrid domain{};
  AgeProfile ages = AgeProfile::exponential();
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Unwrapped positions at each snapshot time; positions[s][i] belongs to particle i.
struct ParticleSnapshots {
  std::vector<double> times;
  std::vector<double> start;
  std::vector<std::vector<double>> positions;
  std::uint64_t renewals = 0;
  double mass = 0.0;  // total mass of rho0 on the domain
};

namespace detail {

/// Fixed particle blocks; the block layout does not depend on the thread count.
inline constexpr std::size_t particle_block = 4096;

/// Runs body(block) for every block, spread over `threads` workers.
inline void for_each_block(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  const std::size_t blocks = (n + particle_block - 1) / particle_block;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < blocks; b += workers) body(b);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Microscopic renewal-and-jump process. Each particle draws its start from rho0 / M and its age from g,
/// waits for its age-conditional exit, jumps by eps times a kernel displacement, and restarts at age 0.
/// Macroscopic time is eps^beta times internal time.
inline ParticleSnapshots simulate_particles(const ParticleSetup& p) {
  if (!(p.eps > 0.0) || !(p.beta > 0.0)) throw ConfigurationError("eps and beta must be positive");
  if (p.particles == 0) throw ConfigurationError("particle count must be positive");
  for (std::size_t s = 0; s < p.snapshot_times.size(); ++s) {
    if (!(p.snapshot_times[s] >= 0.0) || (s > 0 && !(p.snapshot_times[s] > p.snapshot_times[s - 1])))
      throw ConfigurationError("snapshot times must be nonnegative and strictly increasing");
  }
  const JumpKernel kernel = p.kernel.with_epsilon(p.eps);
  const double unit = std::pow(p.eps, p.beta);
  std::vector<double> internal(p.snapshot_times.size());
  for (std::size_t s = 0; s < internal.size(); ++s) internal[s] = p.snapshot_times[s] / unit;

  ParticleSnapshots out;
  out.times = p.snapshot_times;
  out.start.resize(p.particles);
  out.positions.assign(internal.size(), std::vector<double>(p.particles));
  out.mass = 0.0;
  {
    const auto cells = p.domain.cells;
    for (std::size_t j = 0; j < cells; ++j)
      out.mass += p.rho0.cell_average(p.domain.left(j), p.domain.left(j) + p.domain.dx()) * p.domain.dx();
  }
  const std::size_t blocks = (p.particles + detail::particle_block - 1) / detail::particle_block;
  std::vector<std::uint64_t> renewals(blocks, 0);

  detail::for_each_block(p.particles, p.threads, [&](std::size_t b) {
    const std::size_t lo = b * detail::particle_block;
    const std::size_t hi = std::min(p.particles, lo + detail::particle_block);
    std::uint64_t count = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      SplitMix64 rng = SplitMix64::stream(p.seed, i);
      double x = p.rho0.sample(rng.uniform(), p.domain);
      out.start[i] = x;
      const double age0 = p.ages.sample(rng.uniform());
      // internal clock at the next exit
      double exit = p.model.sample_total_age(age0, rng.uniform()) - age0;
      for (std::size_t s = 0; s < internal.size(); ++s) {
        while (exit <= internal[s]) {
          const double u1 = rng.uniform(), u2 = rng.uniform();
          x = kernel.sample_jump(x, u1, u2);
          exit += p.model.sample_waiting_time(rng.uniform());
          ++count;
        }
        out.positions[s][i] = x;
      }
    }
    renewals[b] = count;
  });
  for (auto c : renewals) out.renewals += c;
  return out;
}

}  // namespace subdiff
