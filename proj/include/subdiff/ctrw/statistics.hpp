#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <stdexcept>
#include <vector>

#include "subdiff/core/errors.hpp"
#include "subdiff/core/rng.hpp"
#include "subdiff/core/space_grid.hpp"
#include "subdiff/ctrw/particles.hpp"

namespace subdiff {

struct MsdFit {
  double slope = 0.0;
  double intercept = 0.0;  // of log msd against log t
  std::size_t points = 0;
};

struct MsdSeries {
  std::vector<double> t;
  std::vector<double> msd;
  std::optional<MsdFit> fit;
  std::string fit_error;
};

/// Least-squares slope of log y against log x over the points with lo <= x <= hi.
inline MsdFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalFailure("log-log fit needs positive values in the window");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 2) throw NumericalFailure("log-log fit needs at least two points in the window");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalFailure("log-log fit has a degenerate time window");
  MsdFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = lx.size();
  return f;
}

/// Ensemble mean of (x - x0)^2 per snapshot, summed in fixed particle blocks.
inline MsdSeries msd(const ParticleSnapshots& snaps, double fit_lo = 10.0, double fit_hi = 1e3) {
  if (snaps.times.size() < 2) throw std::invalid_argument("msd needs at least two snapshots");
  MsdSeries out;
  out.t = snaps.times;
  const std::size_t n = snaps.start.size();
  for (const auto& pos : snaps.positions) {
    double total = 0.0;
    for (std::size_t lo = 0; lo < n; lo += detail::particle_block) {
      const std::size_t hi = std::min(n, lo + detail::particle_block);
      double part = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        const double d = pos[i] - snaps.start[i];
        part += d * d;
      }
      total += part;
    }
    out.msd.push_back(total / static_cast<double>(n));
  }
  try {
    out.fit = loglog_fit(out.t, out.msd, fit_lo, fit_hi);
  } catch (const NumericalFailure& e) {
    out.fit_error = e.what();
  }
  return out;
}

/// Mean position per snapshot and its standard error.
struct DriftSummary {
  std::vector<double> mean;
  std::vector<double> standard_error;
};

inline DriftSummary mean_displacement(const ParticleSnapshots& snaps) {
  DriftSummary d;
  const double n = static_cast<double>(snaps.start.size());
  for (const auto& pos : snaps.positions) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const double v = pos[i] - snaps.start[i];
      s += v;
      s2 += v * v;
    }
    const double m = s / n;
    d.mean.push_back(m);
    d.standard_error.push_back(std::sqrt(std::max(0.0, s2 / n - m * m) / n));
  }
  return d;
}

/// Histogram bins on [lo, hi); with `periodic` positions are wrapped, otherwise outliers are counted.
struct HistogramGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 1;
  bool periodic = true;

  static HistogramGrid from(const PeriodicGrid& g) { return {g.origin, g.origin + g.length, g.cells, true}; }
  double width() const { return (hi - lo) / static_cast<double>(bins); }
  double center(std::size_t j) const { return lo + (static_cast<double>(j) + 0.5) * width(); }
};

struct DensityEstimate {
  HistogramGrid grid;
  std::vector<std::uint64_t> counts;
  std::vector<double> rho_hat;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  double mass = 0.0;
};

/// Bin index of x, or -1 / bins for positions below / above a non-periodic range.
inline long histogram_bin(const HistogramGrid& g, double x) {
  const double w = g.hi - g.lo;
  if (g.periodic) x = g.lo + (x - g.lo - w * std::floor((x - g.lo) / w));
  if (x < g.lo) return -1;
  if (x >= g.hi) return static_cast<long>(g.bins);
  const auto j = static_cast<long>(std::floor((x - g.lo) / g.width()));
  return std::min(j, static_cast<long>(g.bins) - 1);
}

/// Histogram scaled so that bin mass / width integrates to `mass` over all binned particles.
inline DensityEstimate density_from_counts(const HistogramGrid& grid, std::vector<std::uint64_t> counts,
                                           std::uint64_t total, double mass) {
  DensityEstimate d;
  d.grid = grid;
  d.mass = mass;
  d.counts = std::move(counts);
  d.rho_hat.resize(grid.bins);
  const double per = total == 0 ? 0.0 : mass / (static_cast<double>(total) * grid.width());
  for (std::size_t j = 0; j < grid.bins; ++j) d.rho_hat[j] = static_cast<double>(d.counts[j]) * per;
  return d;
}

inline DensityEstimate empirical_density(const std::vector<double>& positions, const HistogramGrid& grid,
                                         double mass = 1.0) {
  if (grid.bins == 0 || !(grid.hi > grid.lo)) throw ConfigurationError("histogram grid is empty");
  std::vector<std::uint64_t> counts(grid.bins, 0);
  std::uint64_t under = 0, over = 0;
  for (double x : positions) {
    const long j = histogram_bin(grid, x);
    if (j < 0) ++under;
    else if (j >= static_cast<long>(grid.bins)) ++over;
    else ++counts[static_cast<std::size_t>(j)];
  }
  auto d = density_from_counts(grid, std::move(counts), positions.size(), mass);
  d.underflow = under;
  d.overflow = over;
  return d;
}

/// L1 distance of two piecewise-constant densities on the same bins.
inline double histogram_l1(const HistogramGrid& g, const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != g.bins || b.size() != g.bins) throw std::invalid_argument("density size does not match the bins");
  double s = 0.0;
  for (std::size_t j = 0; j < g.bins; ++j) s += std::abs(a[j] - b[j]);
  return s * g.width();
}

struct BootstrapNoise {
  double mean = 0.0;   // mean L1 distance of resampled histograms to the original
  double spread = 0.0; // standard deviation of those distances
  std::size_t replicates = 0;
};

/// L1 noise floor of a histogram estimate: resample particles with replacement and measure the distance
/// of each replicate to the original histogram.
inline BootstrapNoise bootstrap_noise(const std::vector<double>& positions, const HistogramGrid& grid, double mass,
                                      std::size_t replicates, std::uint64_t seed) {
  if (replicates == 0) throw ConfigurationError("bootstrap needs at least one replicate");
  const std::size_t n = positions.size();
  std::vector<long> bin(n);
  for (std::size_t i = 0; i < n; ++i) bin[i] = histogram_bin(grid, positions[i]);
  const auto base = empirical_density(positions, grid, mass);
  std::vector<double> dist;
  for (std::size_t r = 0; r < replicates; ++r) {
    SplitMix64 rng = SplitMix64::stream(seed ^ 0xb0075742ULL, r);
    std::vector<std::uint64_t> counts(grid.bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = std::min<std::size_t>(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
      const long j = bin[k];
      if (j >= 0 && j < static_cast<long>(grid.bins)) ++counts[static_cast<std::size_t>(j)];
    }
    const auto d = density_from_counts(grid, std::move(counts), n, mass);
    dist.push_back(histogram_l1(grid, d.rho_hat, base.rho_hat));
  }
  BootstrapNoise b;
  b.replicates = replicates;
  for (double v : dist) b.mean += v;
  b.mean /= static_cast<double>(replicates);
  for (double v : dist) b.spread += (v - b.mean) * (v - b.mean);
  b.spread = std::sqrt(b.spread / static_cast<double>(replicates));
  return b;
}

/// Two-sided Kolmogorov-Smirnov statistic of samples against a continuous cdf.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks statistic needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic critical value of the KS statistic at level 0.01.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// Order statistics of positions at one snapshot.
struct PositionSummary {
  double t = 0.0;
  double mean = 0.0;
  std::vector<double> quantiles;  // at summary_levels()
};

inline const std::vector<double>& summary_levels() {
  static const std::vector<double> levels = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};
  return levels;
}

inline PositionSummary summarize_positions(double t, std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("no positions to summarize");
  PositionSummary s;
  s.t = t;
  double total = 0.0;
  for (double v : x) total += v;
  s.mean = total / static_cast<double>(x.size());
  std::sort(x.begin(), x.end());
  for (double q : summary_levels()) {
    // linear interpolation between order statistics
    const double h = q * static_cast<double>(x.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(i);
    const double v = i + 1 < x.size() ? x[i] + frac * (x[i + 1] - x[i]) : x[i];
    s.quantiles.push_back(v);
  }
  return s;
}

}  // namespace subdiff
