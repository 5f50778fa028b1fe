#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "subdiff/core/errors.hpp"
#include "subdiff/core/hazard.hpp"
#include "subdiff/core/initial_data.hpp"

namespace subdiff {

/// Uniform age grid; ages beyond a_max = cells * da are pooled in an overflow bin.
struct AgeGrid {
  double da = 0.01;
  std::size_t cells = 0;

  double a_max() const { return da * static_cast<double>(cells); }
  double midpoint(std::size_t i) const { return (static_cast<double>(i) + 0.5) * da; }
};

/// Snapshot of u(a, x) as density per unit age and length, plus the overflow mass per space cell.
struct AgeDensityField {
  AgeGrid grid;
  std::size_t space_cells = 1;
  std::vector<double> values;    // values[i * space_cells + j]
  std::vector<double> overflow;  // per space cell
  double t = 0.0;

  double at(std::size_t i, std::size_t j = 0) const { return values[i * space_cells + j]; }
};

namespace detail {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

/// Per-age-cell tables: mean survival over each cell, its one-step drop, and hazard-weighted survival.
/// Arrays are stored in reverse age order so cohort sums run over contiguous memory.
class SurvivalTable {
 public:
  SurvivalTable(const HazardModel& model, const AgeGrid& grid, std::size_t used_cells)
      : n_(std::min(used_cells, grid.cells)), cells_(grid.cells), da_(grid.da) {
    mean_.resize(n_ + 1);
    for (std::size_t j = 0; j <= n_; ++j) {
      const double a0 = static_cast<double>(j) * da_;
      mean_[j] = model.mean_survival(a0, a0 + da_);
    }
    drop_rev_.resize(n_);
    mean_rev_.resize(n_);
    rate_rev_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      drop_rev_[n_ - 1 - j] = mean_[j] - mean_[j + 1];
      mean_rev_[n_ - 1 - j] = mean_[j];
      rate_rev_[n_ - 1 - j] = model.hazard(grid.midpoint(j)) * mean_[j];
    }
    bin_hazard_ = model.hazard(grid.a_max());
  }

  std::size_t size() const { return n_; }
  std::size_t cells() const { return cells_; }
  double mean(std::size_t j) const { return mean_[j]; }
  double bin_hazard() const { return bin_hazard_; }
  double da() const { return da_; }

  /// Pointers aligned so that element p pairs with the cohort of age index count-1-p.
  const double* drop_for(std::size_t count) const { return drop_rev_.data() + (n_ - count); }
  const double* mean_for(std::size_t count) const { return mean_rev_.data() + (n_ - count); }
  const double* rate_for(std::size_t count) const { return rate_rev_.data() + (n_ - count); }

 private:
  std::size_t n_, cells_;
  double da_;
  std::vector<double> mean_, drop_rev_, mean_rev_, rate_rev_;
  double bin_hazard_ = 0.0;
};

/// Initial cohorts for an age profile: per-cell masses, tail mass for the bin, comparison ratios.
struct InitialCohorts {
  std::vector<double> normalized;  // cell mass / mean survival, age order
  double tail_mass = 0.0;
  double max_ratio = 0.0;          // max of normalized / da
};

inline InitialCohorts initial_cohorts(const AgeProfile& g, const SurvivalTable& table, double tail_tol) {
  const double da = table.da();
  const double cut = g.support_cutoff(tail_tol);
  std::size_t n = static_cast<std::size_t>(std::ceil(cut / da));
  n = std::max<std::size_t>(1, std::min(n, table.cells()));
  InitialCohorts c;
  c.normalized.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a0 = static_cast<double>(i) * da;
    const double m = g.cell_mass(a0, a0 + da);
    if (m < 0.0 || !std::isfinite(m)) throw ConfigurationError("initial age density must be nonnegative");
    c.normalized[i] = m / table.mean(i);
    c.max_ratio = std::max(c.max_ratio, c.normalized[i] / da);
  }
  if (g.is_exponential()) {
    c.tail_mass = g.tail_mass(static_cast<double>(n) * da);
  } else {
    const double hi = g.support_cutoff(tail_tol);
    c.tail_mass = static_cast<double>(n) * da < hi ? g.cell_mass(static_cast<double>(n) * da, hi) : 0.0;
  }
  if (c.tail_mass < 0.0) throw ConfigurationError("initial age density must be nonnegative");
  return c;
}

/// Scalar cohort chain for one spatial Fourier mode (multiplier 1 is the homogeneous problem).
///
/// Each stored value q is the mass of a birth-step cohort divided by the mean survival of its current
/// age cell, so the cohort's mass at age index j is q * mean(j). Births inside a step are treated as
/// uniform in time; a newborn that renews again within its birth step makes another jump, which gives
/// the factor 1 / (1 - (1 - mean(0)) m) on the birth mass.
class CohortChain {
 public:
  CohortChain(const SurvivalTable& table, const InitialCohorts& init, double scale, double multiplier)
      : table_(&table), multiplier_(multiplier) {
    const std::size_t n = init.normalized.size();
    q_.reserve(n + 16);
    for (std::size_t p = 0; p < n; ++p) q_.push_back(scale * init.normalized[n - 1 - p]);
    bin_ = scale * init.tail_mass;
    bin_retention_ = std::exp(-table.bin_hazard() * table.da());
    birth_gain_ = multiplier / (1.0 - (1.0 - table.mean(0)) * multiplier);
  }

  void reserve(std::size_t steps) { q_.reserve(q_.size() + steps); }

  std::size_t count() const { return q_.size() - start_; }

  double mass() const {
    const std::size_t c = count();
    return dot(q_.data() + start_, table_->mean_for(c), c) + bin_;
  }

  /// Instantaneous renewal rate: midpoint hazard times cell mass, bin at the frozen hazard.
  double renewal() const {
    const std::size_t c = count();
    return dot(q_.data() + start_, table_->rate_for(c), c) + table_->bin_hazard() * bin_;
  }

  double bin_mass() const { return bin_; }
  double last_birth() const { return last_birth_; }
  double last_exit() const { return last_exit_; }

  /// Advances by one age cell; returns the normalized birth value pushed.
  double step() {
    const std::size_t c = count();
    if (c > table_->size()) throw NumericalFailure("age table too short for the cohort chain");
    const double bin_loss = bin_ * (1.0 - bin_retention_);
    const double exits = dot(q_.data() + start_, table_->drop_for(c), c) + bin_loss;
    bin_ -= bin_loss;
    const double birth = birth_gain_ * exits;
    q_.push_back(birth);
    last_exit_ = exits;
    last_birth_ = birth;
    // cohorts reaching a_max join the overflow bin
    while (count() > table_->cells()) {
      bin_ += q_[start_] * table_->mean(table_->cells());
      ++start_;
    }
    return birth;
  }

  /// Mass per age cell divided by da (density), youngest first.
  std::vector<double> density() const {
    const std::size_t c = count();
    std::vector<double> u(c);
    for (std::size_t j = 0; j < c; ++j) u[j] = q_[start_ + c - 1 - j] * table_->mean(j) / table_->da();
    return u;
  }

 private:
  const SurvivalTable* table_;
  double multiplier_;
  std::vector<double> q_;
  std::size_t start_ = 0;
  double bin_ = 0.0;
  double bin_retention_ = 1.0;
  double birth_gain_ = 1.0;
  double last_birth_ = 0.0;
  double last_exit_ = 0.0;
};

}  // namespace detail
}  // namespace subdiff
