#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "subdiff/core/space_grid.hpp"

namespace subdiff {

/// Full time history rho(t_k, x_j) on a uniform time grid t_k = k dt.
struct DensityHistory {
  PeriodicGrid grid{};
  double dt = 0.0;
  std::vector<std::vector<double>> values;  // values[k][j]

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  const std::vector<double>& at(std::size_t k) const { return values.at(k); }

  /// Index of the stored time closest to t.
  std::size_t index_of(double t) const {
    const double k = std::round(t / dt);
    if (k < 0.0 || k > static_cast<double>(steps()) + 0.5) throw std::out_of_range("time outside the history");
    return static_cast<std::size_t>(k);
  }
};

/// Weights of the L1 scheme for d/dt int_0^t f(s) (t-s)^-alpha ds:
/// b_m = dt^-alpha ((m+1)^(1-alpha) - m^(1-alpha)) / (1-alpha).
class MemoryWeights {
 public:
  MemoryWeights(double alpha, double dt, std::size_t max_steps) : alpha_(alpha), dt_(dt) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("memory weights require 0 < alpha < 1");
    if (!(dt > 0.0)) throw std::domain_error("time step must be positive");
    const double p = 1.0 - alpha;
    const double scale = std::pow(dt, -alpha) / p;
    b_.resize(max_steps + 1);
    b_[0] = scale;
    for (std::size_t m = 1; m <= max_steps; ++m) {
      const double md = static_cast<double>(m);
      // (m+1)^p - m^p without cancellation
      b_[m] = scale * std::pow(md, p) * std::expm1(p * std::log1p(1.0 / md));
    }
  }

  double alpha() const { return alpha_; }
  double dt() const { return dt_; }
  std::size_t size() const { return b_.size(); }
  double operator[](std::size_t m) const { return b_[m]; }
  double newest() const { return b_[0]; }

 private:
  double alpha_, dt_;
  std::vector<double> b_;
};

/// Discrete memory operator at step k from samples f_0..f_k:
/// f_0 t_k^-alpha + sum_{i<k} b_{k-1-i} (f_{i+1} - f_i).
template <class Series>
double memory_operator(const Series& f, const MemoryWeights& w, std::size_t k) {
  if (k == 0 || k >= static_cast<std::size_t>(f.size()) || k > w.size())
    throw std::out_of_range("memory operator step index out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += w[k - 1 - i] * (f[i + 1] - f[i]);
  if (f[0] != 0.0) acc += f[0] * std::pow(static_cast<double>(k) * w.dt(), -w.alpha());
  return acc;
}

}  // namespace subdiff
