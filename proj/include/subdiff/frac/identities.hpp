#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "subdiff/core/errors.hpp"
#include "subdiff/frac/solvers.hpp"
#include "subdiff/numerics/quadrature.hpp"

namespace subdiff {

/// Differentiable path given by its value and derivative.
struct SmoothPath {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

struct ChainRuleReport {
  double term1 = 0.0;  // (1/2) d/dt int v^2 (t-s)^-alpha
  double term2 = 0.0;  // v(t)^2 / (2 t^alpha)
  double term3 = 0.0;  // (alpha/2) int (v(s) - v(t))^2 (t-s)^(-alpha-1)
  double lhs = 0.0;
  double rhs = 0.0;    // v(t) d/dt int v (t-s)^-alpha
  double residual = 0.0;
};

/// Both sides of the chain-rule identity for the memory operator, by quadrature.
inline ChainRuleReport chain_rule_residual(const SmoothPath& v, double alpha, double t) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  if (!(t > 0.0)) throw std::domain_error("t must be positive");
  if (std::abs(v.value(0.0)) > 1e-14) throw std::invalid_argument("the identity requires v(0) = 0");
  const double vt = v.value(t);
  ChainRuleReport r;
  // with v(0) = 0 the derivative of the memory integral is the integral of the derivative
  r.term1 = quad::right_weighted([&](double s) { return v.value(s) * v.derivative(s); }, 0.0, t, alpha, {}, 1e-14);
  r.term2 = vt * vt / (2.0 * std::pow(t, alpha));
  // (v(t-w) - v(t))^2 w^(-alpha-1) = [(v(t-w) - v(t)) / w]^2 w^(1-alpha): weight exponent alpha - 1
  auto quotient = [&](double w) {
    if (w <= 0.0) return v.derivative(t) * v.derivative(t);
    const double d = (v.value(t - w) - vt) / w;
    return d * d;
  };
  r.term3 = 0.5 * alpha * quad::left_weighted(quotient, 0.0, t, alpha - 1.0, {}, 1e-14);
  r.lhs = r.term1 + r.term2 + r.term3;
  r.rhs = vt * quad::right_weighted(v.derivative, 0.0, t, alpha, {}, 1e-14);
  const double diff = std::abs(r.lhs - r.rhs);
  r.residual = diff == 0.0 ? 0.0 : diff / std::max(std::abs(r.rhs), std::abs(r.lhs));
  return r;
}

struct EnergyReport {
  double t = 0.0;
  double term1 = 0.0;  // (1/2) memory operator of int v^2 dx
  double term2 = 0.0;  // c int |v_x|^2 dx
  double term3 = 0.0;  // (alpha/2) int int (v(s) - v(t))^2 (t-s)^(-alpha-1) ds dx
  double term4 = 0.0;  // int v^2 dx / (2 t^alpha)
  double rhs = 0.0;    // -c int v_x rho0_x dx
  double residual = 0.0;
};

/// Energy balance of a sub-diffusion run at step k, evaluated on the discrete solution.
inline EnergyReport energy_balance(const SubdiffusionSolution& sol, std::size_t k) {
  if (std::abs(sol.A - 1.0) > 1e-12)
    throw UnsupportedConfiguration("energy balance is implemented for the identity diffusion matrix only");
  const auto& hist = sol.v;
  if (k == 0 || k > hist.steps()) throw std::out_of_range("energy balance step out of range");
  const double alpha = sol.alpha, dt = hist.dt, h = hist.grid.dx();
  const double c = sol.coefficient();
  const std::size_t n = hist.grid.cells;
  const double tk = static_cast<double>(k) * dt;
  const MemoryWeights w(alpha, dt, k + 1);

  EnergyReport r;
  r.t = tk;
  std::vector<double> energy(k + 1);
  for (std::size_t i = 0; i <= k; ++i) {
    double e = 0.0;
    for (double x : hist.values[i]) e += x * x;
    energy[i] = e * h;
  }
  r.term1 = 0.5 * memory_operator(energy, w, k);
  const auto& vk = hist.values[k];
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t jp = (j + 1) % n;
    const double gv = (vk[jp] - vk[j]) / h;
    const double gr = (sol.rho0[jp] - sol.rho0[j]) / h;
    r.term2 += c * gv * gv * h;
    r.rhs -= c * gv * gr * h;
  }
  r.term4 = energy[k] / (2.0 * std::pow(tk, alpha));

  // piecewise-linear v in time; the interval ending at t_k is integrated exactly, the rest by Gauss
  double t3 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double target = vk[j];
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d0 = hist.values[i][j] - target, d1 = hist.values[i + 1][j] - target;
      if (i + 1 == k) {
        // D(s) = d0 (t_k - s) / dt, so D^2 (t_k-s)^(-alpha-1) integrates to d0^2 dt^(-alpha) / (2 - alpha)
        acc += d0 * d0 * std::pow(dt, -alpha) / (2.0 - alpha);
      } else {
        const double a = static_cast<double>(i) * dt;
        auto f = [&](double s) {
          const double d = d0 + (d1 - d0) * (s - a) / dt;
          return d * d * std::pow(tk - s, -alpha - 1.0);
        };
        acc += quad::gauss<6>(f, a, a + dt);
      }
    }
    t3 += acc * h;
  }
  r.term3 = 0.5 * alpha * t3;

  const double lhs = r.term1 + r.term2 + r.term3 + r.term4;
  const double scale = std::max({std::abs(r.term1), r.term2, r.term3, r.term4, std::abs(r.rhs)});
  r.residual = scale == 0.0 ? 0.0 : std::abs(lhs - r.rhs) / scale;
  return r;
}

/// Largest violation of M[v^2] <= 2 v M[v] over all steps and cells, relative to the local scale.
inline double convex_inequality_violation(const SubdiffusionSolution& sol) {
  const auto& hist = sol.v;
  const std::size_t K = hist.steps(), n = hist.grid.cells;
  const MemoryWeights w(sol.alpha, hist.dt, K + 1);
  double worst = 0.0;
  std::vector<double> f(K + 1), f2(K + 1);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k <= K; ++k) {
      f[k] = hist.values[k][j];
      f2[k] = f[k] * f[k];
    }
    for (std::size_t k = 1; k <= K; ++k) {
      const double lhs = memory_operator(f2, w, k);
      const double rhs = 2.0 * f[k] * memory_operator(f, w, k);
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      worst = std::max(worst, (lhs - rhs) / scale);
    }
  }
  return worst;
}

}  // namespace subdiff
