#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "subdiff/core/errors.hpp"
#include "subdiff/numerics/quadrature.hpp"

namespace subdiff {

/// Growth bound |f(t)| <= scale * max(1, t)^exponent used to truncate transform integrals.
struct TailBound {
  double scale = 1.0;
  double exponent = 0.0;
};

/// Analytic integrand for transforms: the callable plus the structural facts quadrature needs.
struct AnalyticFunction {
  std::function<double(double)> f;
  TailBound tail{};
  std::vector<double> breakpoints{};  // points where f or a derivative jumps
  double singular_exponent = 0.0;     // f(t) ~ t^-gamma near 0 with 0 <= gamma < 1

  double operator()(double t) const { return f(t); }
};

/// Samples f(t_i) on an increasing grid starting at 0, linear in between, optional power-law tail.
struct SampledFunction {
  std::vector<double> t;
  std::vector<double> values;
  std::optional<double> tail_exponent;  // f(t) = f(t_N) (t / t_N)^p beyond t_N

  void validate() const {
    if (t.size() < 2 || t.size() != values.size())
      throw std::invalid_argument("sampled function needs at least two matching samples");
    if (t.front() != 0.0) throw std::invalid_argument("sampled function grid must start at 0");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw std::invalid_argument("sampled function grid must be strictly increasing");
    for (double v : values)
      if (!std::isfinite(v)) throw std::invalid_argument("sampled function values must be finite");
  }

  double operator()(double x) const {
    if (x <= t.front()) return values.front();
    if (x >= t.back()) {
      if (!tail_exponent) return x == t.back() ? values.back() : 0.0;
      return values.back() * std::pow(x / t.back(), *tail_exponent);
    }
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    const double w = (x - t[i]) / (t[i + 1] - t[i]);
    return values[i] + w * (values[i + 1] - values[i]);
  }
};

namespace detail {

/// (1 - e^-z) / z
inline double phi1(double z) { return z < 1e-8 ? 1.0 - 0.5 * z : -std::expm1(-z) / z; }

/// (1 - e^-z (1 + z)) / z^2, by its series near zero
inline double phi2(double z) {
  if (z > 0.5) return (-std::expm1(-z) - z * std::exp(-z)) / (z * z);
  double sum = 0.0, term = 1.0;  // term = (-z)^(k-2) / k!
  for (int k = 2; k < 30; ++k) {
    term = k == 2 ? 0.5 : -term * z / k;
    sum += (k - 1) * term;
  }
  return sum;
}

}  // namespace detail

/// Upper bound on the transform tail beyond T implied by a growth bound.
inline double laplace_tail_bound(const TailBound& b, double s, double T) {
  T = std::max(T, 1.0);
  if (b.exponent <= 0.0) return b.scale * std::pow(T, b.exponent) * std::exp(-s * T) / s;
  return b.scale * std::pow(s, -b.exponent - 1.0) * boost::math::tgamma(b.exponent + 1.0, s * T);
}

/// Integral of f(t) e^{-st} over (0, infinity) for an analytic integrand.
inline double laplace_transform(const AnalyticFunction& fn, double s, double tol = 1e-10) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("transform frequency must be positive");
  const double qtol = std::min(1e-3 * tol, 1e-12);
  auto g = [&](double t) { return fn.f(t) * std::exp(-s * t); };

  std::vector<double> bps;
  for (double b : fn.breakpoints)
    if (b > 0.0) bps.push_back(b);
  std::sort(bps.begin(), bps.end());

  // first panel [0, e0]: singular substitution or a double-exponential rule for kinks at 0
  const double scale = std::min(1.0, 1.0 / s);
  const double e0 = bps.empty() ? scale : std::min(scale, bps.front());
  double acc = fn.singular_exponent > 0.0 ? quad::left_singular(g, 0.0, e0, fn.singular_exponent, {}, qtol)
                                          : quad::endpoint_singular(g, 0.0, e0, qtol);
  double lo = e0;
  for (double b : bps) {
    if (b <= lo) continue;
    acc += quad::endpoint_singular(g, lo, b, qtol);
    lo = b;
  }

  double prev_decay = std::numeric_limits<double>::infinity();
  int growth = 0;
  double width = std::max(lo, scale);
  for (int panel = 0; panel < 200; ++panel) {
    const double hi = lo + width;
    // the panel after a breakpoint may carry a weak endpoint singularity
    const double piece = panel == 0 ? quad::endpoint_singular(g, lo, hi, qtol) : quad::adaptive(g, lo, hi, qtol);
    if (!std::isfinite(piece)) throw DivergenceError("transform integrand is not integrable");
    acc += piece;
    lo = hi;
    width *= 2.0;
    const double bound = laplace_tail_bound(fn.tail, s, lo);
    const double decay = std::abs(fn.f(lo)) * std::exp(-s * lo);
    if (!std::isfinite(decay)) throw DivergenceError("transform integrand overflows; growth exceeds e^{st}");
    // beyond the peak of t^p e^{-st} a declared polynomial bound forces decay
    const bool past_peak = s * lo > std::max(fn.tail.exponent, 0.0) + 1.0;
    growth = (past_peak && decay > prev_decay && decay > 0.0) ? growth + 1 : 0;
    if (growth >= 3) throw DivergenceError("transform integrand does not decay; growth exceeds e^{st}");
    prev_decay = decay;
    if (bound <= 0.1 * tol * std::abs(acc) || bound < 1e-300) {
      // the declared bound must be consistent with the integrand at the truncation point
      if (decay <= 10.0 * std::max(bound * s, 1e-300) || decay == 0.0) return acc;
    }
  }
  throw DivergenceError("transform tail did not fall below tolerance");
}

/// Transform of a sampled function: 5-point Gauss per linear piece plus the analytic tail.
inline double laplace_transform(const SampledFunction& fn, double s, double tol = 1e-10) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("transform frequency must be positive");
  fn.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < fn.t.size(); ++i) {
    const double a = fn.t[i], h = fn.t[i + 1] - a, fa = fn.values[i], fb = fn.values[i + 1];
    const double z = s * h;
    acc += std::exp(-s * a) * h * (fa * detail::phi1(z) + (fb - fa) * detail::phi2(z));
  }
  if (fn.tail_exponent) {
    const double tn = fn.t.back(), fn_ = fn.values.back(), p = *fn.tail_exponent;
    auto g = [&](double x) { return fn_ * std::pow(x / tn, p) * std::exp(-s * x); };
    acc += quad::adaptive(g, tn, std::numeric_limits<double>::infinity(), std::min(1e-3 * tol, 1e-12));
  }
  return acc;
}

}  // namespace subdiff
