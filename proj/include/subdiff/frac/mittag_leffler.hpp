#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "subdiff/numerics/quadrature.hpp"

namespace subdiff {

namespace detail {

/// log of the largest series term x^k / Gamma(alpha k + 1).
inline double ml_log_max_term(double alpha, double x) {
  const double lx = std::log(x);
  double best = 0.0;
  for (int k = 1; k < 4000; ++k) {
    const double lt = k * lx - std::lgamma(alpha * k + 1.0);
    best = std::max(best, lt);
    if (lt < best - 50.0) break;
  }
  return best;
}

inline double ml_series(double alpha, double x) {
  double sum = 1.0;
  const double lx = std::log(x);
  double prev = 0.0;
  for (int k = 1; k < 4000; ++k) {
    const double lt = k * lx - std::lgamma(alpha * k + 1.0);
    const double term = std::exp(lt);
    sum += (k % 2 == 1) ? -term : term;
    if (term < 1e-18 * std::abs(sum) && lt < prev) break;
    prev = lt;
  }
  return sum;
}

/// E_alpha(-x) = sin(alpha pi) / (alpha pi) * int_0^inf exp(-(x y)^(1/alpha)) / (y^2 + 2 y cos(alpha pi) + 1) dy.
inline double ml_integral(double alpha, double x) {
  const double c = std::cos(alpha * std::numbers::pi);
  const double s = std::sin(alpha * std::numbers::pi);
  auto f = [&](double y) {
    if (!std::isfinite(y)) return 0.0;
    return std::exp(-std::pow(x * y, 1.0 / alpha)) / (y * y + 2.0 * y * c + 1.0);
  };
  std::vector<double> pts = {1.0 / x, 1.0};
  const double yc = -c;  // location of the denominator minimum for alpha > 1/2
  if (yc > 0.0) {
    pts.push_back(yc);
    pts.push_back(std::max(yc - s, 0.5 * yc));
    pts.push_back(yc + s);
  }
  std::sort(pts.begin(), pts.end());
  const double far = std::max(pts.back(), 1.0) * 4.0;
  double v = quad::split(f, 0.0, far, pts, 1e-14);
  v += quad::adaptive(f, far, std::numeric_limits<double>::infinity(), 1e-14);
  return s / (alpha * std::numbers::pi) * v;
}

}  // namespace detail

/// Mittag-Leffler function E_alpha(z) for 0 < alpha <= 1 and real z <= 0.
inline double mittag_leffler(double alpha, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("mittag_leffler requires 0 < alpha <= 1");
  if (!(z <= 0.0)) throw std::domain_error("mittag_leffler is implemented for real z <= 0");
  if (z == -std::numeric_limits<double>::infinity()) return 0.0;
  if (alpha == 1.0) return std::exp(z);
  if (z == 0.0) return 1.0;
  const double x = -z;
  // alternating series only while its largest term keeps cancellation below ~1e-13
  if (x <= 5.0 && detail::ml_log_max_term(alpha, x) < std::log(1e3)) return detail::ml_series(alpha, x);
  return detail::ml_integral(alpha, x);
}

}  // namespace subdiff
