#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "subdiff/laplace/transform.hpp"

namespace subdiff {

/// Outcome of the integral-decay check implied by two-sided transform bounds near s = 0.
struct LemmaReport {
  bool precondition_ok = false;
  std::string precondition_message;
  std::vector<double> s_samples;
  std::vector<double> scaled_transform;  // s^alpha u_hat(s)
  double k_lower = 0.0;                  // min of s^alpha u_hat(s) on the samples
  double k_upper = 0.0;                  // max of s^alpha u_hat(s) on the samples
  double k_lower1 = 0.0;                 // k_lower / Gamma(alpha + eps)
  double k_upper1 = 0.0;                 // k_upper / lower_incomplete_gamma(alpha + eps, 1)
  double upper_lhs = 0.0;                // int_1^inf u t^(-alpha-eps)
  double upper_bound = 0.0;              // k_upper1 / eps
  double lower_lhs = 0.0;                // int_0^inf u t^(-alpha-eps)
  double lower_bound = 0.0;              // k_lower1 / eps
  bool upper_holds = false;
  bool lower_holds = false;

  bool holds() const { return precondition_ok && upper_holds && lower_holds; }
};

/// The 13 geometric sample frequencies in [1e-3, 1].
inline std::vector<double> lemma_sample_frequencies() {
  std::vector<double> s(13);
  for (int k = 0; k < 13; ++k) s[k] = std::pow(10.0, -3.0 + 3.0 * k / 12.0);
  return s;
}

namespace detail {

inline LemmaReport finish_lemma(LemmaReport r, double alpha, double eps) {
  r.k_lower = *std::min_element(r.scaled_transform.begin(), r.scaled_transform.end());
  r.k_upper = *std::max_element(r.scaled_transform.begin(), r.scaled_transform.end());
  const double a = alpha + eps;
  r.k_upper1 = r.k_upper / boost::math::tgamma_lower(a, 1.0);
  r.k_lower1 = r.k_lower / boost::math::tgamma(a);
  r.upper_bound = r.k_upper1 / eps;
  r.lower_bound = r.k_lower1 / eps;
  if (!(r.k_lower > 0.0) || !std::isfinite(r.k_upper)) {
    r.precondition_ok = false;
    r.precondition_message = "transform is not bounded between positive multiples of s^-alpha on the samples";
  } else {
    r.precondition_ok = true;
  }
  r.upper_holds = r.upper_lhs <= r.upper_bound;
  r.lower_holds = r.lower_lhs >= r.lower_bound;
  return r;
}

inline void check_lemma_args(double alpha, double eps) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0 - alpha)) throw std::domain_error("eps must lie in (0, 1 - alpha)");
}

}  // namespace detail

/// Integral-decay check for a sampled function (linear pieces, power-law extrapolated tail).
inline LemmaReport lemma_integral_bounds(const SampledFunction& u, double alpha, double eps) {
  detail::check_lemma_args(alpha, eps);
  u.validate();
  LemmaReport r;
  r.s_samples = lemma_sample_frequencies();
  for (double s : r.s_samples) r.scaled_transform.push_back(std::pow(s, alpha) * laplace_transform(u, s));

  const double g = alpha + eps;
  auto piece = [&](double a, double b, double fa, double fb) {
    if (a == 0.0) {
      // exact product integration of the linear piece against t^-g
      const double slope = (fb - fa) / b;
      return fa * std::pow(b, 1.0 - g) / (1.0 - g) + slope * std::pow(b, 2.0 - g) / (2.0 - g);
    }
    auto h = [&](double t) { return (fa + (fb - fa) * (t - a) / (b - a)) * std::pow(t, -g); };
    return quad::gauss<5>(h, a, b);
  };
  double full = 0.0, from_one = 0.0;
  for (std::size_t i = 0; i + 1 < u.t.size(); ++i) {
    const double a = u.t[i], b = u.t[i + 1];
    const double fa = u.values[i], fb = u.values[i + 1];
    full += piece(a, b, fa, fb);
    if (b > 1.0) {
      const double lo = std::max(a, 1.0);
      from_one += piece(lo, b, u(lo), fb);
    }
  }
  double tail = 0.0;
  if (u.tail_exponent) {
    const double p = *u.tail_exponent, tn = u.t.back(), fn = u.values.back();
    tail = (g - p - 1.0 > 0.0) ? fn * tn / (g - p - 1.0) * std::pow(tn, -g)
                               : (fn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    // extrapolation beyond 1 only matters where the grid ends before 1
    if (tn < 1.0 && tail > 0.0 && std::isfinite(tail)) from_one += fn * std::pow(tn, -p) / (g - p - 1.0);
    else from_one += tail;
  }
  r.lower_lhs = full + tail;
  r.upper_lhs = from_one;
  return detail::finish_lemma(std::move(r), alpha, eps);
}

/// Integral-decay check for an analytic function; quadrature up to `horizon`, power-law tail beyond.
inline LemmaReport lemma_integral_bounds(const AnalyticFunction& u, double alpha, double eps,
                                         double horizon = 1e4) {
  detail::check_lemma_args(alpha, eps);
  LemmaReport r;
  r.s_samples = lemma_sample_frequencies();
  for (double s : r.s_samples) r.scaled_transform.push_back(std::pow(s, alpha) * laplace_transform(u, s));

  const double g = alpha + eps;
  // [1, horizon] in the variable y = ln t
  auto hy = [&](double y) {
    const double t = std::exp(y);
    return u.f(t) * std::exp(y * (1.0 - g));
  };
  std::vector<double> ybps;
  for (double b : u.breakpoints)
    if (b > 1.0 && b < horizon) ybps.push_back(std::log(b));
  double from_one = quad::split(hy, 0.0, std::log(horizon), ybps, 1e-12);

  const double p = u.tail.exponent;
  const double amp = u.f(horizon) * std::pow(horizon, -p);
  double tail;
  if (amp == 0.0) tail = 0.0;
  else if (g - p - 1.0 > 0.0) tail = amp * std::pow(horizon, p - g + 1.0) / (g - p - 1.0);
  else tail = std::numeric_limits<double>::infinity();
  from_one += tail;

  const double gamma0 = u.singular_exponent + g;
  double head;
  auto h = [&](double t) { return u.f(t) * std::pow(t, -g); };
  if (gamma0 >= 1.0) {
    // nonintegrable at 0 unless u vanishes identically there
    const double probe = std::abs(u.f(1e-12)) + std::abs(u.f(1e-6));
    head = probe > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    head = quad::left_singular(h, 0.0, 1.0, gamma0, u.breakpoints, 1e-12);
  }
  r.upper_lhs = from_one;
  r.lower_lhs = head + from_one;
  return detail::finish_lemma(std::move(r), alpha, eps);
}

}  // namespace subdiff
