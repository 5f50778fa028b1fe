#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "subdiff/laplace/transform.hpp"

namespace subdiff {

/// Gamma(1 - alpha) as the integral of sigma^-alpha e^-sigma, singular panel substituted.
inline double gamma_alpha(double alpha, double tol = 1e-12) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("gamma_alpha requires 0 < alpha < 1");
  AnalyticFunction f{[alpha](double t) { return std::pow(t, -alpha); }, TailBound{1.0, -alpha}, {}, alpha};
  return laplace_transform(f, 1.0, tol);
}

/// Result of checking a transform identity: both sides and the relative residual.
struct IdentityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

inline double relative_residual(double lhs, double rhs) {
  const double diff = std::abs(lhs - rhs);
  if (diff == 0.0) return 0.0;
  const double scale = std::abs(rhs) > 0.0 ? std::abs(rhs) : std::abs(lhs);
  return diff / scale;
}

/// Memory integral I(t) = int_0^t P(a) (t - a)^-alpha da.
inline double memory_integral(const AnalyticFunction& P, double alpha, double t, double tol = 1e-13) {
  if (t <= 0.0) return 0.0;
  const double split = std::max(0.0, t - 1.0);
  double far = 0.0;
  if (split > 0.0) {
    auto g = [&](double a) { return P.f(a) * std::pow(t - a, -alpha); };
    far = P.singular_exponent > 0.0 ? quad::left_singular(g, 0.0, std::min(split, 1.0), P.singular_exponent,
                                                          P.breakpoints, tol) +
                                          quad::split(g, std::min(split, 1.0), split, P.breakpoints, tol)
                                    : quad::split(g, 0.0, split, P.breakpoints, tol);
  }
  double near;
  if (P.singular_exponent > 0.0 && split == 0.0) {
    // both endpoint singularities inside one unit panel: split at the midpoint
    const double mid = 0.5 * t;
    auto g = [&](double a) { return P.f(a) * std::pow(t - a, -alpha); };
    near = quad::left_singular(g, 0.0, mid, P.singular_exponent, P.breakpoints, tol) +
           quad::right_weighted(P.f, mid, t, alpha, P.breakpoints, tol);
  } else {
    near = quad::right_weighted(P.f, split, t, alpha, P.breakpoints, tol);
  }
  return far + near;
}

/// Memory integral with the regular kernel: J(t) = int_0^t P(a) (1 + t - a)^-alpha da.
inline double shifted_memory_integral(const AnalyticFunction& P, double alpha, double t, double tol = 1e-13) {
  if (t <= 0.0) return 0.0;
  auto g = [&](double a) { return P.f(a) * std::pow(1.0 + t - a, -alpha); };
  std::vector<double> bps = P.breakpoints;
  if (P.singular_exponent > 0.0) {
    const double e0 = std::min(1.0, t);
    return quad::left_singular(g, 0.0, e0, P.singular_exponent, bps, tol) + quad::split(g, e0, t, bps, tol);
  }
  return quad::split(g, 0.0, t, bps, tol);
}

/// s L_s[I] against Gamma(1-alpha) s^alpha L_s[P]; the transform of the time derivative of I is
/// s L_s[I] because I(0) = 0.
inline IdentityResult verify_fund_laplace(const AnalyticFunction& P, double alpha, double s, double tol = 1e-10) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  AnalyticFunction I{[&P, alpha](double t) { return memory_integral(P, alpha, t); },
                     TailBound{P.tail.scale / (1.0 - alpha), std::max(P.tail.exponent, 0.0) + 1.0 - alpha},
                     P.breakpoints, 0.0};
  IdentityResult r;
  r.lhs = s * laplace_transform(I, s, tol);
  r.rhs = gamma_alpha(alpha) * std::pow(s, alpha) * laplace_transform(P, s, tol);
  r.residual = relative_residual(r.lhs, r.rhs);
  return r;
}

/// s L_s[J] against s L_s[(1+a)^-alpha] L_s[P].
inline IdentityResult verify_fund_laplace2(const AnalyticFunction& P, double alpha, double s, double tol = 1e-10) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  AnalyticFunction J{[&P, alpha](double t) { return shifted_memory_integral(P, alpha, t); },
                     TailBound{P.tail.scale, std::max(P.tail.exponent, 0.0) + 1.0}, P.breakpoints, 0.0};
  AnalyticFunction kernel{[alpha](double a) { return std::pow(1.0 + a, -alpha); }, TailBound{1.0, 0.0}, {}, 0.0};
  IdentityResult r;
  r.lhs = s * laplace_transform(J, s, tol);
  r.rhs = s * laplace_transform(kernel, s, tol) * laplace_transform(P, s, tol);
  r.residual = relative_residual(r.lhs, r.rhs);
  return r;
}

/// Derivative rule s L_s[f] = L_s[f'] for f(0) = 0.
inline IdentityResult derivative_rule(const AnalyticFunction& f, const AnalyticFunction& fprime, double s,
                                      double tol = 1e-10) {
  IdentityResult r;
  r.lhs = s * laplace_transform(f, s, tol);
  r.rhs = laplace_transform(fprime, s, tol);
  r.residual = relative_residual(r.lhs, r.rhs);
  return r;
}

/// s^alpha L_s[t^(alpha-1)]; equals Gamma(alpha) for every s.
inline double scaling_rule_value(double alpha, double s, double tol = 1e-10) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  AnalyticFunction f{[alpha](double t) { return std::pow(t, alpha - 1.0); }, TailBound{1.0, alpha - 1.0}, {},
                     1.0 - alpha};
  return std::pow(s, alpha) * laplace_transform(f, s, tol);
}

}  // namespace subdiff
