#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "subdiff/age/homogeneous.hpp"
#include "subdiff/numerics/quadrature.hpp"

namespace subdiff {

struct RenewalIdentity {
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;

  double relative_gap() const {
    if (lhs == rhs) return 0.0;
    return std::abs(lhs - rhs) / std::max(std::abs(rhs), std::abs(lhs));
  }
};

/// Right side of the integral renewal identity: int g - int g (1+a)^alpha (1+t+a)^-alpha.
inline double renewal_identity_rhs(const AgeProfile& g, double alpha, double t) {
  if (t == 0.0) return 0.0;
  // 1 - ((1+a)/(1+t+a))^alpha written with expm1 so small t keeps full relative accuracy
  auto f = [&](double a) { return g.density(a) * -std::expm1(-alpha * std::log1p(t / (1.0 + a))); };
  const double cut = g.support_cutoff(1e-18);
  return quad::split(f, 0.0, cut, {1.0, 10.0}, 1e-14);
}

/// Left side by the trapezoid rule on the trace grid, right side by quadrature.
inline RenewalIdentity renewal_integral_check(const RenewalTrace& trace, const AgeProfile& g, double alpha, double t) {
  if (trace.t.empty()) throw std::invalid_argument("empty renewal trace");
  if (t < 0.0 || t > trace.t.back() * (1.0 + 1e-12)) throw std::invalid_argument("t outside the trace range");
  RenewalIdentity r;
  r.t = t;
  const auto& ts = trace.t;
  const auto& u = trace.renewal;
  auto kernel = [&](double tau) { return std::pow(1.0 + t - tau, -alpha); };
  double lhs = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size() && ts[i] < t; ++i) {
    const double a = ts[i], b = std::min(ts[i + 1], t);
    const double ub = (b == ts[i + 1]) ? u[i + 1] : u[i] + (u[i + 1] - u[i]) * (b - a) / (ts[i + 1] - a);
    lhs += 0.5 * (b - a) * (u[i] * kernel(a) + ub * kernel(b));
  }
  r.lhs = lhs;
  r.rhs = renewal_identity_rhs(g, alpha, t);
  return r;
}

/// Weighted-decay bounds on the renewal rate.
struct DecayReport {
  double alpha = 0.0;
  double delta = 0.0;
  double mass = 0.0;
  double upper_integral = 0.0;  // int_1^{t_end} t^(-alpha-delta) U
  double upper_bound = 0.0;     // M (alpha + delta) / delta
  double upper_tail = 0.0;      // estimated contribution beyond t_end
  double lower_integral = 0.0;  // int_0^{t_end} t^(-alpha-delta) U
  double lower_bound = 0.0;     // C_minus / delta
  double c_plus = 0.0;
  double c_minus = 0.0;
  double rhs_at_one = 0.0;      // renewal identity right side at t = 1
  double kernel_sup = 0.0;      // sup_tau tau^(alpha+delta) k(tau)
  bool upper_holds = false;
  bool lower_holds = false;
  bool inconclusive = false;
  std::string note;

  bool holds() const { return upper_holds && lower_holds; }
};

/// k(tau) = int_{max(tau,1)}^inf t^(-1-delta) (1 + t - tau)^-alpha dt.
inline double decay_kernel(double alpha, double delta, double tau) {
  const double lo = std::max(tau, 1.0);
  // substitute t = lo / x on (0, 1]: dt = lo / x^2 dx
  auto f = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double t = lo / x;
    return std::pow(t, -1.0 - delta) * std::pow(1.0 + t - tau, -alpha) * lo / (x * x);
  };
  // near x = 0 the integrand behaves like x^(alpha+delta-1)
  return quad::left_singular(f, 0.0, 1.0, std::max(0.0, 1.0 - alpha - delta), {}, 1e-12);
}

/// sup over tau > 0 of tau^(alpha+delta) k(tau), scanned on a log grid and including the tau -> inf limit.
inline double decay_kernel_sup(double alpha, double delta) {
  double best = boost::math::beta(1.0 - alpha, alpha + delta);
  for (int i = 0; i <= 160; ++i) {
    const double tau = std::pow(10.0, -4.0 + 10.0 * i / 160.0);
    best = std::max(best, std::pow(tau, alpha + delta) * decay_kernel(alpha, delta, tau));
  }
  return best;
}

namespace detail {

/// int_{lo}^{hi} t^-g U(t) dt on the trace with U linear per interval; the interval at 0 is exact.
inline double weighted_trace_integral(const RenewalTrace& tr, double g, double lo) {
  const auto& ts = tr.t;
  const auto& u = tr.renewal;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    double a = ts[i], b = ts[i + 1];
    if (b <= lo) continue;
    const double slope = (u[i + 1] - u[i]) / (b - a);
    const double ua = u[i] + slope * (std::max(a, lo) - a);
    a = std::max(a, lo);
    if (a == 0.0) {
      if (g >= 1.0) return (ua > 0.0) ? std::numeric_limits<double>::infinity() : acc;
      acc += ua * std::pow(b, 1.0 - g) / (1.0 - g) + slope * std::pow(b, 2.0 - g) / (2.0 - g);
    } else {
      auto f = [&](double t) { return (ua + slope * (t - a)) * std::pow(t, -g); };
      acc += quad::gauss<3>(f, a, b);
    }
  }
  return acc;
}

}  // namespace detail

/// Upper and lower weighted-integral bounds with the explicit constants of the decay argument.
inline DecayReport decay_weighted_integrals(const RenewalTrace& trace, const AgeProfile& g, double alpha,
                                            double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (trace.t.size() < 2) throw std::invalid_argument("renewal trace too short");
  DecayReport r;
  r.alpha = alpha;
  r.delta = delta;
  r.mass = trace.initial_mass;
  const double gexp = alpha + delta;
  const double t_end = trace.t.back();

  r.c_plus = gexp;
  r.upper_bound = r.mass * r.c_plus / delta;
  r.upper_integral = t_end > 1.0 ? detail::weighted_trace_integral(trace, gexp, 1.0) : 0.0;
  // U decays like c t^(alpha-1): tail beyond t_end approx c t_end^(-delta) / delta
  const double c_tail = trace.renewal.back() * std::pow(t_end, 1.0 - alpha);
  r.upper_tail = c_tail * std::pow(t_end, -delta) / delta;

  r.rhs_at_one = r.mass * renewal_identity_rhs(g, alpha, 1.0);
  r.kernel_sup = decay_kernel_sup(alpha, delta);
  r.c_minus = r.rhs_at_one / r.kernel_sup;
  r.lower_bound = r.c_minus / delta;
  r.lower_integral = detail::weighted_trace_integral(trace, gexp, 0.0);

  r.upper_holds = r.upper_integral <= r.upper_bound;
  if (r.upper_holds && r.upper_integral + r.upper_tail > r.upper_bound) {
    r.inconclusive = true;
    r.note = "tail estimate beyond t_end could exceed the upper bound";
  }
  r.lower_holds = r.lower_integral >= r.lower_bound;
  if (!r.lower_holds && r.lower_integral + r.upper_tail >= r.lower_bound) {
    r.inconclusive = true;
    r.note = "trace too short: the lower bound could be met beyond t_end";
  }
  return r;
}

}  // namespace subdiff
