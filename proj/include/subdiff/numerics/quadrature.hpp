#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "subdiff/core/errors.hpp"

namespace subdiff::quad {


namespace detail {
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}
}  // namespace detail

namespace detail {

struct Segment {
  double a, b, value, error, l1;
  bool operator<(const Segment& o) const { return error < o.error; }
};

/// One 21-point Kronrod panel with its embedded 10-point Gauss error estimate, scaled to [a, b].
template <class F>
Segment gk21_panel(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double f0 = f(c);
  double k = f0 * wk[0], g = 0.0, l1 = std::abs(f0) * wk[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = f(c + h * x[i]), fm = f(c - h * x[i]);
    k += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 1) g += (fp + fm) * wg[i / 2];
  }
  const double err = std::max(std::abs(k - g), 50.0 * std::numeric_limits<double>::epsilon() * l1);
  return {a, b, k * h, err * h, l1 * h};
}

/// Global adaptive subdivision of the worst panel until the summed error meets tol relative to the L1 norm.
template <class F>
double gk21_adaptive(F& f, double a, double b, double tol, std::size_t max_panels = 20000) {
  std::priority_queue<Segment> heap;
  heap.push(gk21_panel(f, a, b));
  double value = heap.top().value, error = heap.top().error, l1 = heap.top().l1;
  while (error > tol * l1 && error > 1e-300) {
    if (heap.size() >= max_panels || !std::isfinite(value))
      throw NumericalFailure("quadrature did not converge on [" + fmt(a) + ", " + fmt(b) + "], error estimate " +
                             fmt(error) + " of " + fmt(l1));
    const Segment s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b)) {
      // panel cannot be split further in floating point; accept its contribution
      error -= s.error;
      heap.push({s.a, s.b, s.value, 0.0, s.l1});
      continue;
    }
    const Segment left = gk21_panel(f, s.a, m), right = gk21_panel(f, m, s.b);
    value += left.value + right.value - s.value;
    error += left.error + right.error - s.error;
    l1 += left.l1 + right.l1 - s.l1;
    heap.push(left);
    heap.push(right);
  }
  // re-sum to shed the accumulated update rounding
  double total = 0.0;
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  for (const auto& sgm : segs) total += sgm.value;
  return total;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on a finite or semi-infinite interval; throws when the tolerance cannot be met.
template <class F>
double adaptive(F&& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive(f, b, a, tol);
  if (std::isinf(a)) throw std::domain_error("adaptive quadrature needs a finite lower limit");
  const double rtol = std::max(tol, 200.0 * std::numeric_limits<double>::epsilon());
  double v;
  if (std::isinf(b)) {
    // t = a + x / (1 - x) on [0, 1)
    auto g = [&](double x) {
      const double d = 1.0 - x;
      if (d <= 0.0) return 0.0;
      return f(a + x / d) / (d * d);
    };
    v = detail::gk21_adaptive(g, 0.0, 1.0, rtol);
  } else {
    v = detail::gk21_adaptive(f, a, b, rtol);
  }
  if (!std::isfinite(v)) throw NumericalFailure("quadrature produced a non-finite value");
  return v;
}

/// Double-exponential rule for panels with endpoint singularities of unknown type.
template <class F>
double endpoint_singular(F&& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  double error = 0.0, l1 = 0.0;
  // abscissae can round onto the endpoint itself, where the integrand may be infinite; the weight there is negligible
  const double guard = 1e-12 * (b - a);
  auto g = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v) && (x - a < guard || b - x < guard)) return 0.0;
    return v;
  };
  const double v = integrator.integrate(g, a, b, tol, &error, &l1);
  if (!std::isfinite(v)) throw NumericalFailure("tanh-sinh quadrature produced a non-finite value");
  return v;
}

/// Fixed Gauss-Legendre rule; used for many small smooth panels.
template <unsigned N, class F>
double gauss(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, N>::integrate(f, a, b);
}

namespace detail {
inline std::vector<double> interior_points(double a, double b, const std::vector<double>& pts) {
  std::vector<double> out;
  for (double p : pts)
    if (p > a && p < b) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}
}  // namespace detail

/// Integral of f over [a, b] split at the given breakpoints.
template <class F>
double split(F&& f, double a, double b, const std::vector<double>& breakpoints, double tol = 1e-12) {
  auto pts = detail::interior_points(a, b, breakpoints);
  double lo = a, sum = 0.0;
  for (double p : pts) {
    sum += adaptive(f, lo, p, tol);
    lo = p;
  }
  return sum + adaptive(f, lo, b, tol);
}

namespace detail {
/// Like split, but the panel starting at a is integrated by tanh-sinh: after the power substitutions
/// the integrand keeps a weak algebraic kink there.
template <class F>
double split_kink_at_start(F&& f, double a, double b, const std::vector<double>& breakpoints, double tol) {
  auto pts = interior_points(a, b, breakpoints);
  const double first = pts.empty() ? b : pts.front();
  double sum = endpoint_singular(f, a, first, tol);
  if (first < b) sum += split(f, first, b, pts, tol);
  return sum;
}
}  // namespace detail

/// Integral of h(t) (t - a)^-gamma over [a, b], gamma < 1, via t = a + r^(1/(1-gamma)); h smooth.
template <class H>
double left_weighted(H&& h, double a, double b, double gamma, const std::vector<double>& breakpoints = {},
                     double tol = 1e-12) {
  if (!(gamma < 1.0)) throw std::domain_error("left_weighted requires gamma < 1");
  if (b <= a) return 0.0;
  const double p = 1.0 - gamma;
  auto g = [&](double r) { return h(a + std::pow(r, 1.0 / p)); };
  std::vector<double> rb;
  for (double t : breakpoints)
    if (t > a && t < b) rb.push_back(std::pow(t - a, p));
  return detail::split_kink_at_start(g, 0.0, std::pow(b - a, p), rb, tol) / p;
}

/// Integral of h(t) (b - t)^-gamma over [a, b], gamma < 1, via t = b - r^(1/(1-gamma)); h smooth.
template <class H>
double right_weighted(H&& h, double a, double b, double gamma, const std::vector<double>& breakpoints = {},
                      double tol = 1e-12) {
  if (!(gamma < 1.0)) throw std::domain_error("right_weighted requires gamma < 1");
  if (b <= a) return 0.0;
  const double p = 1.0 - gamma;
  auto g = [&](double r) { return h(b - std::pow(r, 1.0 / p)); };
  std::vector<double> rb;
  for (double t : breakpoints)
    if (t > a && t < b) rb.push_back(std::pow(b - t, p));
  return detail::split_kink_at_start(g, 0.0, std::pow(b - a, p), rb, tol) / p;
}

/// Integral of f over [a, b] where f(t) behaves like (t - a)^-gamma: the Jacobian of the same
/// substitution is applied to f itself.
template <class F>
double left_singular(F&& f, double a, double b, double gamma, const std::vector<double>& breakpoints = {},
                     double tol = 1e-12) {
  if (gamma == 0.0) return split(f, a, b, breakpoints, tol);
  const double p = 1.0 - gamma;
  // f(t) (t-a)^gamma is bounded, so f times the Jacobian r^(gamma/p) is bounded in r.
  auto g = [&](double r) { return f(a + std::pow(r, 1.0 / p)) * std::pow(r, gamma / p); };
  std::vector<double> rb;
  for (double t : breakpoints)
    if (t > a && t < b) rb.push_back(std::pow(t - a, p));
  return detail::split_kink_at_start(g, 0.0, std::pow(b - a, p), rb, tol) / p;
}

}  // namespace subdiff::quad
