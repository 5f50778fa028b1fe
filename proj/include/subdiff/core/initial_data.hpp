#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

#include "subdiff/core/errors.hpp"
#include "subdiff/core/hazard.hpp"
#include "subdiff/core/space_grid.hpp"

namespace subdiff {

/// Probability density g(a) of the initial ages.
class AgeProfile {
 public:
  struct Exponential {
    double rate;
  };
  struct Custom {
    std::function<double(double)> density;
    double cutoff;  // g vanishes beyond this age
  };

  static AgeProfile exponential(double rate = 1.0) {
    if (!(rate > 0.0)) throw ConfigurationError("exponential age profile needs a positive rate");
    return AgeProfile(Exponential{rate});
  }
  static AgeProfile custom(std::function<double(double)> density, double cutoff) {
    if (!(cutoff > 0.0)) throw ConfigurationError("custom age profile needs a positive cutoff");
    return AgeProfile(Custom{std::move(density), cutoff});
  }

  bool is_exponential() const { return std::holds_alternative<Exponential>(kind_); }
  double rate() const { return std::get<Exponential>(kind_).rate; }

  double density(double a) const {
    if (a < 0.0) return 0.0;
    if (is_exponential()) return rate() * std::exp(-rate() * a);
    const auto& c = std::get<Custom>(kind_);
    return a > c.cutoff ? 0.0 : c.density(a);
  }

  /// Integral of g over [a0, a1].
  double cell_mass(double a0, double a1) const {
    if (is_exponential()) return std::exp(-rate() * a0) * -std::expm1(-rate() * (a1 - a0));
    const auto& c = std::get<Custom>(kind_);
    const double hi = std::min(a1, c.cutoff);
    if (hi <= a0) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(c.density, a0, hi, 15, 1e-13);
  }

  /// Integral of g over [a, infinity).
  double tail_mass(double a) const {
    if (is_exponential()) return std::exp(-rate() * a);
    return cell_mass(a, std::get<Custom>(kind_).cutoff);
  }

  /// Age beyond which the remaining mass is below `tol`.
  double support_cutoff(double tol) const {
    if (is_exponential()) return -std::log(tol) / rate();
    return std::get<Custom>(kind_).cutoff;
  }

  /// Age drawn by inversion from u in (0, 1].
  double sample(double u) const {
    if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("uniform variate must lie in (0, 1]");
    if (is_exponential()) return -std::log(u) / rate();
    throw UnsupportedConfiguration("sampling is only available for the exponential age profile");
  }

  /// Integral of g(a) * (1+a)^p.
  double power_moment(double p) const {
    auto f = [&](double a) { return density(a) * std::pow(1.0 + a, p); };
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, support_cutoff(1e-18), 20, 1e-12);
  }

  /// sup_a g(a) / survival(a); infinite when the ratio is unbounded.
  double sup_survival_ratio(const HazardModel& model) const {
    if (!is_exponential()) {
      double best = 0.0;
      const double cut = std::get<Custom>(kind_).cutoff;
      for (int i = 0; i <= 4000; ++i) {
        const double a = cut * i / 4000.0;
        best = std::max(best, density(a) / model.survival(a));
      }
      return best;
    }
    const double lam = rate();
    if (model.is_power_law()) {
      const double alpha = model.alpha();
      const double a_star = std::max(0.0, alpha / lam - 1.0);
      return lam * std::exp(-lam * a_star) * std::pow(1.0 + a_star, alpha);
    }
    if (lam < model.d0()) return std::numeric_limits<double>::infinity();
    return lam;
  }

  /// L1 norm of g' + d g, the residual of the age-equilibrium condition.
  double equilibrium_residual(const HazardModel& model) const {
    if (!is_exponential())
      throw UnsupportedConfiguration("equilibrium residual is only available for the exponential age profile");
    auto f = [&](double a) { return std::abs(model.hazard(a) - rate()) * density(a); };
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, support_cutoff(1e-18), 20, 1e-12);
  }

  std::string describe() const {
    if (is_exponential()) return "exponential(rate=" + std::to_string(rate()) + ")";
    return "custom";
  }

 private:
  explicit AgeProfile(std::variant<Exponential, Custom> k) : kind_(std::move(k)) {}
  std::variant<Exponential, Custom> kind_;
};

/// Initial spatial density rho0(x).
class SpatialProfile {
 public:
  struct Cosine {
    double mean;
    double amplitude;
  };  // mean + amplitude cos(x), period 2 pi
  struct Uniform {
    double value;
  };
  struct Gaussian {
    double center;
    double width;
    double mass;
  };

  static SpatialProfile cosine(double mean = 1.0, double amplitude = 1.0) {
    if (std::abs(amplitude) > mean) throw ConfigurationError("cosine profile would be negative");
    return SpatialProfile(Cosine{mean, amplitude});
  }
  static SpatialProfile uniform(double value = 1.0) {
    if (value < 0.0) throw ConfigurationError("uniform profile must be nonnegative");
    return SpatialProfile(Uniform{value});
  }
  static SpatialProfile gaussian(double center, double width, double mass = 1.0) {
    if (!(width > 0.0) || mass < 0.0) throw ConfigurationError("gaussian profile needs positive width");
    return SpatialProfile(Gaussian{center, width, mass});
  }

  template <class T>
  bool is() const { return std::holds_alternative<T>(kind_); }
  template <class T>
  const T& as() const { return std::get<T>(kind_); }

  double value(double x) const {
    if (const auto* c = std::get_if<Cosine>(&kind_)) return c->mean + c->amplitude * std::cos(x);
    if (const auto* u = std::get_if<Uniform>(&kind_)) return u->value;
    const auto& g = std::get<Gaussian>(kind_);
    const double z = (x - g.center) / g.width;
    return g.mass * std::exp(-0.5 * z * z) / (g.width * std::sqrt(2.0 * std::numbers::pi));
  }

  /// Average of rho0 over [x0, x1].
  double cell_average(double x0, double x1) const {
    const double w = x1 - x0;
    if (const auto* c = std::get_if<Cosine>(&kind_))
      return c->mean + c->amplitude * (std::sin(x1) - std::sin(x0)) / w;
    if (const auto* u = std::get_if<Uniform>(&kind_)) return u->value;
    const auto& g = std::get<Gaussian>(kind_);
    auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - g.center) / (g.width * std::numbers::sqrt2)); };
    return g.mass * (cdf(x1) - cdf(x0)) / w;
  }

  std::vector<double> cell_averages(const PeriodicGrid& grid) const {
    std::vector<double> v(grid.cells);
    for (std::size_t j = 0; j < grid.cells; ++j) v[j] = cell_average(grid.left(j), grid.left(j) + grid.dx());
    return v;
  }

  std::vector<double> nodal_values(const PeriodicGrid& grid) const {
    std::vector<double> v(grid.cells);
    for (std::size_t j = 0; j < grid.cells; ++j) v[j] = value(grid.center(j));
    return v;
  }

  /// Position drawn from rho0 / mass by inversion; the cosine and uniform profiles live on `grid`.
  double sample(double u, const PeriodicGrid& grid) const {
    if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("uniform variate must lie in (0, 1]");
    if (std::holds_alternative<Uniform>(kind_)) return grid.origin + u * grid.length;
    if (const auto* c = std::get_if<Cosine>(&kind_)) {
      // F(x) = (mean x + amplitude (sin x - sin x0)) / mass, x measured from the grid origin
      const double x0 = grid.origin, mass = c->mean * grid.length;
      auto f = [&](double x) {
        return std::make_tuple(c->mean * (x - x0) + c->amplitude * (std::sin(x) - std::sin(x0)) - u * mass,
                               c->mean + c->amplitude * std::cos(x));
      };
      std::uintmax_t iters = 100;
      return boost::math::tools::newton_raphson_iterate(f, x0 + u * grid.length, x0, x0 + grid.length, 52, iters);
    }
    const auto& g = std::get<Gaussian>(kind_);
    return g.center + g.width * std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
  }

  std::string describe() const {
    if (const auto* c = std::get_if<Cosine>(&kind_))
      return "cosine(mean=" + std::to_string(c->mean) + ",amplitude=" + std::to_string(c->amplitude) + ")";
    if (const auto* u = std::get_if<Uniform>(&kind_)) return "uniform(" + std::to_string(u->value) + ")";
    return "gaussian";
  }

 private:
  explicit SpatialProfile(std::variant<Cosine, Uniform, Gaussian> k) : kind_(k) {}
  std::variant<Cosine, Uniform, Gaussian> kind_;
};

/// Product initial data u0(a, x) = rho0(x) g(a).
struct InitialAgeData {
  SpatialProfile rho0;
  AgeProfile ages;

  double value(double a, double x) const { return rho0.value(x) * ages.density(a); }

  /// Constant C0 with u0(a, x) <= C0 survival(a), given the maximum of rho0.
  double comparison_constant(const HazardModel& model, double rho0_max) const {
    return rho0_max * ages.sup_survival_ratio(model);
  }
};

}  // namespace subdiff
