#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

namespace subdiff {

/// Escape rate alpha/(1+a): survival (1+a)^-alpha.
struct PowerLaw {
  double alpha;
};

/// Escape rate d0 independent of age: exponential survival.
struct ConstantRate {
  double d0;
};

/// Age-dependent escape rate d(a) with its cumulative hazard and survival.
class HazardModel {
 public:
  using Law = std::variant<PowerLaw, ConstantRate>;

  explicit HazardModel(Law law) : law_(law) {
    if (const auto* p = std::get_if<PowerLaw>(&law_)) {
      if (!(p->alpha > 0.0) || !std::isfinite(p->alpha))
        throw std::domain_error("power-law exponent must be positive and finite");
    } else {
      const double d0 = std::get<ConstantRate>(law_).d0;
      if (!(d0 > 0.0) || !std::isfinite(d0))
        throw std::domain_error("constant escape rate must be positive and finite");
    }
  }

  static HazardModel power_law(double alpha) { return HazardModel(PowerLaw{alpha}); }
  static HazardModel constant(double d0) { return HazardModel(ConstantRate{d0}); }

  bool is_power_law() const { return std::holds_alternative<PowerLaw>(law_); }
  const Law& law() const { return law_; }

  /// Exponent alpha for the power law; NaN for the constant law.
  double alpha() const {
    return is_power_law() ? std::get<PowerLaw>(law_).alpha
                          : std::numeric_limits<double>::quiet_NaN();
  }
  double d0() const {
    return is_power_law() ? std::numeric_limits<double>::quiet_NaN()
                          : std::get<ConstantRate>(law_).d0;
  }

  double hazard(double a) const {
    check_age(a);
    if (is_power_law()) return alpha() / (1.0 + a);
    return d0();
  }

  double cumulative_hazard(double a) const {
    check_age(a);
    if (is_power_law()) return alpha() * std::log1p(a);
    return d0() * a;
  }

  double survival(double a) const {
    check_age(a);
    if (is_power_law()) return std::pow(1.0 + a, -alpha());
    return std::exp(-d0() * a);
  }

  /// survival(to) / survival(from) for from <= to, evaluated without forming either factor.
  double survival_ratio(double from, double to) const {
    check_age(from);
    check_age(to);
    if (is_power_law()) return std::exp(-alpha() * std::log1p((to - from) / (1.0 + from)));
    return std::exp(-d0() * (to - from));
  }

  /// Average of survival over [a0, a1] in closed form; survival(a0) when the cell is empty.
  double mean_survival(double a0, double a1) const {
    check_age(a0);
    if (!(a1 >= a0)) throw std::domain_error("mean_survival requires a0 <= a1");
    const double w = a1 - a0;
    if (w == 0.0) return survival(a0);
    if (is_power_law()) {
      const double p = 1.0 - alpha();
      const double l = std::log1p(w / (1.0 + a0));
      // (1+a0)^{1-alpha} * expm1(p*l) / (p*w), stable as p -> 0
      const double ratio = (p == 0.0) ? l : std::expm1(p * l) / p;
      return std::pow(1.0 + a0, p) * ratio / w;
    }
    const double x = d0() * w;
    return std::exp(-d0() * a0) * (-std::expm1(-x)) / x;
  }

  /// Age a at which survival(a) == u, for u in (0, 1].
  double sample_waiting_time(double u) const {
    check_variate(u);
    if (is_power_law()) return std::expm1(-std::log(u) / alpha());
    return -std::log(u) / d0();
  }

  /// Total age a' >= a with survival(a') / survival(a) == u.
  double sample_total_age(double current_age, double u) const {
    check_age(current_age);
    check_variate(u);
    if (is_power_law()) return (1.0 + current_age) * std::exp(-std::log(u) / alpha()) - 1.0;
    return current_age - std::log(u) / d0();
  }

  std::string describe() const {
    if (is_power_law()) return "power-law(alpha=" + std::to_string(alpha()) + ")";
    return "constant(d0=" + std::to_string(d0()) + ")";
  }

 private:
  static void check_age(double a) {
    if (!(a >= 0.0)) throw std::domain_error("age must be nonnegative");
  }
  static void check_variate(double u) {
    if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("uniform variate must lie in (0, 1]");
  }

  Law law_;
};

inline double hazard(const HazardModel& m, double a) { return m.hazard(a); }
inline double survival(const HazardModel& m, double a) { return m.survival(a); }
inline double sample_waiting_time(const HazardModel& m, double u) { return m.sample_waiting_time(u); }

}  // namespace subdiff
