#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace subdiff {

/// Normalized profile f(z) = 1 - |z| on [-1, 1].
struct Triangular {};

/// Centered Gaussian with deviation sigma, truncated to [-1, 1] and renormalized.
struct TruncatedGaussian {
  double sigma;
};

/// Zero displacement: every renewal leaves the particle in place.
struct Dirac {};

/// Scaled symmetric jump density omega_eps(x, y) = f((y - x) / eps) / eps.
class JumpKernel {
 public:
  using Shape = std::variant<Triangular, TruncatedGaussian, Dirac>;

  JumpKernel(Shape shape, double epsilon, int dimension = 1)
      : shape_(shape), epsilon_(epsilon), dimension_(dimension) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("kernel length scale must be positive");
    if (dimension != 1) throw std::invalid_argument("only one space dimension is supported");
    if (const auto* g = std::get_if<TruncatedGaussian>(&shape_)) {
      if (!(g->sigma > 0.0) || !std::isfinite(g->sigma))
        throw std::invalid_argument("gaussian kernel width must be positive");
    }
  }

  const Shape& shape() const { return shape_; }
  double epsilon() const { return epsilon_; }
  int dimension() const { return dimension_; }
  bool is_dirac() const { return std::holds_alternative<Dirac>(shape_); }

  JumpKernel with_epsilon(double eps) const { return JumpKernel(shape_, eps, dimension_); }

  /// Normalized profile f(z); zero outside [-1, 1]. Not defined pointwise for Dirac.
  double profile(double z) const {
    if (std::abs(z) > 1.0) return 0.0;
    if (std::holds_alternative<Triangular>(shape_)) return 1.0 - std::abs(z);
    if (const auto* g = std::get_if<TruncatedGaussian>(&shape_)) {
      const double s = g->sigma;
      return std::exp(-0.5 * z * z / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi) * gauss_mass(s));
    }
    throw std::logic_error("the zero-jump kernel has no pointwise density");
  }

  /// Distribution function of the normalized displacement.
  double profile_cdf(double z) const {
    if (z < -1.0) return 0.0;
    if (z >= 1.0) return 1.0;
    if (std::holds_alternative<Triangular>(shape_)) {
      return z <= 0.0 ? 0.5 * (1.0 + z) * (1.0 + z) : 1.0 - 0.5 * (1.0 - z) * (1.0 - z);
    }
    if (const auto* g = std::get_if<TruncatedGaussian>(&shape_)) {
      const double s = g->sigma;
      return (normal_cdf(z / s) - normal_cdf(-1.0 / s)) / gauss_mass(s);
    }
    return z >= 0.0 ? 1.0 : 0.0;
  }

  double density(double x, double y) const { return profile((y - x) / epsilon_) / epsilon_; }

  /// Second moment of the normalized displacement, i.e. the scaled second moment divided by eps^2.
  double moment2() const {
    if (std::holds_alternative<Triangular>(shape_)) return 1.0 / 6.0;
    if (const auto* g = std::get_if<TruncatedGaussian>(&shape_)) {
      const double s = g->sigma, c = 1.0 / s;
      return s * s * (1.0 - 2.0 * c * normal_pdf(c) / gauss_mass(s));
    }
    return 0.0;
  }

  /// Third absolute moment of the normalized displacement.
  double moment3() const {
    if (std::holds_alternative<Triangular>(shape_)) return 0.1;
    if (const auto* g = std::get_if<TruncatedGaussian>(&shape_)) {
      const double s = g->sigma, c = 1.0 / s;
      return 2.0 * s * s * s * (2.0 - (2.0 + c * c) * std::exp(-0.5 * c * c)) /
             (std::sqrt(2.0 * std::numbers::pi) * gauss_mass(s));
    }
    return 0.0;
  }

  double moment1() const { return 0.0; }

  /// Normalized displacement from two uniform variates in (0, 1].
  double normalized_displacement(double u1, double u2) const {
    if (std::holds_alternative<Triangular>(shape_)) return u1 - u2;
    if (const auto* g = std::get_if<TruncatedGaussian>(&shape_)) {
      const double s = g->sigma;
      const double lo = normal_cdf(-1.0 / s);
      const double p = lo + u1 * gauss_mass(s);
      const double z = s * std::numbers::sqrt2 * boost::math::erf_inv(std::clamp(2.0 * p - 1.0, -1.0, 1.0));
      return std::clamp(z, -1.0, 1.0);
    }
    return 0.0;
  }

  double sample_jump(double x, double u1, double u2) const {
    return x + epsilon_ * normalized_displacement(u1, u2);
  }

  /// Fourier multiplier: integral of omega_eps(z) cos(xi z) dz.
  double fourier_multiplier(double xi) const {
    const double x = epsilon_ * xi;
    if (std::holds_alternative<Triangular>(shape_)) {
      if (x == 0.0) return 1.0;
      const double h = 0.5 * x;
      const double sinc = std::sin(h) / h;
      return sinc * sinc;
    }
    if (std::holds_alternative<TruncatedGaussian>(shape_)) {
      auto f = [&](double z) { return profile(z) * std::cos(x * z); };
      return 2.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 20, 1e-14);
    }
    return 1.0;
  }

  /// Cell-averaged transition weights for a grid of spacing dx; entry m pairs with offset m - radius.
  std::vector<double> cell_weights(double dx) const {
    if (!(dx > 0.0)) throw std::invalid_argument("cell width must be positive");
    if (is_dirac()) return {1.0};
    const double h = dx / epsilon_;
    const auto radius = static_cast<long>(std::ceil(1.0 / h + 0.5));
    std::vector<double> w(2 * radius + 1, 0.0);
    for (long m = 0; m <= radius; ++m) {
      double wm;
      if (m == 0) {
        wm = 2.0 * (profile_cdf(0.5 * h) - 0.5);
      } else {
        wm = profile_cdf((m + 0.5) * h) - profile_cdf((m - 0.5) * h);
      }
      w[radius + m] = wm;
      w[radius - m] = wm;
    }
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return w;
  }

  std::string describe() const {
    if (std::holds_alternative<Triangular>(shape_)) return "triangular";
    if (const auto* g = std::get_if<TruncatedGaussian>(&shape_))
      return "gaussian(sigma=" + std::to_string(g->sigma) + ")";
    return "dirac";
  }

 private:
  static double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
  static double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
  static double gauss_mass(double s) { return std::erf(1.0 / (s * std::numbers::sqrt2)); }

  Shape shape_;
  double epsilon_;
  int dimension_;
};

inline double kernel_moment2(const JumpKernel& k) { return k.moment2(); }
inline double kernel_moment3(const JumpKernel& k) { return k.moment3(); }
inline double sample_jump(const JumpKernel& k, double x, double u1, double u2) {
  return k.sample_jump(x, u1, u2);
}

}  // namespace subdiff
