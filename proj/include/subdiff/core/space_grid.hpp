#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace subdiff {

/// Uniform periodic grid on [origin, origin + length) with cells centered at origin + (j + 1/2) dx.
struct PeriodicGrid {
  double origin = 0.0;
  double length = 2.0 * std::numbers::pi;
  std::size_t cells = 256;

  PeriodicGrid() = default;
  PeriodicGrid(double origin_, double length_, std::size_t cells_)
      : origin(origin_), length(length_), cells(cells_) {
    if (!(length > 0.0) || cells == 0) throw std::invalid_argument("periodic grid needs positive length and cells");
  }

  double dx() const { return length / static_cast<double>(cells); }
  double center(std::size_t j) const { return origin + (static_cast<double>(j) + 0.5) * dx(); }
  double left(std::size_t j) const { return origin + static_cast<double>(j) * dx(); }

  /// Position mapped into [origin, origin + length).
  double wrap(double x) const {
    double r = std::fmod(x - origin, length);
    if (r < 0.0) r += length;
    if (r >= length) r = 0.0;
    return origin + r;
  }

  bool operator==(const PeriodicGrid&) const = default;
};

/// L1 distance of two piecewise-constant fields on the same grid.
inline double l1_distance(const PeriodicGrid& grid, const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != grid.cells || b.size() != grid.cells)
    throw std::invalid_argument("l1_distance: field size does not match grid");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
  return s * grid.dx();
}

inline double total_mass(const PeriodicGrid& grid, const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s * grid.dx();
}

}  // namespace subdiff
