#pragma once

#include <array>
#include <cstddef>

namespace krlab {

using Point = std::array<double, 2>;
using Vec = std::array<double, 2>;

/// Uniform cell-centred grid on the periodic torus [0, L)^d, d in {1, 2}.
///
/// Cell centres sit at (i + 1/2) h componentwise with h = L / n. In one
/// dimension the second coordinate of every Point is zero.
class Grid {
 public:
  /// `cells_per_axis` must be a power of two.
  Grid(int dimension, int cells_per_axis, double length = 1.0);

  int dimension() const noexcept { return dim_; }
  int cells_per_axis() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / n_; }
  double cell_volume() const noexcept;
  std::size_t size() const noexcept;
  /// Largest periodic distance between two points, L sqrt(d) / 2.
  double diameter() const noexcept;

  std::size_t index(int i, int j = 0) const noexcept;
  std::array<int, 2> coords(std::size_t index) const noexcept;
  Point center(std::size_t index) const noexcept;

  /// Minimal-image displacement `to - from`.
  Vec displacement(const Point& from, const Point& to) const noexcept;
  double distance(const Point& a, const Point& b) const noexcept;
  double cell_distance(std::size_t a, std::size_t b) const noexcept;

  bool operator==(const Grid&) const = default;

 private:
  int dim_;
  int n_;
  double length_;
};

double norm(const Vec& v) noexcept;
double dot(const Vec& a, const Vec& b) noexcept;

}  // namespace krlab
