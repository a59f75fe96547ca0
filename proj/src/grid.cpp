#include "krlab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace krlab {

Grid::Grid(int dimension, int cells_per_axis, double length)
    : dim_(dimension), n_(cells_per_axis), length_(length) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("grid dimension must be 1 or 2, got " +
                                std::to_string(dimension));
  if (cells_per_axis < 2 || (cells_per_axis & (cells_per_axis - 1)) != 0)
    throw std::invalid_argument("cells per axis must be a power of two >= 2, got " +
                                std::to_string(cells_per_axis));
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("grid length must be positive");
}

double Grid::cell_volume() const noexcept {
  const double h = spacing();
  return dim_ == 1 ? h : h * h;
}

std::size_t Grid::size() const noexcept {
  const auto n = static_cast<std::size_t>(n_);
  return dim_ == 1 ? n : n * n;
}

double Grid::diameter() const noexcept { return 0.5 * length_ * std::sqrt(double(dim_)); }

std::size_t Grid::index(int i, int j) const noexcept {
  i %= n_;
  if (i < 0) i += n_;
  if (dim_ == 1) return static_cast<std::size_t>(i);
  j %= n_;
  if (j < 0) j += n_;
  return static_cast<std::size_t>(j) * n_ + static_cast<std::size_t>(i);
}

std::array<int, 2> Grid::coords(std::size_t index) const noexcept {
  if (dim_ == 1) return {static_cast<int>(index), 0};
  return {static_cast<int>(index % n_), static_cast<int>(index / n_)};
}

Point Grid::center(std::size_t index) const noexcept {
  const auto [i, j] = coords(index);
  const double h = spacing();
  if (dim_ == 1) return {(i + 0.5) * h, 0.0};
  return {(i + 0.5) * h, (j + 0.5) * h};
}

Vec Grid::displacement(const Point& from, const Point& to) const noexcept {
  Vec d{std::remainder(to[0] - from[0], length_), 0.0};
  if (dim_ == 2) d[1] = std::remainder(to[1] - from[1], length_);
  return d;
}

double Grid::distance(const Point& a, const Point& b) const noexcept {
  return norm(displacement(a, b));
}

double Grid::cell_distance(std::size_t a, std::size_t b) const noexcept {
  const auto ca = coords(a);
  const auto cb = coords(b);
  const double h = spacing();
  auto axis = [this](int u, int v) {
    int k = std::abs(u - v);
    return std::min(k, n_ - k);
  };
  const double dx = axis(ca[0], cb[0]) * h;
  if (dim_ == 1) return dx;
  const double dy = axis(ca[1], cb[1]) * h;
  return std::hypot(dx, dy);
}

double norm(const Vec& v) noexcept { return std::hypot(v[0], v[1]); }

double dot(const Vec& a, const Vec& b) noexcept { return a[0] * b[0] + a[1] * b[1]; }

}  // namespace krlab
