#include "krlab/density.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace krlab {

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("grid function size does not match the grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
}

GridFunction::GridFunction(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridFunction GridFunction::sample(const Grid& grid,
                                  const std::function<double(const Point&)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.center(i));
  return GridFunction(grid, std::move(v));
}

void GridFunction::set(std::size_t i, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
  values_.at(i) = v;
}

double GridFunction::integral() const {
  return compensated_sum(values_) * grid_.cell_volume();
}

double GridFunction::positive_mass() const {
  double s = 0.0;
  for (double v : values_) s += std::max(v, 0.0);
  return s * grid_.cell_volume();
}

double GridFunction::negative_mass() const {
  double s = 0.0;
  for (double v : values_) s += std::max(-v, 0.0);
  return s * grid_.cell_volume();
}

bool GridFunction::is_zero() const noexcept {
  for (double v : values_)
    if (v != 0.0) return false;
  return true;
}

bool GridFunction::has_zero_mean(double tol) const {
  return std::abs(integral()) <= tol * lq_norm(*this, 1.0);
}

void GridFunction::require_same_grid(const GridFunction& other) const {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("grid functions live on different grids");
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

JordanParts jordan_decompose(const SignedDensity& eta) {
  std::vector<double> pos(eta.size()), neg(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    pos[i] = std::max(eta[i], 0.0);
    neg[i] = std::max(-eta[i], 0.0);
  }
  return {SignedDensity(eta.grid(), std::move(pos)), SignedDensity(eta.grid(), std::move(neg))};
}

double lq_norm(const GridFunction& f, double q) {
  if (std::isnan(q) || q < 1.0) throw std::domain_error("L^q exponent must be >= 1");
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double scale = 0.0;
  for (double v : f.values()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  // scale out the maximum so large q does not overflow
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v) / scale, q);
  return scale * std::pow(s * f.grid().cell_volume(), 1.0 / q);
}

SignedDensity mean_zero_projection(const SignedDensity& eta) {
  std::vector<double> v(eta.values().begin(), eta.values().end());
  const double n = static_cast<double>(v.size());
  // second pass removes what rounding left behind in the first
  for (int pass = 0; pass < 2; ++pass) {
    const double mean = compensated_sum(v) / n;
    if (mean == 0.0) break;
    for (double& x : v) x -= mean;
  }
  return SignedDensity(eta.grid(), std::move(v));
}

void write_csv(std::ostream& out, const GridFunction& f) {
  const Grid& g = f.grid();
  out << (g.dimension() == 1 ? "index,x,value\n" : "index,x,y,value\n");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point c = g.center(i);
    out << i << ',' << c[0];
    if (g.dimension() == 2) out << ',' << c[1];
    out << ',' << f[i] << '\n';
  }
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace krlab
