#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "krlab/grid.hpp"

namespace krlab {

/// Real values per grid cell, read as cell averages.
///
/// As a measure, cell i carries the atom value_i * h^d at its centre.
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);
  explicit GridFunction(Grid grid);

  static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  void set(std::size_t i, double v);

  /// Sum of value * h^d.
  double integral() const;
  double positive_mass() const;
  double negative_mass() const;
  bool is_zero() const noexcept;
  /// |integral| <= tol * ||f||_1.
  bool has_zero_mean(double tol = 1e-12) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

 private:
  void require_same_grid(const GridFunction& other) const;

  Grid grid_;
  std::vector<double> values_;
};

using SignedDensity = GridFunction;

struct JordanParts {
  SignedDensity positive;
  SignedDensity negative;
};

/// eta = eta_+ - eta_- with disjoint supports.
JordanParts jordan_decompose(const SignedDensity& eta);

/// Discrete L^q norm (sum |v|^q h^d)^(1/q); q = infinity gives max |v|.
double lq_norm(const GridFunction& f, double q);

/// Subtracts the mean so the total integral vanishes to rounding.
SignedDensity mean_zero_projection(const SignedDensity& eta);

/// CSV rows `index,x[,y],value`.
void write_csv(std::ostream& out, const GridFunction& f);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

}  // namespace krlab
