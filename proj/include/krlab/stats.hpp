#pragma once

#include <span>

namespace krlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ slope x + intercept. Needs two distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// max / min of positive values; +inf when the minimum is zero.
double spread_ratio(std::span<const double> values);

}  // namespace krlab
