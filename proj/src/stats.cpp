#include "krlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace krlab {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("linear_fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double spread_ratio(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("spread_ratio: empty input");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo < 0.0) throw std::domain_error("spread_ratio: negative value");
  if (*hi == 0.0) return 1.0;
  if (*lo == 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

}  // namespace krlab
