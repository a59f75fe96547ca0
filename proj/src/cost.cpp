#include "krlab/cost.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace krlab {

namespace {

void require_argument(double z, const char* what) {
  if (!std::isfinite(z) || z < 0.0) {
    std::ostringstream msg;
    msg << what << " must be finite and nonnegative, got " << z;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

CostSpec CostSpec::bounded_log(double delta, double radius) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("bounded-log cost needs delta > 0");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("bounded-log cost needs radius > 0");
  return CostSpec(CostKind::BoundedLog, delta, radius);
}

CostSpec CostSpec::truncated_linear(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("truncated-linear cost needs radius > 0");
  return CostSpec(CostKind::TruncatedLinear, 0.0, radius);
}

double CostSpec::value(double z) const {
  require_argument(z, "cost argument");
  if (kind_ == CostKind::TruncatedLinear) return std::min(z, radius_);
  // log1p keeps full accuracy for z << delta
  if (z <= radius_) return std::log1p(z / delta_);
  return std::log1p(radius_ / delta_) +
         radius_ / (radius_ + delta_) * (1.0 - radius_ / z);
}

double CostSpec::derivative(double z) const {
  require_argument(z, "cost argument");
  if (kind_ == CostKind::TruncatedLinear) return z < radius_ ? 1.0 : 0.0;
  if (z <= radius_) return 1.0 / (delta_ + z);
  return radius_ * radius_ / (radius_ + delta_) / (z * z);
}

double CostSpec::inverse(double xi) const {
  if (kind_ != CostKind::BoundedLog)
    throw std::logic_error("cost inverse is only defined for the bounded-log cost");
  require_argument(xi, "inverse argument");
  const double top = std::log1p(radius_ / delta_);
  if (xi > top * (1.0 + 4.0 * 2.220446049250313e-16)) {
    std::ostringstream msg;
    msg << "inverse argument " << xi << " leaves the logarithmic branch (max " << top
        << ")";
    throw std::domain_error(msg.str());
  }
  return delta_ * std::expm1(std::min(xi, top));
}

double CostSpec::supremum() const noexcept {
  if (kind_ == CostKind::TruncatedLinear) return radius_;
  return std::log1p(radius_ / delta_) + radius_ / (radius_ + delta_);
}

double CostSpec::max_slope() const noexcept {
  return kind_ == CostKind::TruncatedLinear ? 1.0 : 1.0 / delta_;
}

std::string CostSpec::describe() const {
  std::ostringstream out;
  if (kind_ == CostKind::BoundedLog)
    out << "bounded_log(delta=" << delta_ << ", R=" << radius_ << ")";
  else
    out << "truncated_linear(R=" << radius_ << ")";
  return out.str();
}

}  // namespace krlab
