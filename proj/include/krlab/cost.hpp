#pragma once

#include <string>

namespace krlab {

enum class CostKind { BoundedLog, TruncatedLinear };

/// Concave transport cost z -> c(z) on [0, inf).
///
/// BoundedLog is log(z/delta + 1) up to `radius` and continues past it with
/// the C^1 branch log(R/delta + 1) + R/(R+delta) (1 - R/z), which keeps the
/// cost bounded. TruncatedLinear is min{z, R}. Both vanish at zero, are
/// nondecreasing and subadditive, so c(|x - y|) is a metric.
class CostSpec {
 public:
  static CostSpec bounded_log(double delta, double radius);
  static CostSpec truncated_linear(double radius);

  CostKind kind() const noexcept { return kind_; }
  /// Zero for TruncatedLinear.
  double delta() const noexcept { return delta_; }
  double radius() const noexcept { return radius_; }

  double value(double z) const;
  double derivative(double z) const;
  /// Inverse of the logarithmic branch: delta (e^xi - 1) for
  /// 0 <= xi <= log(R/delta + 1). BoundedLog only.
  double inverse(double xi) const;
  /// sup_z c(z); log(R/delta + 1) + R/(R + delta) for BoundedLog.
  double supremum() const noexcept;
  /// Upper bound on the slope of c, i.e. the Lipschitz constant.
  double max_slope() const noexcept;

  std::string describe() const;

  bool operator==(const CostSpec&) const = default;

 private:
  CostSpec(CostKind kind, double delta, double radius)
      : kind_(kind), delta_(delta), radius_(radius) {}

  CostKind kind_;
  double delta_;
  double radius_;
};

}  // namespace krlab
