#pragma once

#include <array>
#include <functional>
#include <string>

#include "krlab/density.hpp"
#include "krlab/grid.hpp"

namespace krlab {

enum class FieldFamily { Zero, Constant, E1Step, Oscillatory, PowerCusp, SmoothShear2D, Rotation2D };

/// Row i holds the gradient of component i: jac[i][j] = d u_i / d x_j.
using Jacobian = std::array<Vec, 2>;

/// Analytic velocity field on a periodic domain.
///
/// Fields are stationary unless built with `modulated`, which multiplies the
/// field by cos(omega t).
class VelocityField {
 public:
  static VelocityField zero(int dimension);
  static VelocityField constant(int dimension, Vec velocity);
  /// +1 on [0, 1/2), -1 on [1/2, 1), periodic. BV but not W^{1,1}.
  static VelocityField e1_step();
  /// sin(k x) / k on the 2 pi periodic circle.
  static VelocityField oscillatory(int k);
  /// sign(s) |s|^alpha (1 - 2|s|) with s the periodic offset from x0 in
  /// [-1/2, 1/2). C^1 at the far cut; grad u in L^p iff p (1 - alpha) < 1.
  static VelocityField power_cusp(double alpha, double x0 = 0.5);
  /// (sin(2 pi y) / 2, sin(2 pi x) / 4).
  static VelocityField smooth_shear_2d();
  /// (sin 2 pi x cos 2 pi y, -cos 2 pi x sin 2 pi y).
  static VelocityField rotation_2d();

  /// "zero", "zero2d", "constant:c", "e1_step", "oscillatory:k",
  /// "power_cusp:alpha", "shear2d", "rotation2d".
  static VelocityField parse(const std::string& id);

  VelocityField scaled(double factor) const;
  VelocityField modulated(double omega) const;

  FieldFamily family() const noexcept { return family_; }
  int dimension() const noexcept { return dim_; }
  const std::string& id() const noexcept { return id_; }
  /// Spatial period on every axis.
  double period() const noexcept;
  bool time_dependent() const noexcept { return omega_ != 0.0; }

  Vec value(double t, const Point& x) const;
  Jacobian gradient(double t, const Point& x) const;
  double divergence(double t, const Point& x) const;
  /// sup_x |u(t, x)| over all t.
  double max_speed() const;
  /// sup_x |div u(t, x)| over all t; infinite for the cusp.
  double sup_divergence() const;

  /// grad u in L^p for p strictly below this bound (or up to infinity
  /// inclusive when the bound is infinite). Zero for E1Step.
  double max_gradient_exponent() const noexcept;
  bool gradient_in_lp(double p) const noexcept;
  bool is_bv_only() const noexcept { return family_ == FieldFamily::E1Step; }

  /// Zero, Constant and Oscillatory have closed-form flows.
  bool has_exact_flow() const noexcept;
  /// phi(t, x), with negative t giving the inverse flow.
  Point exact_flow(double t, const Point& x) const;
  /// det grad_x phi(t, x).
  double exact_jacobian(double t, const Point& x) const;

 private:
  VelocityField(FieldFamily family, int dim, std::string id) : family_(family), dim_(dim), id_(std::move(id)) {}
  double time_factor(double t) const noexcept;

  FieldFamily family_;
  int dim_;
  std::string id_;
  Vec constant_{0.0, 0.0};
  int k_ = 1;
  double alpha_ = 1.0;
  double x0_ = 0.5;
  double scale_ = 1.0;
  double omega_ = 0.0;
};

/// Closed-form flow of x' = sin(k x) / k via tan(k x / 2) = tan(k x0 / 2) e^t
/// on each cell between consecutive equilibria.
double exact_flow_oscillatory(int k, double t, double x);
double exact_jacobian_oscillatory(int k, double t, double x);

enum class SourceFamily { Zero, Constant, Cosine };

/// Scalar source f(t, x); stationary.
class ScalarSource {
 public:
  static ScalarSource zero();
  static ScalarSource constant(double c);
  /// a cos(2 pi x / period) along the first axis.
  static ScalarSource cosine(double amplitude, double period = 1.0);
  /// "zero", "constant:c", "cosine:a".
  static ScalarSource parse(const std::string& id);

  SourceFamily family() const noexcept { return family_; }
  const std::string& id() const noexcept { return id_; }
  bool is_zero() const noexcept { return family_ == SourceFamily::Zero || a_ == 0.0; }
  double value(double t, const Point& x) const;

 private:
  ScalarSource(SourceFamily family, double a, double period, std::string id)
      : family_(family), a_(a), period_(period), id_(std::move(id)) {}
  SourceFamily family_;
  double a_;
  double period_;
  std::string id_;
};

/// Superlinear e with e(xi)/xi nondecreasing and unbounded.
class IntegrabilityModulus {
 public:
  /// e(xi) = xi (1 + log_+ xi).
  IntegrabilityModulus();
  explicit IntegrabilityModulus(std::function<double(double)> e, std::string name);

  double operator()(double xi) const { return e_(xi); }
  const std::string& name() const noexcept { return name_; }

 private:
  std::function<double(double)> e_;
  std::string name_;
};

/// inf_{M > 0} M + M / e(M) (|log delta| + 1), by a log-spaced scan refined
/// with golden-section search.
double psi_one(const IntegrabilityModulus& e, double delta);
/// The minimising M for psi_one.
double psi_one_argmin(const IntegrabilityModulus& e, double delta);

/// Discrete ||grad u(t)||_{L^p} from the analytic gradient at cell centres,
/// |grad u| the Frobenius norm. E1Step reports +inf for p > 1 and its total
/// variation for p = 1.
double sobolev_seminorm(const VelocityField& u, double p, const Grid& grid, double t = 0.0);
/// int_0^T ||grad u(t)||_{L^p} dt (trapezoid in time for modulated fields).
double sobolev_seminorm_l1(const VelocityField& u, double p, const Grid& grid, double T, int time_steps = 64);
/// ||u1(t) - u2(t)||_{L^p} integrated over (0, T).
double field_difference_norm(const VelocityField& a, const VelocityField& b, double p, const Grid& grid,
                             double T, int time_steps = 64);
/// int_0^T ||div u(t)||_{L^infinity} dt.
double divergence_l1_linf(const VelocityField& u, const Grid& grid, double T, int time_steps = 64);
/// int e(|grad u|) dx at t = 0.
double modulus_integral(const VelocityField& u, const IntegrabilityModulus& e, const Grid& grid);
/// |grad u| sampled at cell centres.
GridFunction gradient_magnitude(const VelocityField& u, const Grid& grid, double t = 0.0);

}  // namespace krlab
