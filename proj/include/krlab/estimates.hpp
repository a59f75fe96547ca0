#pragma once

#include <vector>

#include "krlab/cost.hpp"
#include "krlab/fields.hpp"
#include "krlab/pde.hpp"
#include "krlab/stats.hpp"
#include "krlab/transport.hpp"

namespace krlab {

/// The three pieces of r; `total` is their sum.
struct Perturbation {
  double initial = 0.0;
  double velocity = 0.0;
  double source = 0.0;
  double total() const noexcept { return initial + velocity + source; }
};

/// Two Cauchy problems on the same domain and horizon with exponents
/// 1/p + 1/q = 1 (q = infinity when p = 1).
class StabilityInstance {
 public:
  StabilityInstance(CauchyData first, CauchyData second, double p, double q);
  /// q from 1/p + 1/q = 1.
  static StabilityInstance conjugate(CauchyData first, CauchyData second, double p);

  const CauchyData& first() const noexcept { return first_; }
  const CauchyData& second() const noexcept { return second_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  const Grid& grid() const noexcept { return first_.initial.grid(); }
  double horizon() const noexcept { return first_.horizon; }

  /// ||rho1 - rho2||_q, int_0^T ||u1 - u2||_p dt and int_0^T ||f1 - f2||_q dt.
  Perturbation perturbation() const;

 private:
  CauchyData first_;
  CauchyData second_;
  double p_;
  double q_;
};

/// eta(t) = rho1 - rho2 - (rho1(0) - rho2(0)) - int_0^t (f1 - f2) and the flux
/// j = u1 eta + (u1 - u2) rho2 + u1 (rho1(0) - rho2(0)) + u1 int_0^t (f1 - f2),
/// both at cell centres on the shared time grid.
struct EtaTrajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<SignedDensity> eta;
  std::vector<std::vector<Vec>> flux;
  /// |int eta_raw| / (||rho1||_1 + ||rho2||_1) removed by the projection.
  std::vector<double> projection;
  /// sup_t ||rho2(t)||_q
  double second_norm = 0.0;

  double max_projection() const;
};

EtaTrajectory build_eta(const StabilityInstance& instance, const SolutionTrajectory& first,
                        const SolutionTrajectory& second);

/// A fixed eta repeated on `times` with zero flux.
EtaTrajectory frozen_eta(const SignedDensity& eta, const std::vector<double>& times);

/// D_{delta,R}(eta(t)) per stored frame.
std::vector<double> track_kr(const EtaTrajectory& eta, double delta, double radius);

/// D(t_0) <= 2 max(0, linear extrapolation of D(t_1), D(t_2) back to t_0).
bool vanishes_at_start(const std::vector<double>& times, const std::vector<double>& distance,
                       double absolute_slack = 1e-12);

struct DerivativeIdentityReport {
  /// Interior frames only.
  std::vector<double> times;
  std::vector<double> distance;
  /// Centred difference of D_{delta,R}.
  std::vector<double> lhs;
  /// sum j . grad phi h^d.
  std::vector<double> rhs;
  double integrated_gap = 0.0;
  double integrated_rhs = 0.0;

  double relative_gap() const noexcept { return integrated_rhs > 0.0 ? integrated_gap / integrated_rhs : 0.0; }
};

/// Needs at least 32 stored frames. grad phi is the support gradient
/// deposited on plan cells and the centred difference of the c-transform
/// elsewhere.
DerivativeIdentityReport check_derivative_identity(const EtaTrajectory& eta, double delta, double radius);

struct RateBoundReport {
  double delta = 0.0;
  double radius = 0.0;
  double p = 0.0;
  double q = 0.0;
  /// |int u . grad phi eta| through the marginal identity.
  double transport_term = 0.0;
  /// sum m |u(x) - u(y)| / (delta + |x - y|)
  double quotient_delta = 0.0;
  /// sum m |u(x) - u(y)| / |x - y|
  double quotient_plain = 0.0;
  double eta_l1 = 0.0;
  double eta_lq = 0.0;
  double eta_linf = 0.0;
  /// ||grad u||_p, +inf when grad u is not in L^p.
  double gradient_lp = 0.0;
  /// int e(|grad u|), +inf for BV fields.
  double modulus_integral = 0.0;
  double psi = 0.0;
  /// quotient_plain / (||eta||_q ||grad u||_p); NaN unless p > 1 and grad u in L^p.
  double c_l3 = 0.0;
  /// quotient_delta / (psi (||eta||_1 + ||eta||_inf int e(|grad u|))); NaN unless p = 1.
  double c_l5 = 0.0;

  /// transport_term <= quotient_delta + slack.
  double l2_margin() const noexcept { return quotient_delta - transport_term; }
  bool l2_holds(double slack = 1e-9) const noexcept { return l2_margin() >= -slack; }
};

RateBoundReport check_rate_bounds(const KrSolution& solution, const VelocityField& u, double t, double p, double q,
                                  const IntegrabilityModulus& e = {});
RateBoundReport check_rate_bounds(const SignedDensity& eta, const VelocityField& u, double t, double delta,
                                  double radius, double p, double q, const IntegrabilityModulus& e = {});

struct Prop1Point {
  double delta = 0.0;
  double sup_distance = 0.0;
  /// int_0^T sum m |u1(x) - u1(y)| / (delta + |x - y|) dt
  double majorant = 0.0;
  double psi = 0.0;
  double c1 = 0.0;
  /// Worst Lemma L2 margin over the frames.
  double l2_margin = 0.0;
};

struct Prop1Report {
  double radius = 0.0;
  double p = 0.0;
  double q = 0.0;
  Perturbation perturbation;
  std::vector<Prop1Point> points;
  /// max over the sweep of majorant / psi.
  double c1 = 0.0;
  double c1_spread = 0.0;
  /// Smallest C2 with sup D <= c1 psi + C2 r / delta at every point; +inf
  /// when r = 0 and a residual remains.
  double c2 = 0.0;
  /// c2 / max(sup_t ||rho2||_q, ||u1||_{L1 Lp}).
  double c2_normalized = 0.0;
  /// max over the sweep of sup D - c1 psi, floored at zero.
  double residual = 0.0;
  double divergence_norm = 0.0;
  /// sup D against log(1/delta).
  LinearFit distance_fit;
  /// majorant against log(1/delta).
  LinearFit majorant_fit;

  bool uniform(double factor) const noexcept { return c1_spread <= factor; }
};

Prop1Report check_prop1(const StabilityInstance& instance, const EtaTrajectory& eta,
                        const std::vector<double>& deltas, double radius, const IntegrabilityModulus& e = {});
Prop1Report check_prop1(const StabilityInstance& instance, const SolutionTrajectory& first,
                        const SolutionTrajectory& second, const std::vector<double>& deltas, double radius,
                        const IntegrabilityModulus& e = {});

/// delta exp(D / eps) ||eta||_1 + eps R + R D / log(R / delta + 1), with the
/// exponential evaluated in log space and saturated at +inf.
double lemma4_combine(double distance, double eta_l1, double epsilon, double delta, double radius);

struct Lemma4Check {
  double log_distance = 0.0;
  /// D_R(eta), truncated linear cost.
  double direct = 0.0;
  double bound = 0.0;
  double margin() const noexcept { return bound - direct; }
};

Lemma4Check lemma4_check(const SignedDensity& eta, double epsilon, double delta, double radius);

struct UniquenessPoint {
  double delta = 0.0;
  double epsilon = 0.0;
  double distance = 0.0;
  /// Bound on sup_t D_R(eta).
  double bound = 0.0;
  /// Bound on sup_t D_1(eta), the W^{-1,1}-equivalent distance.
  double w_bound = 0.0;
};

struct UniquenessReport {
  double radius = 0.0;
  std::vector<UniquenessPoint> points;
  bool monotone_decrease = false;
  /// First bound over last bound.
  double decrease_factor = 0.0;
};

/// eps = 1 / sqrt|log delta| along the sweep, deltas sorted decreasing.
UniquenessReport uniqueness_drive(const EtaTrajectory& eta, const std::vector<double>& deltas, double radius);

struct StabilityPoint {
  double r = 0.0;
  double sup_norm = 0.0;
  /// sup_norm |log r|
  double c = 0.0;
  double sqrt_r = 0.0;
  double inv_log = 0.0;
  double inv_log1 = 0.0;
  double schedule_sum = 0.0;
  /// Lemma L4 terms at delta = r, R = 1, eps = 1 / |log sqrt r|.
  double lemma4_exp_term = 0.0;
  double lemma4_eps_term = 0.0;
  double lemma4_tail_term = 0.0;
};

struct StabilityReport {
  std::vector<StabilityPoint> points;
  /// Least squares through the origin of sup_norm against 1 / |log r|.
  double c_fit = 0.0;
  /// Relative l2 residual of that fit.
  double fit_residual = 0.0;
  double c_max = 0.0;
  /// max_r C_r / C at the largest r; at most the stated factor passes.
  double growth = 0.0;
  bool schedule_dominates = false;
};

/// `etas[i]` belongs to `r_values[i]`; every r must lie in [0, 1).
StabilityReport stability_rate(const std::vector<double>& r_values, const std::vector<EtaTrajectory>& etas);

struct OscillationPoint {
  int k = 0;
  double l1 = 0.0;
  double w_norm = 0.0;
};

struct WeakNotStrongReport {
  double horizon = 0.0;
  int cells = 0;
  std::vector<OscillationPoint> points;
  /// max - min of the L^1 norms.
  double l1_spread = 0.0;
  /// w_norm at the first k over w_norm at the last k.
  double w_decay = 0.0;
  /// max_k k w_norm(k).
  double c_fit = 0.0;
};

/// rho_k(T) for u = sin(kx)/k, rho(0) = 1 on the 2 pi circle, by the exact
/// inverse flow: exact cell averages for the W^{-1,1} norm and adaptive
/// quadrature for the L^1 norm.
WeakNotStrongReport weak_not_strong(const std::vector<int>& ks, double horizon, int cells = 1024);

/// Cell averages of rho_k(T) - 1.
SignedDensity oscillatory_deviation(int k, double horizon, const Grid& grid);

}  // namespace krlab
