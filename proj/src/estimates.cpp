#include "krlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace krlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double conjugate_exponent(double p) {
  if (std::isnan(p) || p < 1.0) throw std::domain_error("exponent p must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double inverse(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  return s;
}

std::vector<Vec> centred_gradient(const GridFunction& phi) {
  const Grid& g = phi.grid();
  const int n = g.cells_per_axis();
  const double h2 = 2.0 * g.spacing();
  std::vector<Vec> grad(g.size(), Vec{0.0, 0.0});
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto [i, j] = g.coords(c);
    grad[c][0] = (phi[g.index((i + 1) % n, j)] - phi[g.index((i + n - 1) % n, j)]) / h2;
    if (g.dimension() == 2) grad[c][1] = (phi[g.index(i, (j + 1) % n)] - phi[g.index(i, (j + n - 1) % n)]) / h2;
  }
  return grad;
}

double psi_p(double p, const IntegrabilityModulus& e, double delta) { return p > 1.0 ? 1.0 : psi_one(e, delta); }

}  // namespace

StabilityInstance::StabilityInstance(CauchyData first, CauchyData second, double p, double q)
    : first_(std::move(first)), second_(std::move(second)), p_(p), q_(q) {
  if (std::isnan(p) || std::isnan(q) || p < 1.0 || q < 1.0) throw std::domain_error("exponents must be >= 1");
  if (std::abs(inverse(p) + inverse(q) - 1.0) > 1e-12) throw std::invalid_argument("exponents must satisfy 1/p + 1/q = 1");
  if (!(first_.initial.grid() == second_.initial.grid()))
    throw std::invalid_argument("stability instance: initial data live on different grids");
  if (first_.horizon != second_.horizon) throw std::invalid_argument("stability instance: horizons differ");
  if (first_.velocity.dimension() != second_.velocity.dimension() ||
      first_.velocity.dimension() != grid().dimension())
    throw std::invalid_argument("stability instance: field dimension does not match the grid");
}

StabilityInstance StabilityInstance::conjugate(CauchyData first, CauchyData second, double p) {
  const double q = conjugate_exponent(p);
  return StabilityInstance(std::move(first), std::move(second), p, q);
}

Perturbation StabilityInstance::perturbation() const {
  Perturbation r;
  r.initial = lq_norm(first_.initial - second_.initial, q_);
  r.velocity = field_difference_norm(first_.velocity, second_.velocity, p_, grid(), horizon());
  const auto df = GridFunction::sample(
      grid(), [&](const Point& x) { return first_.source.value(0.0, x) - second_.source.value(0.0, x); });
  r.source = horizon() * lq_norm(df, q_);
  return r;
}

double EtaTrajectory::max_projection() const {
  return projection.empty() ? 0.0 : *std::max_element(projection.begin(), projection.end());
}

EtaTrajectory build_eta(const StabilityInstance& instance, const SolutionTrajectory& first,
                        const SolutionTrajectory& second) {
  const Grid& grid = instance.grid();
  if (!(first.grid == grid) || !(second.grid == grid)) throw std::invalid_argument("build_eta: grids differ");
  if (first.times.size() != second.times.size() || first.frames.size() != first.times.size() ||
      second.frames.size() != second.times.size())
    throw std::invalid_argument("build_eta: trajectories have different frame counts");
  for (std::size_t k = 0; k < first.times.size(); ++k)
    if (std::abs(first.times[k] - second.times[k]) > 1e-12 * std::max(1.0, std::abs(first.times[k])))
      throw std::invalid_argument("build_eta: time stamps differ");

  const CauchyData& a = instance.first();
  const CauchyData& b = instance.second();
  const SignedDensity initial_gap = a.initial - b.initial;
  const auto source_gap =
      GridFunction::sample(grid, [&](const Point& x) { return a.source.value(0.0, x) - b.source.value(0.0, x); });

  EtaTrajectory out{grid, first.times, {}, {}, {}, 0.0};
  for (std::size_t k = 0; k < first.times.size(); ++k) {
    const double t = first.times[k];
    SignedDensity raw = first.frames[k] - second.frames[k];
    raw -= initial_gap;
    raw -= t * source_gap;
    const double scale = lq_norm(first.frames[k], 1.0) + lq_norm(second.frames[k], 1.0);
    out.projection.push_back(scale > 0.0 ? std::abs(raw.integral()) / scale : 0.0);
    SignedDensity eta = raw.is_zero() ? raw : mean_zero_projection(raw);

    std::vector<Vec> j(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const Point x = grid.center(c);
      const Vec u1 = a.velocity.value(t, x);
      const Vec u2 = b.velocity.value(t, x);
      const double carried = eta[c] + initial_gap[c] + t * source_gap[c];
      for (int d = 0; d < 2; ++d) j[c][d] = u1[d] * carried + (u1[d] - u2[d]) * second.frames[k][c];
    }
    out.second_norm = std::max(out.second_norm, lq_norm(second.frames[k], instance.q()));
    out.eta.push_back(std::move(eta));
    out.flux.push_back(std::move(j));
  }
  return out;
}

EtaTrajectory frozen_eta(const SignedDensity& eta, const std::vector<double>& times) {
  EtaTrajectory out{eta.grid(), times, {}, {}, {}, 0.0};
  for (std::size_t k = 0; k < times.size(); ++k) {
    out.eta.push_back(eta);
    out.flux.emplace_back(eta.size(), Vec{0.0, 0.0});
    out.projection.push_back(0.0);
  }
  return out;
}

std::vector<double> track_kr(const EtaTrajectory& eta, double delta, double radius) {
  const CostSpec cost = CostSpec::bounded_log(delta, radius);
  std::vector<double> d;
  d.reserve(eta.eta.size());
  for (const auto& frame : eta.eta) d.push_back(frame.is_zero() ? 0.0 : kr_distance(frame, cost));
  return d;
}

bool vanishes_at_start(const std::vector<double>& times, const std::vector<double>& distance, double absolute_slack) {
  if (times.size() != distance.size() || times.size() < 3) throw std::invalid_argument("vanishes_at_start needs three frames");
  const double slope = (distance[2] - distance[1]) / (times[2] - times[1]);
  const double extrapolated = std::max(0.0, distance[1] - slope * (times[1] - times[0]));
  return distance[0] <= 2.0 * extrapolated + absolute_slack;
}

DerivativeIdentityReport check_derivative_identity(const EtaTrajectory& eta, double delta, double radius) {
  if (eta.eta.size() < 32) throw std::invalid_argument("derivative identity needs at least 32 stored frames");
  const CostSpec cost = CostSpec::bounded_log(delta, radius);
  const Grid& grid = eta.grid;
  const double vol = grid.cell_volume();
  const std::size_t frames = eta.eta.size();

  std::vector<double> dist(frames, 0.0), rate(frames, 0.0);
  for (std::size_t k = 0; k < frames; ++k) {
    if (eta.eta[k].is_zero()) continue;
    const KrSolution sol = solve_kr(eta.eta[k], cost);
    dist[k] = sol.dual;
    std::vector<Vec> grad = centred_gradient(sol.potential.values);
    const DepositedGradient dep = deposit_potential_gradient(sol.plan);
    for (std::size_t c = 0; c < grid.size(); ++c)
      if (dep.weight[c] > 0.0) grad[c] = dep.gradient[c];
    double s = 0.0;
    for (std::size_t c = 0; c < grid.size(); ++c) s += dot(eta.flux[k][c], grad[c]);
    rate[k] = s * vol;
  }

  DerivativeIdentityReport r;
  for (std::size_t k = 1; k + 1 < frames; ++k) {
    r.times.push_back(eta.times[k]);
    r.distance.push_back(dist[k]);
    r.lhs.push_back((dist[k + 1] - dist[k - 1]) / (eta.times[k + 1] - eta.times[k - 1]));
    r.rhs.push_back(rate[k]);
  }
  std::vector<double> gap(r.times.size()), mag(r.times.size());
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    gap[i] = std::abs(r.lhs[i] - r.rhs[i]);
    mag[i] = std::abs(r.rhs[i]);
  }
  r.integrated_gap = trapezoid(r.times, gap);
  r.integrated_rhs = trapezoid(r.times, mag);
  return r;
}

RateBoundReport check_rate_bounds(const KrSolution& solution, const VelocityField& u, double t, double p, double q,
                                  const IntegrabilityModulus& e) {
  const TransportPlan& plan = solution.plan;
  const Grid& grid = plan.density.grid();
  RateBoundReport r;
  r.delta = plan.cost.delta();
  r.radius = plan.cost.radius();
  r.p = p;
  r.q = q;

  std::vector<Vec> uc(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) uc[c] = u.value(t, grid.center(c));

  const DepositedGradient dep = deposit_potential_gradient(plan);
  std::vector<double> cells;
  cells.reserve(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c)
    if (dep.weight[c] > 0.0) cells.push_back(plan.density[c] * dot(uc[c], dep.gradient[c]));
  r.transport_term = std::abs(compensated_sum(cells) * grid.cell_volume());

  std::vector<double> qd, qp;
  for (const auto& entry : plan.entries) {
    if (entry.source == entry.target) continue;
    const double z = grid.cell_distance(entry.source, entry.target);
    const Vec& a = uc[entry.source];
    const Vec& b = uc[entry.target];
    const double du = norm(Vec{a[0] - b[0], a[1] - b[1]});
    qd.push_back(entry.mass * du / (r.delta + z));
    qp.push_back(entry.mass * du / z);
  }
  r.quotient_delta = compensated_sum(qd);
  r.quotient_plain = compensated_sum(qp);

  r.eta_l1 = lq_norm(plan.density, 1.0);
  r.eta_lq = lq_norm(plan.density, q);
  r.eta_linf = lq_norm(plan.density, kInf);
  const bool zero_field = u.family() == FieldFamily::Zero || u.family() == FieldFamily::Constant;
  if (u.is_bv_only()) {
    r.gradient_lp = p > 1.0 ? kInf : sobolev_seminorm(u, 1.0, grid, t);
    r.modulus_integral = kInf;
  } else {
    r.gradient_lp = u.gradient_in_lp(p) ? sobolev_seminorm(u, p, grid, t) : kInf;
    r.modulus_integral = zero_field ? 0.0 : modulus_integral(u, e, grid);
  }
  r.psi = r.delta > 0.0 ? psi_one(e, r.delta) : kInf;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.c_l3 = nan;
  r.c_l5 = nan;
  if (p > 1.0 && std::isfinite(r.gradient_lp)) {
    const double denom = r.eta_lq * r.gradient_lp;
    r.c_l3 = denom > 0.0 ? r.quotient_plain / denom : 0.0;
  }
  if (p == 1.0 && std::isfinite(r.modulus_integral)) {
    const double denom = r.psi * (r.eta_l1 + r.eta_linf * r.modulus_integral);
    r.c_l5 = denom > 0.0 ? r.quotient_delta / denom : 0.0;
  }
  return r;
}

RateBoundReport check_rate_bounds(const SignedDensity& eta, const VelocityField& u, double t, double delta,
                                  double radius, double p, double q, const IntegrabilityModulus& e) {
  const CostSpec cost = CostSpec::bounded_log(delta, radius);
  if (eta.is_zero()) {
    KrSolution empty{TransportPlan{eta, cost, {}}, Potential{GridFunction(eta.grid()), cost, eta}, 0.0, 0.0, 0};
    return check_rate_bounds(empty, u, t, p, q, e);
  }
  return check_rate_bounds(solve_kr(eta, cost), u, t, p, q, e);
}

Prop1Report check_prop1(const StabilityInstance& instance, const EtaTrajectory& eta,
                        const std::vector<double>& deltas, double radius, const IntegrabilityModulus& e) {
  if (deltas.size() < 2) throw std::invalid_argument("check_prop1 needs at least two delta values");
  const VelocityField& u1 = instance.first().velocity;
  const double T = instance.horizon();
  Prop1Report rep;
  rep.radius = radius;
  rep.p = instance.p();
  rep.q = instance.q();
  rep.perturbation = instance.perturbation();
  rep.divergence_norm = divergence_l1_linf(u1, instance.grid(), T);

  for (double delta : deltas) {
    const CostSpec cost = CostSpec::bounded_log(delta, radius);
    Prop1Point pt;
    pt.delta = delta;
    pt.psi = psi_p(instance.p(), e, delta);
    pt.l2_margin = kInf;
    std::vector<double> integrand(eta.eta.size(), 0.0);
    for (std::size_t k = 0; k < eta.eta.size(); ++k) {
      if (eta.eta[k].is_zero()) continue;
      const KrSolution sol = solve_kr(eta.eta[k], cost);
      pt.sup_distance = std::max(pt.sup_distance, sol.dual);
      const RateBoundReport rb = check_rate_bounds(sol, u1, eta.times[k], instance.p(), instance.q(), e);
      integrand[k] = rb.quotient_delta;
      pt.l2_margin = std::min(pt.l2_margin, rb.l2_margin());
    }
    if (std::isinf(pt.l2_margin)) pt.l2_margin = 0.0;
    pt.majorant = trapezoid(eta.times, integrand);
    pt.c1 = pt.majorant / pt.psi;
    rep.points.push_back(pt);
  }

  std::vector<double> c1s, logs, sups, majs;
  for (const auto& pt : rep.points) {
    c1s.push_back(pt.c1);
    logs.push_back(std::log(1.0 / pt.delta));
    sups.push_back(pt.sup_distance);
    majs.push_back(pt.majorant);
  }
  rep.c1 = *std::max_element(c1s.begin(), c1s.end());
  rep.c1_spread = spread_ratio(c1s);

  const double r = rep.perturbation.total();
  for (const auto& pt : rep.points) {
    const double excess = std::max(0.0, pt.sup_distance - rep.c1 * pt.psi);
    rep.residual = std::max(rep.residual, excess);
    if (excess > 0.0) rep.c2 = std::max(rep.c2, r > 0.0 ? pt.delta * excess / r : kInf);
  }
  const double u_norm = field_difference_norm(u1, VelocityField::zero(u1.dimension()), rep.p, instance.grid(), T);
  const double normaliser = std::max(eta.second_norm, u_norm);
  rep.c2_normalized = normaliser > 0.0 ? rep.c2 / normaliser : rep.c2;
  rep.distance_fit = linear_fit(logs, sups);
  rep.majorant_fit = linear_fit(logs, majs);
  return rep;
}

Prop1Report check_prop1(const StabilityInstance& instance, const SolutionTrajectory& first,
                        const SolutionTrajectory& second, const std::vector<double>& deltas, double radius,
                        const IntegrabilityModulus& e) {
  return check_prop1(instance, build_eta(instance, first, second), deltas, radius, e);
}

double lemma4_combine(double distance, double eta_l1, double epsilon, double delta, double radius) {
  if (!(epsilon > 0.0) || !(delta > 0.0) || !(radius > 0.0))
    throw std::domain_error("lemma4_combine needs positive epsilon, delta and R");
  if (distance < 0.0 || eta_l1 < 0.0) throw std::domain_error("lemma4_combine needs nonnegative D and ||eta||_1");
  double first = 0.0;
  if (eta_l1 > 0.0) {
    const double log_first = std::log(delta) + distance / epsilon + std::log(eta_l1);
    first = log_first > std::log(std::numeric_limits<double>::max()) ? kInf : std::exp(log_first);
  }
  return first + epsilon * radius + radius * distance / std::log(radius / delta + 1.0);
}

Lemma4Check lemma4_check(const SignedDensity& eta, double epsilon, double delta, double radius) {
  Lemma4Check c;
  if (!eta.is_zero()) {
    c.log_distance = kr_distance(eta, CostSpec::bounded_log(delta, radius));
    c.direct = kr_distance(eta, CostSpec::truncated_linear(radius));
  }
  c.bound = lemma4_combine(c.log_distance, lq_norm(eta, 1.0), epsilon, delta, radius);
  return c;
}

UniquenessReport uniqueness_drive(const EtaTrajectory& eta, const std::vector<double>& deltas, double radius) {
  if (deltas.empty()) throw std::invalid_argument("uniqueness_drive needs a delta sweep");
  std::vector<double> sweep = deltas;
  std::sort(sweep.begin(), sweep.end(), std::greater<>());
  if (!(sweep.back() > 0.0) || !(sweep.front() < 1.0)) throw std::domain_error("uniqueness_drive needs 0 < delta < 1");

  double l1 = 0.0;
  for (const auto& f : eta.eta) l1 = std::max(l1, lq_norm(f, 1.0));

  UniquenessReport rep;
  rep.radius = radius;
  for (double delta : sweep) {
    UniquenessPoint pt;
    pt.delta = delta;
    pt.epsilon = 1.0 / std::sqrt(std::abs(std::log(delta)));
    for (double d : track_kr(eta, delta, radius)) pt.distance = std::max(pt.distance, d);
    if (l1 == 0.0) {
      pt.bound = 0.0;
    } else {
      pt.bound = lemma4_combine(pt.distance, l1, pt.epsilon, delta, radius);
    }
    pt.w_bound = pt.bound / std::min(radius, 1.0);
    rep.points.push_back(pt);
  }
  rep.monotone_decrease = true;
  for (std::size_t i = 1; i < rep.points.size(); ++i)
    if (rep.points[i].bound > rep.points[i - 1].bound * (1.0 + 1e-12)) rep.monotone_decrease = false;
  const double last = rep.points.back().bound;
  rep.decrease_factor = last > 0.0 ? rep.points.front().bound / last : (rep.points.front().bound > 0.0 ? kInf : 1.0);
  return rep;
}

StabilityReport stability_rate(const std::vector<double>& r_values, const std::vector<EtaTrajectory>& etas) {
  if (r_values.size() != etas.size() || r_values.empty())
    throw std::invalid_argument("stability_rate: one eta trajectory per r value");
  StabilityReport rep;
  rep.schedule_dominates = true;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    const double r = r_values[i];
    if (!(r >= 0.0) || !(r < 1.0)) throw std::domain_error("stability_rate needs 0 <= r < 1");
    StabilityPoint pt;
    pt.r = r;
    if (r == 0.0) {
      for (const auto& frame : etas[i].eta)
        if (!frame.is_zero()) pt.sup_norm = std::max(pt.sup_norm, w_neg11_norm(frame));
      if (pt.sup_norm > 0.0) rep.schedule_dominates = false;
      rep.points.push_back(pt);
      continue;
    }
    double l1 = 0.0, d_log = 0.0;
    const CostSpec cost = CostSpec::bounded_log(r, 1.0);
    for (const auto& frame : etas[i].eta) {
      if (frame.is_zero()) continue;
      pt.sup_norm = std::max(pt.sup_norm, w_neg11_norm(frame));
      l1 = std::max(l1, lq_norm(frame, 1.0));
      d_log = std::max(d_log, kr_distance(frame, cost));
    }
    const double lr = std::abs(std::log(r));
    pt.c = pt.sup_norm * lr;
    pt.sqrt_r = std::sqrt(r);
    pt.inv_log = 1.0 / lr;
    pt.inv_log1 = 1.0 / std::log(1.0 / r + 1.0);
    pt.schedule_sum = pt.sqrt_r + pt.inv_log + pt.inv_log1;
    const double eps = 1.0 / std::abs(std::log(std::sqrt(r)));
    pt.lemma4_exp_term = l1 > 0.0 ? lemma4_combine(d_log, l1, eps, r, 1.0) - eps - d_log / std::log(1.0 / r + 1.0) : 0.0;
    pt.lemma4_eps_term = eps;
    pt.lemma4_tail_term = d_log / std::log(1.0 / r + 1.0);
    if (pt.sup_norm > pt.schedule_sum) rep.schedule_dominates = false;
    sxy += pt.sup_norm * pt.inv_log;
    sxx += pt.inv_log * pt.inv_log;
    syy += pt.sup_norm * pt.sup_norm;
    rep.points.push_back(pt);
  }
  rep.c_fit = sxx > 0.0 ? sxy / sxx : 0.0;
  double res = 0.0;
  for (const auto& pt : rep.points) res += std::pow(pt.sup_norm - rep.c_fit * pt.inv_log, 2);
  rep.fit_residual = syy > 0.0 ? std::sqrt(res / syy) : 0.0;

  const auto largest = std::max_element(rep.points.begin(), rep.points.end(),
                                        [](const auto& a, const auto& b) { return a.r < b.r; });
  for (const auto& pt : rep.points) rep.c_max = std::max(rep.c_max, pt.c);
  rep.growth = largest->c > 0.0 ? rep.c_max / largest->c : (rep.c_max > 0.0 ? kInf : 1.0);
  return rep;
}

SignedDensity oscillatory_deviation(int k, double horizon, const Grid& grid) {
  if (grid.dimension() != 1) throw std::invalid_argument("oscillatory example is one dimensional");
  const double two_pi = 2.0 * std::numbers::pi;
  if (std::abs(grid.length() - two_pi) > 1e-12) throw std::invalid_argument("oscillatory example needs the 2 pi circle");
  const int n = grid.cells_per_axis();
  const double h = grid.spacing();
  std::vector<double> pre(n + 1);
  for (int i = 0; i <= n; ++i) pre[i] = exact_flow_oscillatory(k, -horizon, i * h);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    double w = std::fmod(pre[i + 1] - pre[i], two_pi);
    if (w < 0.0) w += two_pi;
    v[i] = w / h - 1.0;
  }
  return SignedDensity(grid, std::move(v));
}

WeakNotStrongReport weak_not_strong(const std::vector<int>& ks, double horizon, int cells) {
  if (ks.empty()) throw std::invalid_argument("weak_not_strong needs wavenumbers");
  if (horizon < 0.0) throw std::domain_error("weak_not_strong needs T >= 0");
  const double two_pi = 2.0 * std::numbers::pi;
  const Grid grid(1, cells, two_pi);
  WeakNotStrongReport rep;
  rep.horizon = horizon;
  rep.cells = cells;
  double lo = kInf, hi = 0.0;
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("wavenumbers must be >= 1");
    OscillationPoint pt;
    pt.k = k;
    if (horizon > 0.0) {
      auto f = [&](double x) { return std::abs(exact_jacobian_oscillatory(k, -horizon, x) - 1.0); };
      // |J - 1| has kinks where sin^2(k x / 2) = 1 / (e^{-T} + 1).
      const double kink = 2.0 * std::asin(1.0 / std::sqrt(std::exp(-horizon) + 1.0)) / k;
      const double width = two_pi / k;
      std::vector<double> parts;
      for (int m = 0; m < k; ++m) {
        const double a = m * width;
        const double cuts[4] = {a, a + kink, a + width - kink, a + width};
        for (int s = 0; s < 3; ++s)
          parts.push_back(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[s], cuts[s + 1], 15,
                                                                                       1e-14));
      }
      pt.l1 = compensated_sum(parts);
      pt.w_norm = w_neg11_norm(oscillatory_deviation(k, horizon, grid));
    }
    lo = std::min(lo, pt.l1);
    hi = std::max(hi, pt.l1);
    rep.c_fit = std::max(rep.c_fit, k * pt.w_norm);
    rep.points.push_back(pt);
  }
  rep.l1_spread = hi - lo;
  const double last = rep.points.back().w_norm;
  rep.w_decay = last > 0.0 ? rep.points.front().w_norm / last : 1.0;
  return rep;
}

}  // namespace krlab
