#include "krlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "krlab/network_simplex.hpp"

namespace krlab {

namespace {

// c(periodic distance) indexed by the per-axis minimal-image offsets.
class CostTable {
 public:
  CostTable(const Grid& grid, const CostSpec& cost) : grid_(grid), half_(grid.cells_per_axis() / 2) {
    const double h = grid.spacing();
    const int m = half_ + 1;
    const int rows = grid.dimension() == 1 ? 1 : m;
    table_.resize(static_cast<std::size_t>(m) * rows);
    for (int b = 0; b < rows; ++b)
      for (int a = 0; a < m; ++a) table_[b * m + a] = cost.value(std::hypot(a * h, b * h));
  }

  double operator()(std::size_t p, std::size_t q) const noexcept {
    const auto cp = grid_.coords(p);
    const auto cq = grid_.coords(q);
    const int n = grid_.cells_per_axis();
    auto axis = [n](int u, int v) {
      const int k = std::abs(u - v);
      return std::min(k, n - k);
    };
    const int a = axis(cp[0], cq[0]);
    const int b = grid_.dimension() == 1 ? 0 : axis(cp[1], cq[1]);
    return table_[b * (half_ + 1) + a];
  }

 private:
  Grid grid_;
  int half_;
  std::vector<double> table_;
};

bool same_instance(const SignedDensity& a, const SignedDensity& b) {
  if (!(a.grid() == b.grid())) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

double TransportPlan::value() const {
  const Grid& g = density.grid();
  std::vector<double> terms;
  terms.reserve(entries.size());
  for (const auto& e : entries) terms.push_back(e.mass * cost.value(g.cell_distance(e.source, e.target)));
  return compensated_sum(terms);
}

double Potential::value() const {
  std::vector<double> terms(density.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = values[i] * density[i];
  return compensated_sum(terms) * density.grid().cell_volume();
}

GridFunction c_transform_extend(const Grid& grid, const CostSpec& cost,
                                const std::vector<std::size_t>& targets,
                                const std::vector<double>& beta) {
  if (targets.size() != beta.size()) throw std::invalid_argument("targets and beta differ in length");
  if (targets.empty()) return GridFunction(grid);
  const CostTable table(grid, cost);
  std::vector<double> phi(grid.size());
  for (std::size_t x = 0; x < grid.size(); ++x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < targets.size(); ++k) best = std::min(best, beta[k] + table(x, targets[k]));
    phi[x] = best;
  }
  const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  const double shift = 0.5 * (*lo + *hi);
  for (double& v : phi) v -= shift;
  return GridFunction(grid, std::move(phi));
}

KrSolution solve_kr(const SignedDensity& eta, const CostSpec& cost, const TransportOptions& options) {
  const Grid& grid = eta.grid();
  const double hd = grid.cell_volume();
  std::vector<std::size_t> sources, targets;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] > 0.0) {
      sources.push_back(i);
      a.push_back(eta[i] * hd);
    } else if (eta[i] < 0.0) {
      targets.push_back(i);
      b.push_back(-eta[i] * hd);
    }
  }
  const double ma = compensated_sum(a);
  const double mb = compensated_sum(b);

  KrSolution sol{TransportPlan{eta, cost, {}}, Potential{GridFunction(grid), cost, eta}, 0.0, 0.0, 0};
  if (ma == 0.0 && mb == 0.0) return sol;
  if (ma == 0.0 || mb == 0.0 || std::abs(ma - mb) > options.balance_tolerance * (ma + mb))
    throw std::invalid_argument("unbalanced marginals: positive mass " + std::to_string(ma) +
                                ", negative mass " + std::to_string(mb) +
                                "; project to mean zero first");
  const double rescale = ma / mb;
  for (double& v : b) v *= rescale;

  const int S = static_cast<int>(sources.size());
  const int T = static_cast<int>(targets.size());
  const CostTable table(grid, cost);
  NetworkSimplex ns(S + T);
  ns.reserve_arcs(static_cast<std::size_t>(S) * T);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < T; ++j) ns.add_arc(i, S + j, table(sources[i], targets[j]));
  for (int i = 0; i < S; ++i) ns.set_supply(i, a[i]);
  for (int j = 0; j < T; ++j) ns.set_supply(S + j, -b[j]);

  if (ns.run() != NetworkSimplex::Status::Optimal)
    throw std::runtime_error("transport solver did not reach optimality");
  sol.pivots = ns.pivots();

  std::vector<double> terms;
  for (int e = 0; e < ns.arc_count(); ++e) {
    const double f = ns.flow(e);
    if (f > 0.0) {
      const int i = ns.source(e);
      const int j = ns.target(e) - S;
      sol.plan.entries.push_back({sources[i], targets[j], f});
      terms.push_back(f * ns.cost(e));
    }
  }
  sol.primal = compensated_sum(terms);

  std::vector<double> beta(T);
  for (int j = 0; j < T; ++j) beta[j] = -ns.potential(S + j);
  sol.potential.values = c_transform_extend(grid, cost, targets, beta);
  sol.dual = sol.potential.value();
  return sol;
}

PrimalResult solve_primal(const SignedDensity& eta, const CostSpec& cost, const TransportOptions& options) {
  auto sol = solve_kr(eta, cost, options);
  return {std::move(sol.plan), sol.primal};
}

DualResult solve_dual(const SignedDensity& eta, const CostSpec& cost, const TransportOptions& options) {
  auto sol = solve_kr(eta, cost, options);
  return {std::move(sol.potential), sol.dual};
}

double duality_gap(const TransportPlan& plan, const Potential& potential) {
  if (!(plan.cost == potential.cost) || !same_instance(plan.density, potential.density))
    throw std::invalid_argument("plan and potential belong to different instances");
  const double gap = plan.value() - potential.value();
  return std::max(gap, 0.0);
}

double kr_distance(const SignedDensity& eta, const CostSpec& cost, const TransportOptions& options) {
  return solve_primal(eta, cost, options).value;
}

WNormSolution w_neg11_solve(const SignedDensity& eta) {
  const Grid& grid = eta.grid();
  const int N = static_cast<int>(grid.size());
  const double h = grid.spacing();
  const double hd = grid.cell_volume();
  if (eta.is_zero()) return {0.0, GridFunction(grid)};

  const int ground = N;
  NetworkSimplex ns(N + 1);
  ns.reserve_arcs(static_cast<std::size_t>(N) * (2 * grid.dimension() + 2));
  for (int c = 0; c < N; ++c) {
    const auto [i, j] = grid.coords(c);
    ns.add_arc(c, static_cast<int>(grid.index(i + 1, j)), h);
    ns.add_arc(c, static_cast<int>(grid.index(i - 1, j)), h);
    if (grid.dimension() == 2) {
      ns.add_arc(c, static_cast<int>(grid.index(i, j + 1)), h);
      ns.add_arc(c, static_cast<int>(grid.index(i, j - 1)), h);
    }
    ns.add_arc(c, ground, 1.0);
    ns.add_arc(ground, c, 1.0);
  }
  std::vector<double> supply(N);
  for (int c = 0; c < N; ++c) supply[c] = eta[c] * hd;
  const double total = compensated_sum(supply);
  if (std::abs(total) > 1e-10 * lq_norm(eta, 1.0))
    throw std::invalid_argument("W^{-1,1} norm needs a mean-zero density");
  for (int c = 0; c < N; ++c) ns.set_supply(c, supply[c]);
  ns.set_supply(ground, -total);
  if (ns.run() != NetworkSimplex::Status::Optimal)
    throw std::runtime_error("W^{-1,1} flow solver did not reach optimality");

  std::vector<double> phi(N);
  const double pg = ns.potential(ground);
  for (int c = 0; c < N; ++c) phi[c] = std::clamp(pg - ns.potential(c), -1.0, 1.0);
  GridFunction test(grid, std::move(phi));
  std::vector<double> terms(N);
  for (int c = 0; c < N; ++c) terms[c] = test[c] * eta[c];
  return {compensated_sum(terms) * hd, std::move(test)};
}

double w_neg11_norm(const SignedDensity& eta) { return w_neg11_solve(eta).value; }

std::vector<GradientSample> potential_gradient_on_support(const TransportPlan& plan) {
  const Grid& g = plan.density.grid();
  std::vector<GradientSample> out;
  out.reserve(plan.entries.size());
  for (const auto& e : plan.entries) {
    const Vec d = g.displacement(g.center(e.target), g.center(e.source));
    const double z = norm(d);
    if (z == 0.0) continue;
    const double s = plan.cost.derivative(z) / z;
    out.push_back({e.source, e.target, e.mass, Vec{s * d[0], s * d[1]}});
  }
  return out;
}

DepositedGradient deposit_potential_gradient(const TransportPlan& plan) {
  const std::size_t N = plan.density.size();
  DepositedGradient dep{std::vector<Vec>(N, Vec{0.0, 0.0}), std::vector<double>(N, 0.0)};
  for (const auto& s : potential_gradient_on_support(plan)) {
    for (std::size_t c : {s.source, s.target}) {
      dep.gradient[c][0] += s.mass * s.gradient[0];
      dep.gradient[c][1] += s.mass * s.gradient[1];
      dep.weight[c] += s.mass;
    }
  }
  for (std::size_t c = 0; c < N; ++c) {
    if (dep.weight[c] > 0.0) {
      dep.gradient[c][0] /= dep.weight[c];
      dep.gradient[c][1] /= dep.weight[c];
    }
  }
  return dep;
}

void write_plan_csv(std::ostream& out, const TransportPlan& plan) {
  out << "source,target,mass\n" << std::setprecision(17);
  for (const auto& e : plan.entries) out << e.source << ',' << e.target << ',' << e.mass << '\n';
}

void write_potential_csv(std::ostream& out, const Potential& potential) {
  out << "index,phi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < potential.values.size(); ++i) out << i << ',' << potential.values[i] << '\n';
}

}  // namespace krlab
