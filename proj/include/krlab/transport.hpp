#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "krlab/cost.hpp"
#include "krlab/density.hpp"

namespace krlab {

struct PlanEntry {
  std::size_t source;
  std::size_t target;
  double mass;
};

/// Coupling of eta_+ and eta_- as sparse (source cell, target cell, mass).
struct TransportPlan {
  SignedDensity density;
  CostSpec cost;
  std::vector<PlanEntry> entries;

  /// Sum of mass * c(dist).
  double value() const;
};

/// Kantorovich-Rubinstein potential on every grid cell.
struct Potential {
  GridFunction values;
  CostSpec cost;
  SignedDensity density;

  /// Sum of phi_i eta_i h^d.
  double value() const;
};

struct TransportOptions {
  /// Relative imbalance |m+ - m-| / (m+ + m-) accepted and rescaled away.
  double balance_tolerance = 1e-10;
};

struct KrSolution {
  TransportPlan plan;
  Potential potential;
  double primal = 0.0;
  double dual = 0.0;
  std::size_t pivots = 0;
};

/// Exact optimal transport between the Jordan parts of `eta` for the metric
/// c(periodic distance), by network simplex on the bipartite support graph.
KrSolution solve_kr(const SignedDensity& eta, const CostSpec& cost,
                    const TransportOptions& options = {});

struct PrimalResult {
  TransportPlan plan;
  double value;
};
struct DualResult {
  Potential potential;
  double value;
};

PrimalResult solve_primal(const SignedDensity& eta, const CostSpec& cost,
                          const TransportOptions& options = {});
DualResult solve_dual(const SignedDensity& eta, const CostSpec& cost,
                      const TransportOptions& options = {});

/// Primal value of `plan` minus dual value of `potential`.
double duality_gap(const TransportPlan& plan, const Potential& potential);

double kr_distance(const SignedDensity& eta, const CostSpec& cost,
                   const TransportOptions& options = {});

/// Extends dual values given on the target atoms to every cell by
/// phi(x) = min_j (beta_j + c(|x - y_j|)), then shifts so max + min = 0.
GridFunction c_transform_extend(const Grid& grid, const CostSpec& cost,
                                const std::vector<std::size_t>& targets,
                                const std::vector<double>& beta);

struct WNormSolution {
  double value;
  /// Maximising test function: |phi| <= 1, neighbour differences <= h.
  GridFunction test_function;
};

/// sup { sum phi eta h^d : |phi| <= 1, |phi_i - phi_j| <= h on axis neighbours },
/// solved as the dual of a min-cost flow on the grid graph plus a ground node.
WNormSolution w_neg11_solve(const SignedDensity& eta);
double w_neg11_norm(const SignedDensity& eta);

struct GradientSample {
  std::size_t source;
  std::size_t target;
  double mass;
  /// c'(|x - y|) (x - y) / |x - y| with the periodic displacement.
  Vec gradient;
};

/// Gradient of the potential on the plan support; zero-length entries are
/// skipped.
std::vector<GradientSample> potential_gradient_on_support(const TransportPlan& plan);

/// Per-cell mass-weighted average of the support gradients, deposited at
/// both endpoints of each entry. `weight[i]` is the plan mass touching i.
struct DepositedGradient {
  std::vector<Vec> gradient;
  std::vector<double> weight;
};
DepositedGradient deposit_potential_gradient(const TransportPlan& plan);

/// CSV rows `source,target,mass`.
void write_plan_csv(std::ostream& out, const TransportPlan& plan);
/// CSV rows `index,phi`.
void write_potential_csv(std::ostream& out, const Potential& potential);

}  // namespace krlab
