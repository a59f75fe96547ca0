#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "krlab/density.hpp"
#include "krlab/fields.hpp"

namespace krlab {

/// d/dt rho + div(u rho) = f on (0, T) with rho(0) = initial.
struct CauchyData {
  VelocityField velocity;
  ScalarSource source;
  SignedDensity initial;
  double horizon;
};

/// Density snapshots on a shared time grid.
struct SolutionTrajectory {
  std::string scheme;
  Grid grid;
  std::vector<double> times;
  std::vector<SignedDensity> frames;
  /// Source mass added up to each frame (Eulerian only; zeros otherwise).
  std::vector<double> injected_mass;
  double cfl = 0.0;
  double ode_tolerance = 0.0;
  std::size_t steps = 0;

  const SignedDensity& final_frame() const { return frames.back(); }
  /// JSON with time stamps, scheme, grid and solver settings.
  std::string manifest_json() const;
  /// Writes frame_<k>.csv and manifest.json into `dir`.
  void write(const std::filesystem::path& dir) const;
};

/// t_k = k T / frames, k = 0..frames.
std::vector<double> uniform_times(double horizon, int frames);

struct LagrangianOptions {
  double ode_tolerance = 1e-10;
};

/// Characteristics solver: moves cell edges (1D) or corners (2D) along the
/// flow, integrates the source along centre trajectories with the Liouville
/// Jacobian, and remaps the mass of each moved cell conservatively onto the
/// grid. Closed-form flows are used when the field provides one.
SolutionTrajectory lagrangian_solve(const CauchyData& data, const Grid& grid, const std::vector<double>& times,
                                    const LagrangianOptions& options = {});

struct EulerianOptions {
  double cfl = 0.5;
  int max_frames = 64;
};

/// First-order upwind finite volumes with face velocities at the step
/// midpoint. The step is cfl h / (largest total outflow speed of a cell),
/// which keeps the update a convex combination. Frames are uniform in time
/// with min(max_frames, steps) intervals.
SolutionTrajectory eulerian_solve(const CauchyData& data, const Grid& grid, const EulerianOptions& options = {});

struct AprioriReport {
  double q;
  /// sup_t ||rho(t)||_q
  double lhs;
  /// exp((1 - 1/q) ||div u||_{L1 Linf}) (||rho_0||_q + ||f||_{L1 Lq})
  double rhs;
  double divergence_norm;
  double initial_norm;
  double source_norm;

  bool holds(double relative_slack) const { return lhs <= rhs * (1.0 + relative_slack); }
};

AprioriReport apriori_lq_check(const SolutionTrajectory& traj, const CauchyData& data, double q);

/// Space-time test function zeta with its derivatives.
struct TestFunction {
  std::function<double(double, const Point&)> value;
  std::function<double(double, const Point&)> dt;
  std::function<Vec(double, const Point&)> gradient;
};

/// int int rho (d_t zeta + u . grad zeta) + f zeta dx dt + int rho_0 zeta(0) dx
/// - int rho(T) zeta(T) dx, trapezoid in time over the stored frames.
double weak_form_residual(const SolutionTrajectory& traj, const CauchyData& data, const TestFunction& zeta);

}  // namespace krlab
