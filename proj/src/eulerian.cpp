#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "krlab/pde.hpp"

namespace krlab {

namespace {

// Normal velocities on the low face of every cell: face[axis][c] sits at
// x_c - h/2 e_axis.
struct Faces {
  std::vector<double> axis[2];
};

void sample_faces(const VelocityField& u, const Grid& g, double t, Faces& faces) {
  const double h = g.spacing();
  for (int a = 0; a < g.dimension(); ++a) faces.axis[a].resize(g.size());
  for (std::size_t c = 0; c < g.size(); ++c) {
    const Point x = g.center(c);
    for (int a = 0; a < g.dimension(); ++a) {
      Point f = x;
      f[a] -= 0.5 * h;
      const double v = u.value(t, f)[a];
      if (!std::isfinite(v)) throw std::domain_error("velocity field is not finite at a cell face");
      faces.axis[a][c] = v;
    }
  }
}

// Largest per-cell total outflow (or inflow, for fields that change sign in
// time) speed.
double max_exchange_rate(const Faces& faces, const Grid& g, bool both_directions) {
  double rate = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto [i, j] = g.coords(c);
    double out = 0.0, in = 0.0;
    for (int a = 0; a < g.dimension(); ++a) {
      const double lo = faces.axis[a][c];
      const double hi = faces.axis[a][a == 0 ? g.index(i + 1, j) : g.index(i, j + 1)];
      out += std::max(hi, 0.0) + std::max(-lo, 0.0);
      in += std::max(-hi, 0.0) + std::max(lo, 0.0);
    }
    rate = std::max(rate, both_directions ? std::max(out, in) : out);
  }
  return rate;
}

}  // namespace

SolutionTrajectory eulerian_solve(const CauchyData& data, const Grid& grid, const EulerianOptions& options) {
  const VelocityField& u = data.velocity;
  if (u.is_bv_only()) throw std::invalid_argument("the Eulerian solver refuses the discontinuous E1 step field");
  if (u.dimension() != grid.dimension()) throw std::invalid_argument("field and grid dimensions differ");
  if (!(data.initial.grid() == grid)) throw std::invalid_argument("initial datum lives on a different grid");
  if (!(options.cfl > 0.0 && options.cfl < 1.0)) throw std::invalid_argument("cfl must lie in (0, 1)");
  if (!(data.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (options.max_frames < 1) throw std::invalid_argument("max_frames must be >= 1");

  const double T = data.horizon;
  const double h = grid.spacing();
  const double hd = grid.cell_volume();
  const std::size_t N = grid.size();
  const bool stationary = !u.time_dependent();

  Faces faces;
  sample_faces(u, grid, 0.0, faces);
  const double rate = max_exchange_rate(faces, grid, !stationary);

  long steps = 1;
  if (rate > 0.0) steps = static_cast<long>(std::ceil(T * rate / (options.cfl * h)));
  const long frames = std::min<long>(options.max_frames, steps);
  const long sub = (steps + frames - 1) / frames;
  steps = sub * frames;
  const double dt = T / steps;

  SolutionTrajectory traj{"eulerian", grid, {}, {}, {}, options.cfl, 0.0, static_cast<std::size_t>(steps)};
  traj.times.reserve(frames + 1);
  traj.frames.reserve(frames + 1);

  std::vector<double> rho(data.initial.values().begin(), data.initial.values().end());
  std::vector<double> next(N);
  std::vector<double> src(N, 0.0);
  const bool with_source = !data.source.is_zero();
  double injected = 0.0;
  traj.times.push_back(0.0);
  traj.frames.push_back(data.initial);
  traj.injected_mass.push_back(0.0);

  const double lambda = dt / h;
  for (long s = 0; s < steps; ++s) {
    const double tm = (s + 0.5) * dt;
    if (!stationary) sample_faces(u, grid, tm, faces);
    std::copy(rho.begin(), rho.end(), next.begin());
    for (int a = 0; a < grid.dimension(); ++a) {
      const auto& fa = faces.axis[a];
      for (std::size_t c = 0; c < N; ++c) {
        // flux through the low face of c, from its low neighbour
        const auto [i, j] = grid.coords(c);
        const std::size_t low = a == 0 ? grid.index(i - 1, j) : grid.index(i, j - 1);
        const double v = fa[c];
        const double flux = v > 0.0 ? v * rho[low] : v * rho[c];
        next[low] -= lambda * flux;
        next[c] += lambda * flux;
      }
    }
    if (with_source) {
      for (std::size_t c = 0; c < N; ++c) src[c] = dt * data.source.value(tm, grid.center(c));
      for (std::size_t c = 0; c < N; ++c) next[c] += src[c];
      injected += compensated_sum(src) * hd;
    }
    rho.swap(next);
    if ((s + 1) % sub == 0) {
      for (double v : rho)
        if (!std::isfinite(v)) throw std::runtime_error("Eulerian solution became non-finite");
      traj.times.push_back(T * static_cast<double>((s + 1) / sub) / frames);
      traj.frames.emplace_back(grid, rho);
      traj.injected_mass.push_back(injected);
    }
  }
  return traj;
}

}  // namespace krlab
