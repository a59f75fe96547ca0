#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "krlab/pde.hpp"

namespace krlab {

namespace {

namespace odeint = boost::numeric::odeint;

using State = std::array<double, 4>;  // x, y, log det, source integral

// Positions (and optionally source integrals) of one particle at each time.
struct Track {
  std::vector<Point> position;
  std::vector<double> source;
};

Track integrate_particle(const CauchyData& data, int dim, const Point& start, const std::vector<double>& times,
                         bool with_source, double tol, std::size_t which) {
  Track track;
  track.position.reserve(times.size());
  track.source.reserve(times.size());
  const VelocityField& u = data.velocity;

  if (u.has_exact_flow()) {
    for (double t : times) {
      track.position.push_back(u.exact_flow(t, start));
      if (!with_source) {
        track.source.push_back(0.0);
        continue;
      }
      auto integrand = [&](double s) { return data.source.value(s, u.exact_flow(s, start)) * u.exact_jacobian(s, start); };
      track.source.push_back(t == 0.0 ? 0.0
                                      : boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, t, 15,
                                                                                                       1e-12));
    }
    return track;
  }

  auto rhs = [&](const State& s, State& ds, double t) {
    const Point x{s[0], dim == 2 ? s[1] : 0.0};
    const Vec v = u.value(t, x);
    ds[0] = v[0];
    ds[1] = dim == 2 ? v[1] : 0.0;
    if (with_source) {
      ds[2] = u.divergence(t, x);
      ds[3] = data.source.value(t, x) * std::exp(s[2]);
    } else {
      ds[2] = 0.0;
      ds[3] = 0.0;
    }
  };
  State state{start[0], start[1], 0.0, 0.0};
  auto observer = [&](const State& s, double) {
    track.position.push_back({s[0], dim == 2 ? s[1] : 0.0});
    track.source.push_back(s[3]);
  };
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  try {
    const double dt0 = times.size() > 1 ? (times[1] - times[0]) / 8 : 1e-3;
    odeint::integrate_times(stepper, rhs, state, times.begin(), times.end(), dt0, observer,
                            odeint::max_step_checker(100000));
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "flow integration failed for trajectory " << which << " starting at (" << start[0] << ", " << start[1]
        << "): " << e.what();
    throw std::runtime_error(msg.str());
  }
  for (const auto& p : track.position)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
      std::ostringstream msg;
      msg << "flow integration produced a non-finite position for trajectory " << which;
      throw std::runtime_error(msg.str());
    }
  return track;
}

void deposit_interval(std::vector<double>& mass, const Grid& g, double a, double b, double m) {
  const double h = g.spacing();
  const int n = g.cells_per_axis();
  auto wrap = [n](long k) { return static_cast<std::size_t>(((k % n) + n) % n); };
  if (!(b > a)) {
    mass[wrap(static_cast<long>(std::floor(a / h)))] += m;
    return;
  }
  const double len = b - a;
  const long k0 = static_cast<long>(std::floor(a / h));
  const long k1 = static_cast<long>(std::floor(b / h));
  if (k0 == k1) {
    mass[wrap(k0)] += m;
    return;
  }
  for (long k = k0; k <= k1; ++k) {
    const double lo = std::max(a, k * h), hi = std::min(b, (k + 1) * h);
    if (hi > lo) mass[wrap(k)] += m * (hi - lo) / len;
  }
}

using Polygon = std::vector<Point>;

// Sutherland-Hodgman against one half-plane.
Polygon clip(const Polygon& poly, int axis, double bound, bool keep_above) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  auto inside = [&](const Point& p) { return keep_above ? p[axis] >= bound : p[axis] <= bound; };
  for (std::size_t i = 0; i < n; ++i) {
    const Point& cur = poly[i];
    const Point& prev = poly[(i + n - 1) % n];
    const bool ci = inside(cur), pi = inside(prev);
    if (ci != pi) {
      const double s = (bound - prev[axis]) / (cur[axis] - prev[axis]);
      Point x{prev[0] + s * (cur[0] - prev[0]), prev[1] + s * (cur[1] - prev[1])};
      x[axis] = bound;
      out.push_back(x);
    }
    if (ci) out.push_back(cur);
  }
  return out;
}

double polygon_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& u = p[i];
    const Point& v = p[(i + 1) % p.size()];
    a += u[0] * v[1] - v[0] * u[1];
  }
  return 0.5 * std::abs(a);
}

void deposit_quad(std::vector<double>& mass, const Grid& g, const Polygon& quad, double m,
                  std::vector<std::pair<std::size_t, double>>& scratch) {
  const double h = g.spacing();
  double xmin = quad[0][0], xmax = xmin, ymin = quad[0][1], ymax = ymin;
  for (const auto& p : quad) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const long i0 = static_cast<long>(std::floor(xmin / h)), i1 = static_cast<long>(std::floor(xmax / h));
  const long j0 = static_cast<long>(std::floor(ymin / h)), j1 = static_cast<long>(std::floor(ymax / h));
  scratch.clear();
  double total = 0.0;
  for (long j = j0; j <= j1; ++j)
    for (long i = i0; i <= i1; ++i) {
      Polygon p = clip(quad, 0, i * h, true);
      p = clip(p, 0, (i + 1) * h, false);
      p = clip(p, 1, j * h, true);
      p = clip(p, 1, (j + 1) * h, false);
      const double a = polygon_area(p);
      if (a > 0.0) {
        scratch.push_back({g.index(static_cast<int>(i % g.cells_per_axis()), static_cast<int>(j % g.cells_per_axis())), a});
        total += a;
      }
    }
  if (total <= 0.0) {
    mass[g.index(static_cast<int>(i0 % g.cells_per_axis()), static_cast<int>(j0 % g.cells_per_axis()))] += m;
    return;
  }
  for (const auto& [c, a] : scratch) mass[c] += m * a / total;
}

}  // namespace

SolutionTrajectory lagrangian_solve(const CauchyData& data, const Grid& grid, const std::vector<double>& times,
                                    const LagrangianOptions& options) {
  const VelocityField& u = data.velocity;
  if (u.is_bv_only()) throw std::invalid_argument("the Lagrangian solver refuses the discontinuous E1 step field");
  if (u.dimension() != grid.dimension()) throw std::invalid_argument("field and grid dimensions differ");
  if (!(data.initial.grid() == grid)) throw std::invalid_argument("initial datum lives on a different grid");
  if (times.empty() || times.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("time grid must be increasing");

  const int n = grid.cells_per_axis();
  const int dim = grid.dimension();
  const double h = grid.spacing();
  const double L = grid.length();
  const bool with_source = !data.source.is_zero();
  const std::size_t F = times.size();

  SolutionTrajectory traj{"lagrangian", grid, times, {}, std::vector<double>(F, 0.0), 0.0, options.ode_tolerance, 0};

  // edge/corner trajectories, and centre trajectories for the source
  std::vector<Track> nodes;
  std::vector<Track> centres;
  std::size_t id = 0;
  if (dim == 1) {
    nodes.reserve(n);
    for (int e = 0; e < n; ++e) nodes.push_back(integrate_particle(data, 1, {e * h, 0.0}, times, false, options.ode_tolerance, id++));
  } else {
    nodes.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        nodes.push_back(integrate_particle(data, 2, {i * h, j * h}, times, false, options.ode_tolerance, id++));
  }
  if (with_source) {
    centres.reserve(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c)
      centres.push_back(integrate_particle(data, dim, grid.center(c), times, true, options.ode_tolerance, id++));
  }

  const double hd = grid.cell_volume();
  std::vector<std::pair<std::size_t, double>> scratch;
  for (std::size_t f = 0; f < F; ++f) {
    std::vector<double> mass(grid.size(), 0.0);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const double m = (data.initial[c] + (with_source ? centres[c].source[f] : 0.0)) * hd;
      if (dim == 1) {
        const double a = nodes[c].position[f][0];
        // the edge after the last cell is the first edge shifted by a period
        const double b = c + 1 < static_cast<std::size_t>(n) ? nodes[c + 1].position[f][0] : nodes[0].position[f][0] + L;
        deposit_interval(mass, grid, a, b, m);
      } else {
        const auto [i, j] = grid.coords(c);
        auto corner = [&](int a, int b) {
          const Point p = nodes[static_cast<std::size_t>(b % n) * n + (a % n)].position[f];
          return Point{p[0] + (a >= n ? L : 0.0), p[1] + (b >= n ? L : 0.0)};
        };
        const Polygon quad{corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)};
        deposit_quad(mass, grid, quad, m, scratch);
      }
    }
    for (double& v : mass) v /= hd;
    traj.frames.emplace_back(grid, std::move(mass));
  }
  traj.steps = F - 1;
  return traj;
}

}  // namespace krlab
