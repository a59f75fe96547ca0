#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "krlab/pde.hpp"

namespace krlab {

std::vector<double> uniform_times(double horizon, int frames) {
  if (!(horizon > 0.0) || frames < 1) throw std::invalid_argument("uniform_times needs horizon > 0 and frames >= 1");
  std::vector<double> t(frames + 1);
  for (int k = 0; k <= frames; ++k) t[k] = horizon * k / frames;
  return t;
}

std::string SolutionTrajectory::manifest_json() const {
  nlohmann::json j;
  j["scheme"] = scheme;
  j["grid"] = {{"dimension", grid.dimension()}, {"cells_per_axis", grid.cells_per_axis()}, {"length", grid.length()}};
  j["times"] = times;
  j["cfl"] = cfl;
  j["ode_tolerance"] = ode_tolerance;
  j["steps"] = steps;
  j["injected_mass"] = injected_mass;
  std::vector<std::string> files;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    std::ostringstream name;
    name << "frame_" << std::setw(3) << std::setfill('0') << k << ".csv";
    files.push_back(name.str());
  }
  j["frames"] = files;
  return j.dump(2);
}

void SolutionTrajectory::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    std::ostringstream name;
    name << "frame_" << std::setw(3) << std::setfill('0') << k << ".csv";
    std::ofstream out(dir / name.str());
    if (!out) throw std::runtime_error("cannot write " + (dir / name.str()).string());
    write_csv(out, frames[k]);
  }
  std::ofstream man(dir / "manifest.json");
  man << manifest_json() << '\n';
}

AprioriReport apriori_lq_check(const SolutionTrajectory& traj, const CauchyData& data, double q) {
  if (std::isnan(q) || q < 1.0) throw std::domain_error("exponent q must be >= 1");
  AprioriReport r{};
  r.q = q;
  for (const auto& f : traj.frames) r.lhs = std::max(r.lhs, lq_norm(f, q));
  const double T = traj.times.back();
  r.divergence_norm = divergence_l1_linf(data.velocity, traj.grid, T);
  r.initial_norm = lq_norm(data.initial, q);
  const auto f = GridFunction::sample(traj.grid, [&](const Point& x) { return data.source.value(0.0, x); });
  r.source_norm = T * lq_norm(f, q);
  const double exponent = std::isinf(q) ? 1.0 : 1.0 - 1.0 / q;
  r.rhs = std::exp(exponent * r.divergence_norm) * (r.initial_norm + r.source_norm);
  return r;
}

double weak_form_residual(const SolutionTrajectory& traj, const CauchyData& data, const TestFunction& zeta) {
  const Grid& g = traj.grid;
  const double hd = g.cell_volume();
  auto slice = [&](std::size_t k) {
    const double t = traj.times[k];
    double s = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      const Point x = g.center(c);
      const Vec u = data.velocity.value(t, x);
      const Vec gz = zeta.gradient(t, x);
      s += traj.frames[k][c] * (zeta.dt(t, x) + u[0] * gz[0] + u[1] * gz[1]) + data.source.value(t, x) * zeta.value(t, x);
    }
    return s * hd;
  };
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < traj.times.size(); ++k)
    integral += 0.5 * (traj.times[k + 1] - traj.times[k]) * (slice(k) + slice(k + 1));
  double initial = 0.0, final_term = 0.0;
  const double T = traj.times.back();
  for (std::size_t c = 0; c < g.size(); ++c) {
    const Point x = g.center(c);
    initial += data.initial[c] * zeta.value(0.0, x);
    final_term += traj.frames.back()[c] * zeta.value(T, x);
  }
  return integral + (initial - final_term) * hd;
}

}  // namespace krlab
