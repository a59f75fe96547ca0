#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "krlab/pde.hpp"

using namespace krlab;
constexpr double kPi = std::numbers::pi;

namespace {

SignedDensity bump(const Grid& g) {
  return SignedDensity::sample(g, [](const Point& x) {
    const double s = std::sin(kPi * x[0]);
    return 1.0 + std::pow(s, 8) + (x[1] != 0.0 ? 0.5 * std::pow(std::sin(kPi * x[1]), 4) : 0.0);
  });
}

// Cell averages of the exact oscillatory solution with unit initial datum.
std::vector<double> exact_oscillatory_averages(const Grid& g, int k, double t) {
  std::vector<double> v(g.size());
  const double h = g.spacing();
  for (std::size_t c = 0; c < g.size(); ++c)
    v[c] = (exact_flow_oscillatory(k, -t, (c + 1) * h) - exact_flow_oscillatory(k, -t, c * h)) / h;
  return v;
}

double l1_diff(const GridFunction& a, const GridFunction& b) { return lq_norm(a - b, 1.0); }

}  // namespace

TEST_CASE("trivial dynamics") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 16);
    const CauchyData still{VelocityField::zero(dim), ScalarSource::zero(), bump(g), 1.0};
    const auto lag = lagrangian_solve(still, g, uniform_times(1.0, 4));
    const auto eul = eulerian_solve(still, g);
    for (const auto* tr : {&lag, &eul})
      for (const auto& f : tr->frames)
        for (std::size_t c = 0; c < g.size(); ++c) CHECK(f[c] == doctest::Approx(bump(g)[c]).epsilon(1e-15));

    const CauchyData fed{VelocityField::zero(dim), ScalarSource::constant(1.0), bump(g), 1.0};
    const auto lag2 = lagrangian_solve(fed, g, uniform_times(1.0, 4));
    const auto eul2 = eulerian_solve(fed, g);
    for (const auto* tr : {&lag2, &eul2})
      for (std::size_t k = 0; k < tr->times.size(); ++k)
        for (std::size_t c = 0; c < g.size(); ++c)
          CHECK(tr->frames[k][c] == doctest::Approx(bump(g)[c] + tr->times[k]).epsilon(1e-13));

    const auto rep = apriori_lq_check(eul2, fed, 1.0);
    CHECK(rep.rhs == doctest::Approx(lq_norm(bump(g), 1) + 1.0));
    CHECK(rep.lhs == doctest::Approx(rep.rhs).epsilon(1e-13));
  }
}

TEST_CASE("E1 step is refused") {
  const Grid g(1, 16);
  const CauchyData d{VelocityField::e1_step(), ScalarSource::zero(), bump(g), 1.0};
  CHECK_THROWS_AS(lagrangian_solve(d, g, uniform_times(1.0, 2)), std::invalid_argument);
  CHECK_THROWS_AS(eulerian_solve(d, g), std::invalid_argument);
}

TEST_CASE("Lagrangian solver reproduces the oscillatory Jacobian formula") {
  double prev = 1e9;
  for (int n : {64, 128, 256}) {
    const Grid g(1, n, 2 * kPi);
    const CauchyData d{VelocityField::oscillatory(1), ScalarSource::zero(), SignedDensity(g, std::vector<double>(n, 1.0)), 1.0};
    const auto traj = lagrangian_solve(d, g, uniform_times(1.0, 4));
    const SignedDensity exact(g, exact_oscillatory_averages(g, 1, 1.0));
    const double err = l1_diff(traj.final_frame(), exact);
    CHECK(err < 3e-2 * 64.0 / n);
    CHECK(err < prev);
    prev = err;
    CHECK(traj.final_frame().integral() == doctest::Approx(2 * kPi).epsilon(1e-13));
  }

  // the ODE path agrees with the closed form
  const Grid g(1, 64, 2 * kPi);
  const CauchyData d{VelocityField::oscillatory(2), ScalarSource::cosine(0.3, 2 * kPi),
                     SignedDensity(g, std::vector<double>(64, 1.0)), 0.8};
  const auto exact_path = lagrangian_solve(d, g, uniform_times(0.8, 4));
  const auto ode_path = lagrangian_solve(
      CauchyData{VelocityField::oscillatory(2).modulated(1e-12), d.source, d.initial, 0.8}, g, uniform_times(0.8, 4));
  CHECK(l1_diff(exact_path.final_frame(), ode_path.final_frame()) < 1e-8);
}

TEST_CASE("Eulerian translation converges under refinement") {
  double prev = 1e9;
  for (int n : {64, 128, 256}) {
    const Grid g(1, n);
    const auto rho0 = SignedDensity::sample(g, [](const Point& x) { return std::exp(-40 * std::pow(x[0] - 0.5, 2)); });
    const CauchyData d{VelocityField::constant(1, {1.0, 0.0}), ScalarSource::zero(), rho0, 1.0};
    const auto traj = eulerian_solve(d, g, {0.5, 64});
    const double err = l1_diff(traj.final_frame(), rho0);
    CHECK(err <= 2.0 * std::pow(g.spacing(), 2.0 / 3.0));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("Eulerian mass balance and positivity") {
  for (const auto& u : {VelocityField::rotation_2d(), VelocityField::smooth_shear_2d().modulated(3.0)}) {
    const Grid g(2, 32);
    const CauchyData d{u, ScalarSource::cosine(0.7), bump(g), 1.3};
    const auto traj = eulerian_solve(d, g, {0.9, 16});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double drift = traj.frames[k].integral() - d.initial.integral() - traj.injected_mass[k];
      CHECK(std::abs(drift) <= 1e-11 * (1 + lq_norm(d.initial, 1)));
    }
    CHECK(traj.times.back() == doctest::Approx(1.3));
    const CauchyData pos{u, ScalarSource::constant(0.2), bump(g), 1.0};
    for (const auto& f : eulerian_solve(pos, g).frames)
      for (double v : f.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("Lagrangian and Eulerian agree on smooth 2D data") {
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Grid g(2, n);
    const CauchyData d{VelocityField::smooth_shear_2d(), ScalarSource::zero(), bump(g), 0.5};
    const auto eul = eulerian_solve(d, g, {0.5, 8});
    const auto lag = lagrangian_solve(d, g, eul.times);
    const double err = l1_diff(eul.final_frame(), lag.final_frame());
    CHECK(lag.final_frame().integral() == doctest::Approx(d.initial.integral()).epsilon(1e-13));
    if (prev > 0.0) CHECK(err / prev <= 0.7);
    prev = err;
  }
}

TEST_CASE("weak form residual decreases under refinement") {
  std::vector<TestFunction> tests;
  const int waves[5][2] = {{1, 0}, {0, 1}, {1, 1}, {2, 0}, {1, 2}};
  for (const auto& kv : waves) {
    const double a = 2 * kPi * kv[0], b = 2 * kPi * kv[1];
    tests.push_back({[=](double t, const Point& x) { return std::exp(-t) * std::cos(a * x[0] + b * x[1]); },
                     [=](double t, const Point& x) { return -std::exp(-t) * std::cos(a * x[0] + b * x[1]); },
                     [=](double t, const Point& x) {
                       const double s = -std::exp(-t) * std::sin(a * x[0] + b * x[1]);
                       return Vec{a * s, b * s};
                     }});
  }
  std::vector<double> prev(tests.size(), 1e9);
  for (int n : {16, 32, 64}) {
    const Grid g(2, n);
    const CauchyData d{VelocityField::rotation_2d(), ScalarSource::cosine(0.5), bump(g), 0.5};
    // every step stored so the time quadrature refines with the grid
    const auto traj = eulerian_solve(d, g, {0.5, 1 << 20});
    for (std::size_t k = 0; k < tests.size(); ++k) {
      const double r = std::abs(weak_form_residual(traj, d, tests[k]));
      CHECK(r < prev[k]);
      prev[k] = r;
    }
  }
}

TEST_CASE("a priori bound") {
  const Grid g(1, 512, 2 * kPi);
  const CauchyData osc{VelocityField::oscillatory(4), ScalarSource::zero(), SignedDensity(g, std::vector<double>(512, 1.0)), 1.0};
  const auto traj = lagrangian_solve(osc, g, uniform_times(1.0, 16));
  for (double q : {1.0, 2.0}) CHECK(apriori_lq_check(traj, osc, q).holds(0.05));

  const Grid g2(2, 32);
  const CauchyData rot{VelocityField::rotation_2d(), ScalarSource::zero(), bump(g2), 0.5};
  const auto r1 = apriori_lq_check(eulerian_solve(rot, g2), rot, 1.0);
  CHECK(r1.divergence_norm < 1e-12);
  CHECK(r1.holds(1e-12));
}

TEST_CASE("ODE failures name the trajectory") {
  const Grid g(2, 4);
  const CauchyData d{VelocityField::rotation_2d(), ScalarSource::zero(), bump(g), 1.0};
  try {
    lagrangian_solve(d, g, uniform_times(1.0, 2), {0.0});
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    INFO(std::string(e.what()));
    CHECK(std::string(e.what()).find("flow integration failed for trajectory ") != std::string::npos);
  }
}

TEST_CASE("manifest and frame export") {
  const Grid g(1, 8);
  const CauchyData d{VelocityField::constant(1, {0.5, 0.0}), ScalarSource::zero(), bump(g), 1.0};
  const auto traj = eulerian_solve(d, g, {0.5, 4});
  const auto j = nlohmann::json::parse(traj.manifest_json());
  CHECK(j["scheme"] == "eulerian");
  CHECK(j["times"].size() == traj.times.size());
  CHECK(j["cfl"] == 0.5);
  const auto dir = std::filesystem::temp_directory_path() / "krlab_manifest_test";
  std::filesystem::remove_all(dir);
  traj.write(dir);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "frame_000.csv"));
  std::filesystem::remove_all(dir);
}
