#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dense_lp.hpp"
#include "doctest.h"
#include "krlab/transport.hpp"

using namespace krlab;

namespace {

// Atoms at x = 0 and x = 0.3: cells 0 and 3 of a grid with h = 0.1.
SignedDensity two_atoms() {
  Grid g(1, 16, 1.6);
  SignedDensity eta(g);
  eta.set(0, 1.0 / g.spacing());
  eta.set(3, -1.0 / g.spacing());
  return eta;
}

SignedDensity step(int n) {
  return SignedDensity::sample(Grid(1, n), [](const Point& x) { return x[0] < 0.5 ? 1.0 : -1.0; });
}

SignedDensity random_mean_zero(const Grid& g, std::mt19937_64& rng, double sparsity = 0.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = unit(rng) < sparsity ? 0.0 : unit(rng) - 0.5;
  auto eta = mean_zero_projection(SignedDensity(g, v));
  if (sparsity > 0.0) {
    // projection fills the zeros; restore sparsity by rebalancing the largest atom
    std::vector<double> w(g.size());
    double sum = 0.0;
    std::size_t big = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = v[i];
      sum += w[i];
      if (std::abs(w[i]) > std::abs(w[big])) big = i;
    }
    w[big] -= sum;
    eta = SignedDensity(g, w);
  }
  return eta;
}

double dense_transport_value(const SignedDensity& eta, const CostSpec& cost) {
  const Grid& g = eta.grid();
  std::vector<std::size_t> S, T;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] > 0) S.push_back(i), a.push_back(eta[i] * g.cell_volume());
    if (eta[i] < 0) T.push_back(i), b.push_back(-eta[i] * g.cell_volume());
  }
  double sa = 0, sb = 0;
  for (double x : a) sa += x;
  for (double x : b) sb += x;
  for (double& x : b) x *= sa / sb;
  std::vector<std::vector<double>> C(S.size(), std::vector<double>(T.size()));
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = 0; j < T.size(); ++j) C[i][j] = cost.value(g.distance(g.center(S[i]), g.center(T[j])));
  return oracle::transport_lp(a, b, C);
}

}  // namespace

TEST_CASE("zero density") {
  const SignedDensity zero(Grid(1, 8));
  const auto cost = CostSpec::bounded_log(0.1, 0.5);
  const auto sol = solve_kr(zero, cost);
  CHECK(sol.plan.entries.empty());
  CHECK(sol.primal == 0.0);
  CHECK(sol.dual == 0.0);
  CHECK(sol.potential.values.is_zero());
  CHECK(duality_gap(sol.plan, sol.potential) == 0.0);
  CHECK(kr_distance(zero, cost) == 0.0);
  CHECK(w_neg11_norm(zero) == 0.0);
  CHECK(potential_gradient_on_support(sol.plan).empty());
}

TEST_CASE("two atoms") {
  const auto eta = two_atoms();
  const auto cost = CostSpec::bounded_log(0.1, 0.5);
  const auto sol = solve_kr(eta, cost);
  CHECK(sol.primal == doctest::Approx(std::log(4.0)).epsilon(1e-13));
  CHECK(sol.dual == doctest::Approx(std::log(4.0)).epsilon(1e-13));
  CHECK(sol.potential.values[0] - sol.potential.values[3] == doctest::Approx(std::log(4.0)).epsilon(1e-13));
  REQUIRE(sol.plan.entries.size() == 1);
  CHECK(sol.plan.entries[0].mass == doctest::Approx(1.0));

  CHECK(kr_distance(eta, CostSpec::truncated_linear(1.0)) == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(w_neg11_norm(eta) == doctest::Approx(0.3).epsilon(1e-12));

  const auto grad = potential_gradient_on_support(sol.plan);
  REQUIRE(grad.size() == 1);
  CHECK(norm(grad[0].gradient) == doctest::Approx(1.0 / (0.1 + 0.3)).epsilon(1e-12));
  // x - y points from the target at 0.3 towards the source at 0
  CHECK(grad[0].gradient[0] < 0);

  const auto far = CostSpec::bounded_log(0.1, 0.15);
  const auto far_grad = potential_gradient_on_support(solve_primal(eta, far).plan);
  const double R = 0.15;
  CHECK(norm(far_grad[0].gradient) == doctest::Approx(R * R / (R + 0.1) / (4 * R * R)).epsilon(1e-12));

  const auto dep = deposit_potential_gradient(sol.plan);
  CHECK(dep.weight[0] == doctest::Approx(1.0));
  CHECK(dep.weight[3] == doctest::Approx(1.0));
  CHECK(dep.gradient[0][0] == doctest::Approx(grad[0].gradient[0]));
  CHECK(dep.gradient[3][0] == doctest::Approx(grad[0].gradient[0]));
}

TEST_CASE("unbalanced marginals are rejected") {
  auto eta = two_atoms();
  eta.set(5, 0.01);
  CHECK_THROWS_AS(kr_distance(eta, CostSpec::truncated_linear(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(w_neg11_norm(eta), std::invalid_argument);
}

TEST_CASE("step example with truncated linear cost") {
  const auto eta = step(1024);
  const double value = kr_distance(eta, CostSpec::truncated_linear(0.5));
  CHECK(std::abs(value - 0.125) <= 2.0 / 1024);
}

TEST_CASE("step example strong duality") {
  const auto eta = step(1024);
  const auto sol = solve_kr(eta, CostSpec::bounded_log(0.01, 0.5));
  CHECK(std::abs(sol.primal - sol.dual) <= 1e-8 * sol.primal);
  CHECK(duality_gap(sol.plan, sol.potential) <= 1e-8 * (1 + sol.primal));
}

TEST_CASE("fine step agrees with the dense LP on a coarse grid") {
  for (double delta : {0.1, 0.01}) {
    const auto cost = CostSpec::bounded_log(delta, 0.5);
    const double fine = kr_distance(step(2048), cost);
    const auto coarse = step(256);
    const double dense = dense_transport_value(coarse, cost);
    CHECK(kr_distance(coarse, cost) == doctest::Approx(dense).epsilon(1e-10));
    CHECK(std::abs(fine - dense) <= 3.0 / 256);
  }
}

TEST_CASE("brute-force equivalence on small instances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pick(0, 31);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Grid g = trial % 2 ? Grid(1, 32) : Grid(2, 8);
    std::vector<double> v(g.size(), 0.0);
    std::uniform_int_distribution<std::size_t> cell(0, g.size() - 1);
    const int S = 1 + trial % 12, T = 1 + (trial * 7) % 12;
    for (int k = 0; k < S; ++k) v[cell(rng)] = unit(rng);
    for (int k = 0; k < T; ++k) {
      std::size_t c;
      do c = cell(rng);
      while (v[c] > 0);
      v[c] = -unit(rng);
    }
    double pos = 0, neg = 0;
    for (double x : v) (x > 0 ? pos : neg) += std::abs(x);
    for (double& x : v)
      if (x < 0) x *= pos / neg;
    const SignedDensity eta(g, v);
    for (const auto& cost : {CostSpec::bounded_log(0.05, 0.3), CostSpec::truncated_linear(0.25)}) {
      const auto sol = solve_kr(eta, cost);
      CHECK(sol.primal == doctest::Approx(dense_transport_value(eta, cost)).epsilon(1e-10));
      std::size_t sources = 0, targets = 0;
      for (double x : v) (x > 0 ? sources : targets) += x != 0;
      CHECK(sol.plan.entries.size() <= sources + targets - 1);
    }
  }
}

TEST_CASE("equal masses agree with permutation enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g(2, 8);
    const int m = 2 + trial % 6;
    std::vector<std::size_t> cells(g.size());
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
    std::shuffle(cells.begin(), cells.end(), rng);
    SignedDensity eta(g);
    for (int k = 0; k < m; ++k) {
      eta.set(cells[k], 1.0);
      eta.set(cells[m + k], -1.0);
    }
    const auto cost = CostSpec::bounded_log(0.02, 0.4);
    std::vector<std::vector<double>> C(m, std::vector<double>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) C[i][j] = cost.value(g.cell_distance(cells[i], cells[m + j]));
    CHECK(kr_distance(eta, cost) ==
          doctest::Approx(oracle::assignment_brute_force(C, g.cell_volume())).epsilon(1e-12));
  }
}

TEST_CASE("duality, saturation and potential bounds on random instances") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const Grid g = trial % 3 == 0 ? Grid(2, 8) : Grid(1, 64);
    const auto eta = random_mean_zero(g, rng);
    const double delta = trial % 2 ? 0.01 : 0.2;
    const auto cost = CostSpec::bounded_log(delta, 0.5);
    const auto sol = solve_kr(eta, cost);
    CHECK(std::abs(sol.primal - sol.dual) <= 1e-8 * sol.primal);
    const auto& phi = sol.potential.values;
    for (const auto& e : sol.plan.entries)
      CHECK(std::abs(phi[e.source] - phi[e.target] - cost.value(g.cell_distance(e.source, e.target))) <= 1e-8);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
      lo = std::min(lo, phi[i]);
      hi = std::max(hi, phi[i]);
      CHECK(std::abs(phi[i]) <= cost.supremum());
      const auto [ci, cj] = g.coords(i);
      const double dq = std::abs(phi[i] - phi[g.index(ci + 1, cj)]) / g.spacing();
      CHECK(dq <= 1.0 / delta + 1e-9);
    }
    CHECK(lo + hi == doctest::Approx(0.0).scale(1.0));
    for (int k = 0; k < 200; ++k) {
      std::uniform_int_distribution<std::size_t> cell(0, g.size() - 1);
      const auto a = cell(rng), b = cell(rng);
      CHECK(std::abs(phi[a] - phi[b]) <= cost.value(g.cell_distance(a, b)) + 1e-12);
    }
    // row and column sums reproduce the marginals
    std::vector<double> row(g.size(), 0.0), col(g.size(), 0.0);
    for (const auto& e : sol.plan.entries) {
      row[e.source] += e.mass;
      col[e.target] += e.mass;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double m = std::abs(eta[i]) * g.cell_volume();
      if (eta[i] > 0) CHECK(std::abs(row[i] - m) <= 1e-10 * std::max(m, 1e-3));
      if (eta[i] < 0) CHECK(std::abs(col[i] - m) <= 1e-10 * std::max(m, 1e-3));
    }
  }
}

TEST_CASE("duality gap detects a suboptimal plan and mismatched instances") {
  std::mt19937_64 rng(23);
  const Grid g(1, 32);
  const auto eta = random_mean_zero(g, rng);
  const auto cost = CostSpec::bounded_log(0.05, 0.5);
  const auto sol = solve_kr(eta, cost);
  CHECK(duality_gap(sol.plan, sol.potential) <= 1e-8 * (1 + sol.primal));

  // swap targets of the two largest entries
  auto plan = sol.plan;
  std::sort(plan.entries.begin(), plan.entries.end(), [](auto& x, auto& y) { return x.mass > y.mass; });
  std::size_t k = 1;
  while (k < plan.entries.size() && plan.entries[k].target == plan.entries[0].target) ++k;
  REQUIRE(k < plan.entries.size());
  const double m = std::min(plan.entries[0].mass, plan.entries[k].mass);
  plan.entries[0].mass -= m;
  plan.entries[k].mass -= m;
  plan.entries.push_back({plan.entries[0].source, plan.entries[k].target, m});
  plan.entries.push_back({plan.entries[k].source, plan.entries[0].target, m});
  CHECK(duality_gap(plan, sol.potential) > 1e-6);

  const auto other = solve_kr(random_mean_zero(g, rng), cost);
  CHECK_THROWS_AS(duality_gap(sol.plan, other.potential), std::invalid_argument);
  CHECK_THROWS_AS(duality_gap(sol.plan, solve_kr(eta, CostSpec::bounded_log(0.1, 0.5)).potential),
                  std::invalid_argument);
}

TEST_CASE("metric axioms") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Grid g(1, 32);
  auto density = [&] {
    std::vector<double> v(g.size());
    double s = 0;
    for (double& x : v) s += (x = unit(rng) * unit(rng));
    for (double& x : v) x /= s * g.cell_volume();
    return SignedDensity(g, v);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = density(), b = density(), c = density();
    const auto cost = trial % 2 ? CostSpec::bounded_log(0.01, 0.5) : CostSpec::truncated_linear(0.3);
    auto D = [&](const SignedDensity& x, const SignedDensity& y) { return kr_distance(mean_zero_projection(x - y), cost); };
    const double ab = D(a, b), ba = D(b, a), bc = D(b, c), ac = D(a, c);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ac <= ab + bc + 1e-9);
  }
  // identity of indiscernibles
  const auto a = density();
  CHECK(kr_distance(mean_zero_projection(a - a), CostSpec::bounded_log(0.01, 0.5)) <= 1e-12);
  SignedDensity tiny(g);
  tiny.set(3, 1e-9);
  tiny.set(4, -1e-9);
  CHECK(kr_distance(tiny, CostSpec::bounded_log(0.01, 0.5)) > 1e-12);
}

TEST_CASE("W^{-1,1} norm against the dense flow LP and the D1 sandwich") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Grid g = trial % 2 ? Grid(1, 64) : Grid(2, 8);
    const auto eta = random_mean_zero(g, rng);
    const auto sol = w_neg11_solve(eta);
    const double d1 = kr_distance(eta, CostSpec::truncated_linear(1.0));
    CHECK(d1 <= sol.value + 1e-9);
    CHECK(sol.value <= 2 * d1 + 1e-9);
    const auto& phi = sol.test_function;
    double s = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(phi[i]) <= 1.0);
      const auto [ci, cj] = g.coords(i);
      CHECK(std::abs(phi[i] - phi[g.index(ci + 1, cj)]) <= g.spacing() * (1 + 1e-9));
      if (g.dimension() == 2) CHECK(std::abs(phi[i] - phi[g.index(ci, cj + 1)]) <= g.spacing() * (1 + 1e-9));
      s += phi[i] * eta[i] * g.cell_volume();
    }
    CHECK(s == doctest::Approx(sol.value).epsilon(1e-10));

    if (g.size() <= 64 && trial < 10) {
      // primal min-cost flow written out as a dense LP
      const std::size_t N = g.size();
      std::vector<std::pair<std::size_t, std::size_t>> arcs;
      std::vector<double> cost;
      for (std::size_t c = 0; c < N; ++c) {
        const auto [i, j] = g.coords(c);
        for (auto nb : {g.index(i + 1, j), g.index(i - 1, j)}) arcs.push_back({c, nb}), cost.push_back(g.spacing());
        if (g.dimension() == 2)
          for (auto nb : {g.index(i, j + 1), g.index(i, j - 1)}) arcs.push_back({c, nb}), cost.push_back(g.spacing());
        arcs.push_back({c, N}), cost.push_back(1.0);
        arcs.push_back({N, c}), cost.push_back(1.0);
      }
      std::vector<std::vector<double>> A(N + 1, std::vector<double>(arcs.size(), 0.0));
      std::vector<double> rhs(N + 1, 0.0);
      for (std::size_t e = 0; e < arcs.size(); ++e) {
        A[arcs[e].first][e] += 1.0;
        A[arcs[e].second][e] -= 1.0;
      }
      double total = 0;
      for (std::size_t c = 0; c < N; ++c) total += (rhs[c] = eta[c] * g.cell_volume());
      rhs[N] = -total;
      for (std::size_t r = 0; r <= N; ++r)
        if (rhs[r] < 0) {
          rhs[r] = -rhs[r];
          for (double& x : A[r]) x = -x;
        }
      CHECK(sol.value == doctest::Approx(oracle::dense_lp_min(A, rhs, cost)).epsilon(1e-9));
    }
  }
}

TEST_CASE("csv export") {
  const auto sol = solve_kr(two_atoms(), CostSpec::bounded_log(0.1, 0.5));
  std::ostringstream plan, pot;
  write_plan_csv(plan, sol.plan);
  write_potential_csv(pot, sol.potential);
  CHECK(plan.str().rfind("source,target,mass\n0,3,", 0) == 0);
  CHECK(pot.str().rfind("index,phi\n0,", 0) == 0);
}
