#include <random>
#include <stdexcept>

#include "dense_lp.hpp"
#include "doctest.h"
#include "krlab/network_simplex.hpp"

using krlab::NetworkSimplex;

TEST_CASE("single arc") {
  NetworkSimplex ns(2);
  ns.add_arc(0, 1, 3.0);
  ns.set_supply(0, 2.0);
  ns.set_supply(1, -2.0);
  REQUIRE(ns.run() == NetworkSimplex::Status::Optimal);
  CHECK(ns.flow(0) == 2.0);
  CHECK(ns.total_cost() == 6.0);
  CHECK(ns.cost(0) + ns.potential(0) - ns.potential(1) == doctest::Approx(0.0));
}

TEST_CASE("infeasible and unbalanced networks") {
  NetworkSimplex ns(3);
  ns.add_arc(0, 1, 1.0);
  ns.set_supply(0, 1.0);
  ns.set_supply(2, -1.0);
  CHECK(ns.run() == NetworkSimplex::Status::Infeasible);

  NetworkSimplex bad(2);
  bad.add_arc(0, 1, 1.0);
  bad.set_supply(0, 1.0);
  bad.set_supply(1, -0.5);
  CHECK_THROWS_AS(bad.run(), std::invalid_argument);
}

TEST_CASE("random transportation problems against the dense LP") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 60; ++trial) {
    const int S = size(rng), T = size(rng);
    std::vector<double> a(S), b(T);
    double sa = 0, sb = 0;
    for (double& x : a) sa += (x = 0.1 + unit(rng));
    for (double& x : b) sb += (x = 0.1 + unit(rng));
    for (double& x : b) x *= sa / sb;
    std::vector<std::vector<double>> C(S, std::vector<double>(T));
    NetworkSimplex ns(S + T);
    ns.set_validate_each_pivot(true);
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < T; ++j) {
        // concave costs with many ties stress degeneracy
        C[i][j] = trial % 2 ? std::log1p(std::floor(10 * unit(rng))) : unit(rng);
        ns.add_arc(i, S + j, C[i][j]);
      }
    for (int i = 0; i < S; ++i) ns.set_supply(i, a[i]);
    for (int j = 0; j < T; ++j) ns.set_supply(S + j, -b[j]);
    REQUIRE(ns.run() == NetworkSimplex::Status::Optimal);
    CHECK(ns.validate_tree());
    const double oracle_value = oracle::transport_lp(a, b, C);
    CHECK(ns.total_cost() == doctest::Approx(oracle_value).epsilon(1e-10));

    // dual feasibility and complementary slackness
    double dual = 0.0;
    for (int v = 0; v < S + T; ++v) dual += -ns.potential(v) * (v < S ? a[v] : -b[v - S]);
    CHECK(dual == doctest::Approx(oracle_value).epsilon(1e-10));
    int support = 0;
    for (int e = 0; e < ns.arc_count(); ++e) {
      const double rc = ns.cost(e) + ns.potential(ns.source(e)) - ns.potential(ns.target(e));
      CHECK(rc >= -1e-12);
      if (ns.flow(e) > 0) {
        ++support;
        CHECK(std::abs(rc) <= 1e-12);
      }
    }
    CHECK(support <= S + T - 1);
  }
}

TEST_CASE("general graph with transshipment") {
  // 0 -> 1 -> 2 is cheaper than 0 -> 2
  NetworkSimplex ns(3);
  ns.add_arc(0, 2, 5.0);
  ns.add_arc(0, 1, 1.0);
  ns.add_arc(1, 2, 1.0);
  ns.set_supply(0, 1.0);
  ns.set_supply(2, -1.0);
  REQUIRE(ns.run() == NetworkSimplex::Status::Optimal);
  CHECK(ns.total_cost() == doctest::Approx(2.0));
  CHECK(ns.flow(0) == 0.0);
}
