#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace krlab {

/// Primal network simplex for uncapacitated min-cost flow with real supplies.
///
/// Follows the strongly feasible spanning-tree scheme with an artificial root
/// and block-search pivoting (the LEMON layout: thread/rev-thread lists,
/// successor counts, last successors). Node potentials at termination satisfy
/// cost + pi[source] - pi[target] >= -tolerance on every arc and equality on
/// every tree arc, so -pi is an optimal dual solution.
class NetworkSimplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  explicit NetworkSimplex(int node_count);

  void reserve_arcs(std::size_t count);
  /// Returns the arc id.
  int add_arc(int source, int target, double cost);
  /// Positive for sources, negative for sinks; must sum to ~0.
  void set_supply(int node, double supply);

  Status run();

  int node_count() const noexcept { return node_num_; }
  int arc_count() const noexcept { return arc_num_; }
  int source(int arc) const noexcept { return source_[arc]; }
  int target(int arc) const noexcept { return target_[arc]; }
  double cost(int arc) const noexcept { return cost_[arc]; }
  double flow(int arc) const noexcept { return flow_[arc]; }
  double potential(int node) const noexcept { return pi_[node]; }
  double total_cost() const;
  std::size_t pivots() const noexcept { return pivots_; }

  /// Checks the spanning-tree bookkeeping; used by tests after each pivot.
  bool validate_tree() const;
  void set_validate_each_pivot(bool on) noexcept { validate_each_pivot_ = on; }

 private:
  void init();
  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow();
  void update_tree_structure();
  void update_potential();
  void recompute_potentials();

  int node_num_;
  int arc_num_ = 0;
  int all_arc_num_ = 0;
  int root_ = 0;

  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::int8_t> state_;
  std::vector<double> supply_;

  std::vector<double> pi_;
  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<std::int8_t> pred_dir_;
  std::vector<int> dirty_revs_;

  double art_cost_ = 0.0;
  double epsilon_ = 0.0;
  int block_size_ = 0;
  int next_arc_ = 0;

  int in_arc_ = -1, join_ = -1, u_in_ = -1, v_in_ = -1, u_out_ = -1, v_out_ = -1;
  double delta_ = 0.0;

  std::size_t pivots_ = 0;
  bool validate_each_pivot_ = false;
};

}  // namespace krlab
