#include "krlab/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace krlab {

namespace {

constexpr std::int8_t kStateTree = 0;
constexpr std::int8_t kStateLower = 1;
constexpr std::int8_t kDirUp = 1;
constexpr std::int8_t kDirDown = -1;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

NetworkSimplex::NetworkSimplex(int node_count) : node_num_(node_count) {
  if (node_count < 1) throw std::invalid_argument("network needs at least one node");
  supply_.assign(node_num_ + 1, 0.0);
}

void NetworkSimplex::reserve_arcs(std::size_t count) {
  source_.reserve(count + node_num_);
  target_.reserve(count + node_num_);
  cost_.reserve(count + node_num_);
}

int NetworkSimplex::add_arc(int source, int target, double cost) {
  if (source < 0 || source >= node_num_ || target < 0 || target >= node_num_)
    throw std::out_of_range("arc endpoint out of range");
  if (!std::isfinite(cost)) throw std::invalid_argument("arc cost must be finite");
  source_.push_back(source);
  target_.push_back(target);
  cost_.push_back(cost);
  return arc_num_++;
}

void NetworkSimplex::set_supply(int node, double supply) {
  if (node < 0 || node >= node_num_) throw std::out_of_range("node out of range");
  if (!std::isfinite(supply)) throw std::invalid_argument("supply must be finite");
  supply_[node] = supply;
}

double NetworkSimplex::total_cost() const {
  double c = 0.0;
  for (int e = 0; e < arc_num_; ++e)
    if (flow_[e] != 0.0) c += flow_[e] * cost_[e];
  return c;
}

void NetworkSimplex::init() {
  all_arc_num_ = arc_num_ + node_num_;
  root_ = node_num_;
  source_.resize(all_arc_num_);
  target_.resize(all_arc_num_);
  cost_.resize(all_arc_num_);
  flow_.assign(all_arc_num_, 0.0);
  state_.assign(all_arc_num_, kStateLower);

  const int n = node_num_ + 1;
  pi_.assign(n, 0.0);
  parent_.assign(n, -1);
  pred_.assign(n, -1);
  thread_.assign(n, 0);
  rev_thread_.assign(n, 0);
  succ_num_.assign(n, 0);
  last_succ_.assign(n, 0);
  pred_dir_.assign(n, 0);
  dirty_revs_.clear();
  dirty_revs_.reserve(n);

  double max_cost = 0.0;
  for (int e = 0; e < arc_num_; ++e) max_cost = std::max(max_cost, std::abs(cost_[e]));
  art_cost_ = (max_cost + 1.0) * node_num_;
  // reduced costs carry rounding of order art_cost_ * ulp
  epsilon_ = 64.0 * std::numeric_limits<double>::epsilon() * art_cost_;

  block_size_ = std::max(10, static_cast<int>(std::sqrt(double(std::max(arc_num_, 1)))));
  next_arc_ = 0;

  parent_[root_] = -1;
  pred_[root_] = -1;
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = node_num_ + 1;
  last_succ_[root_] = root_ - 1;
  pi_[root_] = 0.0;

  for (int u = 0, e = arc_num_; u < node_num_; ++u, ++e) {
    parent_[u] = root_;
    pred_[u] = e;
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    state_[e] = kStateTree;
    if (supply_[u] >= 0.0) {
      pred_dir_[u] = kDirUp;
      pi_[u] = 0.0;
      source_[e] = u;
      target_[e] = root_;
      flow_[e] = supply_[u];
      cost_[e] = 0.0;
    } else {
      pred_dir_[u] = kDirDown;
      pi_[u] = art_cost_;
      source_[e] = root_;
      target_[e] = u;
      flow_[e] = -supply_[u];
      cost_[e] = art_cost_;
    }
  }
}

bool NetworkSimplex::find_entering_arc() {
  double min = -epsilon_;
  int cnt = block_size_;
  int e;
  bool found = false;
  for (e = next_arc_; e != arc_num_; ++e) {
    const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = e;
      found = true;
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e + 1 == arc_num_ ? 0 : e + 1;
        return true;
      }
      cnt = block_size_;
    }
  }
  for (e = 0; e != next_arc_; ++e) {
    const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = e;
      found = true;
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e + 1;
        return true;
      }
      cnt = block_size_;
    }
  }
  if (found) {
    next_arc_ = e == arc_num_ ? 0 : e;
    return true;
  }
  return false;
}

void NetworkSimplex::find_join_node() {
  int u = source_[in_arc_];
  int v = target_[in_arc_];
  while (u != v) {
    if (succ_num_[u] < succ_num_[v])
      u = parent_[u];
    else
      v = parent_[v];
  }
  join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
  // every arc is uncapacitated, so only arcs whose flow decreases can block
  const int first = source_[in_arc_];
  const int second = target_[in_arc_];
  delta_ = kInf;
  int result = 0;
  for (int u = first; u != join_; u = parent_[u]) {
    if (pred_dir_[u] != kDirUp) continue;
    const double d = flow_[pred_[u]];
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (int u = second; u != join_; u = parent_[u]) {
    if (pred_dir_[u] != kDirDown) continue;
    const double d = flow_[pred_[u]];
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void NetworkSimplex::change_flow() {
  if (delta_ > 0.0) {
    const double val = delta_;
    flow_[in_arc_] += val;
    for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
    for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
  }
  state_[in_arc_] = kStateTree;
  state_[pred_[u_out_]] = kStateLower;
  flow_[pred_[u_out_]] = 0.0;
}

void NetworkSimplex::update_tree_structure() {
  const int old_rev_thread = rev_thread_[u_out_];
  const int old_succ_num = succ_num_[u_out_];
  const int old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;

    if (thread_[v_in_] != u_out_) {
      int after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in_];
      thread_[v_in_] = u_out_;
      rev_thread_[u_out_] = v_in_;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    // when old_rev_thread is v_in, join and v_out coincide
    const int thread_continue =
        old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

    // re-hang the stem u_in -> ... -> u_out under v_in
    int stem = u_in_;
    int par_stem = v_in_;
    int next_stem;
    int last = last_succ_[u_in_];
    int before, after = thread_[last];
    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);

      before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;

      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out_] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out_] = last;

    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }

    for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

    int tmp_sc = 0;
    const int tmp_ls = last_succ_[u_out_];
    for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = static_cast<std::int8_t>(-pred_dir_[p]);
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
    succ_num_[u_in_] = old_succ_num;
  }

  const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const int last_succ_out = last_succ_[u_out_];
  for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
      last_succ_[u] = old_rev_thread;
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
      last_succ_[u] = last_succ_out;
  }

  for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
  const int end = thread_[last_succ_[u_in_]];
  for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

void NetworkSimplex::recompute_potentials() {
  pi_[root_] = 0.0;
  for (int u = thread_[root_]; u != root_; u = thread_[u]) {
    const int e = pred_[u];
    const int p = parent_[u];
    pi_[u] = pred_dir_[u] == kDirUp ? pi_[p] - cost_[e] : pi_[p] + cost_[e];
  }
}

NetworkSimplex::Status NetworkSimplex::run() {
  double total = 0.0, scale = 0.0;
  for (int u = 0; u < node_num_; ++u) {
    total += supply_[u];
    scale += std::abs(supply_[u]);
  }
  if (std::abs(total) > 1e-9 * std::max(scale, 1e-300))
    throw std::invalid_argument("network supplies do not balance");

  init();
  pivots_ = 0;
  while (find_entering_arc()) {
    find_join_node();
    if (!find_leaving_arc()) return Status::Unbounded;
    change_flow();
    update_tree_structure();
    update_potential();
    ++pivots_;
    if (validate_each_pivot_ && !validate_tree())
      throw std::logic_error("network simplex tree invariant broken");
  }
  recompute_potentials();

  for (int e = arc_num_; e < all_arc_num_; ++e)
    if (flow_[e] > 1e-9 * std::max(scale, 1e-300)) return Status::Infeasible;
  return Status::Optimal;
}

bool NetworkSimplex::validate_tree() const {
  const int n = node_num_ + 1;
  // thread must visit every node once, in a preorder of the parent tree
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  int u = root_;
  for (int k = 0; k < n; ++k) {
    if (seen[u]) return false;
    seen[u] = 1;
    order.push_back(u);
    if (rev_thread_[thread_[u]] != u) return false;
    u = thread_[u];
  }
  if (u != root_) return false;
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[order[k]] = k;
  std::vector<int> count(n, 1);
  for (int k = n - 1; k > 0; --k) {
    const int v = order[k];
    const int p = parent_[v];
    if (p < 0 || pos[p] >= pos[v]) return false;
    count[p] += count[v];
  }
  for (int v = 0; v < n; ++v) {
    if (succ_num_[v] != count[v]) return false;
    if (order[pos[v] + count[v] - 1] != last_succ_[v]) return false;
    if (v == root_) continue;
    const int e = pred_[v];
    if (state_[e] != kStateTree) return false;
    const bool up = source_[e] == v && target_[e] == parent_[v];
    const bool down = target_[e] == v && source_[e] == parent_[v];
    if (!(pred_dir_[v] == kDirUp ? up : down)) return false;
    const double rc = cost_[e] + pi_[source_[e]] - pi_[target_[e]];
    if (std::abs(rc) > 1e-9 * (1.0 + art_cost_)) return false;
  }
  return true;
}

}  // namespace krlab
