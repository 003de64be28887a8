#include "solvlab/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "solvlab/error.hpp"

namespace solvlab {

namespace {

constexpr int kNone = -1;
constexpr int kTerminal = -2;
constexpr int kOrphan = -3;
constexpr int kInfDist = std::numeric_limits<int>::max();

// Sums of capacities must stay far from overflow.
constexpr double kCapacityLimit = 1e250;

void check_capacity(double c) {
  if (!std::isfinite(c) || std::abs(c) > kCapacityLimit) {
    throw MaxFlowOverflowError("max-flow capacity " + std::to_string(c) +
                               " is not representable; rescale the unary costs (e.g. work in units where "
                               "beta/r^3 is of order one) or reduce gamma/r^2");
  }
}

}  // namespace

MaxFlowGraph::MaxFlowGraph(int nodes) : tr_cap_(static_cast<std::size_t>(std::max(nodes, 0)), 0.0) {
  if (nodes <= 0) throw std::invalid_argument("MaxFlowGraph: need at least one node");
}

void MaxFlowGraph::add_terminal(int i, double source_cap, double sink_cap) {
  check_capacity(source_cap);
  check_capacity(sink_cap);
  if (source_cap < 0.0 || sink_cap < 0.0) throw std::invalid_argument("MaxFlowGraph: negative terminal capacity");
  // Flow min(source, sink) always passes through i; keep only the difference.
  tr_cap_.at(i) += source_cap - sink_cap;
  offset_ += std::min(source_cap, sink_cap);
}

void MaxFlowGraph::add_edge(int i, int j, double cap, double rev_cap) {
  check_capacity(cap);
  check_capacity(rev_cap);
  if (cap < 0.0 || rev_cap < 0.0) throw std::invalid_argument("MaxFlowGraph: negative edge capacity");
  if (i == j) throw std::invalid_argument("MaxFlowGraph: self loop");
  if (i < 0 || j < 0 || i >= node_count() || j >= node_count()) throw std::out_of_range("MaxFlowGraph: node index");
  pending_.push_back({i, j, cap, rev_cap});
}

void MaxFlowGraph::build() {
  const int n = node_count();
  first_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : pending_) {
    ++first_[e.i + 1];
    ++first_[e.j + 1];
  }
  for (int i = 0; i < n; ++i) first_[i + 1] += first_[i];
  const std::size_t arcs = 2 * pending_.size();
  head_.assign(arcs, 0);
  sister_.assign(arcs, 0);
  rcap_.assign(arcs, 0.0);
  std::vector<int> fill(first_.begin(), first_.end() - 1);
  for (const auto& e : pending_) {
    const int a = fill[e.i]++;
    const int b = fill[e.j]++;
    head_[a] = e.j;
    rcap_[a] = e.cap;
    sister_[a] = b;
    head_[b] = e.i;
    rcap_[b] = e.rev;
    sister_[b] = a;
  }
  pending_.clear();
  pending_.shrink_to_fit();
}

void MaxFlowGraph::activate(int i) {
  if (!queued_[i]) {
    queued_[i] = 1;
    queue_.push_back(i);
  }
}

int MaxFlowGraph::next_active() {
  while (!queue_.empty()) {
    const int i = queue_.front();
    queue_.pop_front();
    queued_[i] = 0;
    if (parent_[i] != kNone) return i;
  }
  return kNone;
}

void MaxFlowGraph::make_orphan(int i) {
  parent_[i] = kOrphan;
  orphans_.push_back(i);
}

// Returns an arc from the source tree to the sink tree, or kNone.
int MaxFlowGraph::grow(int i) {
  if (tree_[i] == kSource) {
    for (int a = first_[i]; a < first_[i + 1]; ++a) {
      if (rcap_[a] <= 0.0) continue;
      const int j = head_[a];
      if (parent_[j] == kNone) {
        tree_[j] = kSource;
        parent_[j] = sister_[a];
        ts_[j] = ts_[i];
        dist_[j] = dist_[i] + 1;
        activate(j);
      } else if (tree_[j] == kSink) {
        return a;
      } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
        parent_[j] = sister_[a];
        ts_[j] = ts_[i];
        dist_[j] = dist_[i] + 1;
      }
    }
  } else {
    for (int a = first_[i]; a < first_[i + 1]; ++a) {
      const int s = sister_[a];
      if (rcap_[s] <= 0.0) continue;
      const int j = head_[a];
      if (parent_[j] == kNone) {
        tree_[j] = kSink;
        parent_[j] = s;
        ts_[j] = ts_[i];
        dist_[j] = dist_[i] + 1;
        activate(j);
      } else if (tree_[j] == kSource) {
        return s;
      } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
        parent_[j] = s;
        ts_[j] = ts_[i];
        dist_[j] = dist_[i] + 1;
      }
    }
  }
  return kNone;
}

void MaxFlowGraph::augment(int middle) {
  double bottleneck = rcap_[middle];
  // Source half: parent arcs point from child to parent, flow runs parent -> child.
  int i = tail(middle);
  while (parent_[i] != kTerminal) {
    const int p = parent_[i];
    bottleneck = std::min(bottleneck, rcap_[sister_[p]]);
    i = head_[p];
  }
  bottleneck = std::min(bottleneck, tr_cap_[i]);
  int j = head_[middle];
  while (parent_[j] != kTerminal) {
    const int p = parent_[j];
    bottleneck = std::min(bottleneck, rcap_[p]);
    j = head_[p];
  }
  bottleneck = std::min(bottleneck, -tr_cap_[j]);

  rcap_[middle] -= bottleneck;
  rcap_[sister_[middle]] += bottleneck;
  i = tail(middle);
  while (parent_[i] != kTerminal) {
    const int p = parent_[i];
    rcap_[p] += bottleneck;
    rcap_[sister_[p]] -= bottleneck;
    const int up = head_[p];
    if (rcap_[sister_[p]] <= 0.0) {
      rcap_[sister_[p]] = 0.0;
      make_orphan(i);
    }
    i = up;
  }
  tr_cap_[i] -= bottleneck;
  if (tr_cap_[i] <= 0.0) {
    tr_cap_[i] = 0.0;
    make_orphan(i);
  }
  j = head_[middle];
  while (parent_[j] != kTerminal) {
    const int p = parent_[j];
    rcap_[sister_[p]] += bottleneck;
    rcap_[p] -= bottleneck;
    const int up = head_[p];
    if (rcap_[p] <= 0.0) {
      rcap_[p] = 0.0;
      make_orphan(j);
    }
    j = up;
  }
  tr_cap_[j] += bottleneck;
  if (tr_cap_[j] >= 0.0) {
    tr_cap_[j] = 0.0;
    make_orphan(j);
  }
  offset_ += bottleneck;
}

void MaxFlowGraph::adopt_source(int i) {
  int best_arc = kNone;
  int best_dist = kInfDist;
  for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
    if (rcap_[sister_[a0]] <= 0.0) continue;
    int j = head_[a0];
    if (tree_[j] != kSource || parent_[j] == kNone) continue;
    int d = 0;
    for (;;) {
      if (ts_[j] == time_) {
        d += dist_[j];
        break;
      }
      const int a = parent_[j];
      ++d;
      if (a == kTerminal) {
        ts_[j] = time_;
        dist_[j] = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInfDist;
        break;
      }
      j = head_[a];
    }
    if (d < kInfDist) {
      if (d < best_dist) {
        best_arc = a0;
        best_dist = d;
      }
      for (j = head_[a0]; ts_[j] != time_; j = head_[parent_[j]]) {
        ts_[j] = time_;
        dist_[j] = d--;
      }
    }
  }
  if (best_arc != kNone) {
    parent_[i] = best_arc;
    ts_[i] = time_;
    dist_[i] = best_dist + 1;
    return;
  }
  for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
    const int j = head_[a0];
    if (tree_[j] != kSource || parent_[j] == kNone) continue;
    if (rcap_[sister_[a0]] > 0.0) activate(j);
    const int a = parent_[j];
    if (a != kTerminal && a != kOrphan && head_[a] == i) make_orphan(j);
  }
  parent_[i] = kNone;
  tree_[i] = kFree;
}

void MaxFlowGraph::adopt_sink(int i) {
  int best_arc = kNone;
  int best_dist = kInfDist;
  for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
    if (rcap_[a0] <= 0.0) continue;
    int j = head_[a0];
    if (tree_[j] != kSink || parent_[j] == kNone) continue;
    int d = 0;
    for (;;) {
      if (ts_[j] == time_) {
        d += dist_[j];
        break;
      }
      const int a = parent_[j];
      ++d;
      if (a == kTerminal) {
        ts_[j] = time_;
        dist_[j] = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInfDist;
        break;
      }
      j = head_[a];
    }
    if (d < kInfDist) {
      if (d < best_dist) {
        best_arc = a0;
        best_dist = d;
      }
      for (j = head_[a0]; ts_[j] != time_; j = head_[parent_[j]]) {
        ts_[j] = time_;
        dist_[j] = d--;
      }
    }
  }
  if (best_arc != kNone) {
    parent_[i] = best_arc;
    ts_[i] = time_;
    dist_[i] = best_dist + 1;
    return;
  }
  for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
    const int j = head_[a0];
    if (tree_[j] != kSink || parent_[j] == kNone) continue;
    if (rcap_[a0] > 0.0) activate(j);
    const int a = parent_[j];
    if (a != kTerminal && a != kOrphan && head_[a] == i) make_orphan(j);
  }
  parent_[i] = kNone;
  tree_[i] = kFree;
}

double MaxFlowGraph::solve() {
  if (solved_) throw std::logic_error("MaxFlowGraph::solve called twice");
  solved_ = true;
  build();
  const int n = node_count();
  double total = offset_;
  for (int i = 0; i < n; ++i) total += std::abs(tr_cap_[i]);
  for (double c : rcap_) total += c;
  check_capacity(total);

  parent_.assign(n, kNone);
  tree_.assign(n, kFree);
  queued_.assign(n, 0);
  ts_.assign(n, 0);
  dist_.assign(n, 0);
  time_ = 0;
  for (int i = 0; i < n; ++i) {
    if (tr_cap_[i] > 0.0) {
      tree_[i] = kSource;
    } else if (tr_cap_[i] < 0.0) {
      tree_[i] = kSink;
    } else {
      continue;
    }
    parent_[i] = kTerminal;
    dist_[i] = 1;
    activate(i);
  }

  int current = kNone;
  for (;;) {
    int i = current;
    if (i == kNone || parent_[i] == kNone) {
      i = next_active();
      if (i == kNone) break;
    }
    const int middle = grow(i);
    ++time_;
    if (middle == kNone) {
      current = kNone;
      continue;
    }
    current = i;
    augment(middle);
    for (std::size_t k = 0; k < orphans_.size(); ++k) {
      const int o = orphans_[k];
      if (tree_[o] == kSource) {
        adopt_source(o);
      } else {
        adopt_sink(o);
      }
    }
    orphans_.clear();
  }
  return offset_;
}

bool MaxFlowGraph::source_side(int i) const {
  if (!solved_) throw std::logic_error("MaxFlowGraph::source_side before solve");
  return tree_.at(i) != kSink;
}

}  // namespace solvlab
