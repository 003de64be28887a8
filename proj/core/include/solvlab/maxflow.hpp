#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace solvlab {

/// Boykov-Kolmogorov augmenting-path max-flow on a sparse graph with
/// terminal links. After solve(), source_side(i) tells on which side of the
/// minimum cut node i ended; nodes that can still reach the sink through
/// residual edges are on the sink side, everything else (including free
/// nodes) on the source side.
class MaxFlowGraph {
public:
  explicit MaxFlowGraph(int nodes);

  int node_count() const { return static_cast<int>(tr_cap_.size()); }
  /// Adds capacities from the source to i and from i to the sink.
  void add_terminal(int i, double source_cap, double sink_cap);
  /// Adds an edge i -> j with capacity cap and j -> i with capacity rev_cap.
  void add_edge(int i, int j, double cap, double rev_cap);

  /// Computes the maximum flow. Throws MaxFlowOverflowError on capacities
  /// that are not finite or too large to sum safely.
  double solve();
  bool source_side(int i) const;

private:
  enum Tree : std::uint8_t { kFree = 0, kSource = 1, kSink = 2 };

  void build();
  void activate(int i);
  int next_active();
  int grow(int i);
  void augment(int middle);
  void adopt_source(int i);
  void adopt_sink(int i);
  void make_orphan(int i);
  int tail(int arc) const { return head_[sister_[arc]]; }

  // Construction buffers.
  struct EdgeSpec {
    int i, j;
    double cap, rev;
  };
  std::vector<EdgeSpec> pending_;
  double offset_ = 0.0;  ///< flow that is forced by both terminal links

  // CSR arcs.
  std::vector<int> first_;
  std::vector<int> head_;
  std::vector<int> sister_;
  std::vector<double> rcap_;

  // Node state.
  std::vector<double> tr_cap_;  ///< >0: residual from source, <0: residual to sink
  std::vector<int> parent_;
  std::vector<std::uint8_t> tree_;
  std::vector<std::uint8_t> queued_;
  std::vector<long> ts_;
  std::vector<int> dist_;
  std::deque<int> queue_;
  std::vector<int> orphans_;
  long time_ = 0;
  bool solved_ = false;
};

}  // namespace solvlab
