// Copyright 2026 The UTC-EQ Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "utc_eq/tfdp.hpp"

namespace utc_eq {

/// The three node families of the untimed-communication decision problem.
/// A node pairs a state of the real problem with a state of the mediator.
enum class UtcNodeKind {
  kSequencePair,  // observation (sigma, sigma~): observe the next real decision point
  kQueryPair,     // observation (j, j~): observe the recommendation at j~
  kDecision,      // decision (j, sigma~): play an action at j or query some j~ in C(sigma~)
};

enum class UtcEdgeKind { kObserveDecision, kObserveRecommendation, kPlay, kQuery };

struct UtcNode {
  UtcNodeKind kind;
  int real;      // sigma or j in the real problem
  int mediator;  // sigma~ or j~ in the mediator's problem
  int first_edge = 0;
  int num_edges = 0;
};

struct UtcEdge {
  int target;
  UtcEdgeKind kind;
  int label;  // observed j / recommended action / played action / queried j~
};

struct UtcDagStats {
  std::int64_t sequence_pairs_full = 0;
  std::int64_t query_pairs_full = 0;
  std::int64_t decisions_full = 0;
  std::int64_t sequence_pairs = 0;
  std::int64_t query_pairs = 0;
  std::int64_t decisions = 0;
  bool pruned = false;
};

/// The UTC decision problem for a real problem X (the deviator's) and a
/// mediator problem Y (the recommendations), restricted to the nodes
/// reachable from (root, root). Nodes are stored in topological order with
/// the root at index 0.
class UtcDag {
 public:
  UtcDag(TreeFormDecisionProblem real, TreeFormDecisionProblem mediator)
      : real_(std::move(real)), mediator_(std::move(mediator)) {
    build();
  }

  const TreeFormDecisionProblem& real() const { return real_; }
  const TreeFormDecisionProblem& mediator() const { return mediator_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const UtcNode& node(int id) const { return nodes_[id]; }
  const std::vector<UtcNode>& nodes() const { return nodes_; }
  std::span<const UtcEdge> out_edges(int id) const {
    const UtcNode& n = nodes_[id];
    return std::span<const UtcEdge>(edges_).subspan(n.first_edge, n.num_edges);
  }
  const UtcEdge& edge(int e) const { return edges_[e]; }
  int in_degree(int id) const { return in_degree_[id]; }
  int root() const { return 0; }
  const std::vector<int>& decision_nodes() const { return decision_nodes_; }
  const UtcDagStats& stats() const { return stats_; }

  /// Node ids for a given pair, or -1 if pruned.
  int sequence_pair(int sigma, int sigma_tilde) const {
    return seq_pair_[static_cast<std::size_t>(sigma) * mediator_.dim() + sigma_tilde];
  }
  int query_pair(int j, int j_tilde) const {
    return query_pair_[static_cast<std::size_t>(j) * mediator_.num_decisions() + j_tilde];
  }
  int decision(int j, int sigma_tilde) const {
    return decision_[static_cast<std::size_t>(j) * mediator_.dim() + sigma_tilde];
  }

  std::string node_label(int id) const {
    const UtcNode& n = nodes_[id];
    switch (n.kind) {
      case UtcNodeKind::kSequencePair:
        return "(" + real_.sequence_label(n.real) + ", " + mediator_.sequence_label(n.mediator) + ")";
      case UtcNodeKind::kQueryPair:
        return "(" + real_.decision(n.real).label + ", ?" + mediator_.decision(n.mediator).label + ")";
      case UtcNodeKind::kDecision:
        return "[" + real_.decision(n.real).label + ", " + mediator_.sequence_label(n.mediator) + "]";
    }
    return {};
  }

 private:
  struct Key {
    UtcNodeKind kind;
    int real, mediator;
  };

  void build() {
    const std::size_t dx = real_.dim(), dy = mediator_.dim();
    const std::size_t jx = real_.num_decisions(), jy = mediator_.num_decisions();
    seq_pair_.assign(dx * dy, -1);
    query_pair_.assign(jx * jy, -1);
    decision_.assign(jx * dy, -1);
    stats_.sequence_pairs_full = static_cast<std::int64_t>(dx * dy);
    stats_.query_pairs_full = static_cast<std::int64_t>(jx * jy);
    stats_.decisions_full = static_cast<std::int64_t>(jx * dy);

    // Discovery by BFS; `slot` maps a key to its id table entry.
    std::vector<Key> keys;
    auto slot = [&](const Key& k) -> int& {
      switch (k.kind) {
        case UtcNodeKind::kSequencePair:
          return seq_pair_[k.real * dy + k.mediator];
        case UtcNodeKind::kQueryPair:
          return query_pair_[k.real * jy + k.mediator];
        case UtcNodeKind::kDecision:
          break;
      }
      return decision_[k.real * dy + k.mediator];
    };
    auto discover = [&](const Key& k) {
      int& id = slot(k);
      if (id < 0) {
        id = static_cast<int>(keys.size());
        keys.push_back(k);
      }
      return id;
    };
    std::vector<std::vector<UtcEdge>> out;
    discover({UtcNodeKind::kSequencePair, kRootSequence, kRootSequence});
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const Key k = keys[i];
      std::vector<UtcEdge> edges;
      switch (k.kind) {
        case UtcNodeKind::kSequencePair:
          for (int j : real_.children(k.real)) {
            edges.push_back({discover({UtcNodeKind::kDecision, j, k.mediator}),
                             UtcEdgeKind::kObserveDecision, j});
          }
          break;
        case UtcNodeKind::kQueryPair:
          for (int a = 0; a < mediator_.num_actions(k.mediator); ++a) {
            edges.push_back({discover({UtcNodeKind::kDecision, k.real, mediator_.sequence(k.mediator, a)}),
                             UtcEdgeKind::kObserveRecommendation, a});
          }
          break;
        case UtcNodeKind::kDecision:
          for (int a = 0; a < real_.num_actions(k.real); ++a) {
            edges.push_back({discover({UtcNodeKind::kSequencePair, real_.sequence(k.real, a), k.mediator}),
                             UtcEdgeKind::kPlay, a});
          }
          for (int jt : mediator_.children(k.mediator)) {
            edges.push_back({discover({UtcNodeKind::kQueryPair, k.real, jt}), UtcEdgeKind::kQuery, jt});
          }
          break;
      }
      out.push_back(std::move(edges));
    }

    // Kahn's algorithm, FIFO, for a deterministic topological order.
    const int n = static_cast<int>(keys.size());
    std::vector<int> indeg(n, 0);
    for (const auto& es : out) {
      for (const auto& e : es) ++indeg[e.target];
    }
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> remaining = indeg;
    std::deque<int> queue{0};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (const auto& e : out[v]) {
        if (--remaining[e.target] == 0) queue.push_back(e.target);
      }
    }
    if (static_cast<int>(order.size()) != n) throw std::logic_error("UTC graph has a cycle");
    std::vector<int> rank(n);
    for (int r = 0; r < n; ++r) rank[order[r]] = r;

    nodes_.reserve(n);
    in_degree_.resize(n);
    for (int r = 0; r < n; ++r) {
      const int v = order[r];
      UtcNode node{keys[v].kind, keys[v].real, keys[v].mediator, static_cast<int>(edges_.size()),
                   static_cast<int>(out[v].size())};
      for (UtcEdge e : out[v]) {
        e.target = rank[e.target];
        edges_.push_back(e);
      }
      in_degree_[r] = indeg[v];
      nodes_.push_back(node);
      switch (node.kind) {
        case UtcNodeKind::kSequencePair:
          ++stats_.sequence_pairs;
          break;
        case UtcNodeKind::kQueryPair:
          ++stats_.query_pairs;
          break;
        case UtcNodeKind::kDecision:
          ++stats_.decisions;
          decision_nodes_.push_back(r);
          break;
      }
    }
    for (int& id : seq_pair_) id = id < 0 ? -1 : rank[id];
    for (int& id : query_pair_) id = id < 0 ? -1 : rank[id];
    for (int& id : decision_) id = id < 0 ? -1 : rank[id];
    stats_.pruned = stats_.sequence_pairs < stats_.sequence_pairs_full ||
                    stats_.query_pairs < stats_.query_pairs_full ||
                    stats_.decisions < stats_.decisions_full;
  }

  TreeFormDecisionProblem real_, mediator_;
  std::vector<UtcNode> nodes_;
  std::vector<UtcEdge> edges_;
  std::vector<int> in_degree_;
  std::vector<int> decision_nodes_;
  std::vector<int> seq_pair_, query_pair_, decision_;
  UtcDagStats stats_;
};

/// UTC problem of a player against its own recommendations.
inline UtcDag build_utc_dag(const TreeFormDecisionProblem& tfdp) { return UtcDag(tfdp, tfdp); }

/// General pair: real states from `real`, mediator states from `mediator`.
inline UtcDag build_utc_dag(const TreeFormDecisionProblem& real, const TreeFormDecisionProblem& mediator) {
  return UtcDag(real, mediator);
}

}  // namespace utc_eq
