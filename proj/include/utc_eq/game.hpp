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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace utc_eq {

/// Raised when a game tree is structurally malformed (not a tree, wrong
/// arity, bad chance distribution, inconsistent infosets).
class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a structurally valid game violates perfect recall.
class RecallError : public std::runtime_error {
 public:
  RecallError(const std::string& what, std::string infoset)
      : std::runtime_error(what), infoset_(std::move(infoset)) {}
  const std::string& infoset() const { return infoset_; }

 private:
  std::string infoset_;
};

inline constexpr double kChanceTolerance = 1e-12;

enum class NodeKind { kChance, kPlayer, kTerminal };

struct GameNode {
  NodeKind kind = NodeKind::kTerminal;
  int player = -1;   // kPlayer only
  int infoset = -1;  // kPlayer only; index into the infoset registry
  std::vector<int> children;
  std::vector<double> chance_probs;  // kChance only, aligned with children
  std::vector<double> utils;         // kTerminal only, one per player
};

struct Infoset {
  std::string label;
  int player = -1;
  std::vector<std::string> actions;
};

/// Immutable game tree. Nodes are stored in depth-first, left-to-right
/// preorder with the root at index 0; infosets are numbered in order of
/// first discovery along that same traversal.
class ExtensiveFormGame {
 public:
  int num_players() const { return num_players_; }
  int root() const { return 0; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const GameNode& node(int id) const { return nodes_.at(id); }
  std::span<const GameNode> nodes() const { return nodes_; }
  const std::vector<Infoset>& infosets() const { return infosets_; }
  const Infoset& infoset(int id) const { return infosets_.at(id); }

  int num_terminals() const {
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [](const GameNode& n) {
      return n.kind == NodeKind::kTerminal;
    }));
  }

  /// Declared utility range if any, otherwise min/max over all leaf payoffs.
  std::pair<double, double> utility_range() const {
    if (declared_range_) return *declared_range_;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& n : nodes_) {
      if (n.kind != NodeKind::kTerminal) continue;
      for (double u : n.utils) {
        lo = std::min(lo, u);
        hi = std::max(hi, u);
      }
    }
    if (lo > hi) return {0.0, 0.0};
    return {lo, hi};
  }
  const std::optional<std::pair<double, double>>& declared_utility_range() const {
    return declared_range_;
  }
  void declare_utility_range(double lo, double hi) {
    if (!(lo <= hi)) throw GameError("utility range must satisfy lo <= hi");
    declared_range_ = std::make_pair(lo, hi);
  }

  /// Copy with every leaf payoff mapped affinely onto [0, 1] using the
  /// utility range. A degenerate range maps everything to 0.
  ExtensiveFormGame normalized() const {
    ExtensiveFormGame out = *this;
    const auto [lo, hi] = utility_range();
    const double span = hi - lo;
    for (auto& n : out.nodes_) {
      for (double& u : n.utils) u = span > 0 ? (u - lo) / span : 0.0;
    }
    out.declared_range_ = std::make_pair(0.0, span > 0 ? 1.0 : 0.0);
    return out;
  }

 private:
  friend class GameBuilder;
  int num_players_ = 0;
  std::vector<GameNode> nodes_;
  std::vector<Infoset> infosets_;
  std::optional<std::pair<double, double>> declared_range_;
};

/// Assembles a game from detached nodes; `build` renumbers into preorder and
/// checks the tree shape. Chance distributions and recall are checked by
/// `validate_game`.
class GameBuilder {
 public:
  explicit GameBuilder(int num_players) : num_players_(num_players) {
    if (num_players < 1) throw GameError("a game needs at least one player");
  }

  int chance() {
    Pending p;
    p.node.kind = NodeKind::kChance;
    return push(std::move(p));
  }

  int decision(int player, std::string infoset_label, std::vector<std::string> actions) {
    if (player < 0 || player >= num_players_) {
      throw GameError("player id " + std::to_string(player) + " out of range");
    }
    if (actions.empty()) throw GameError("decision node needs at least one action");
    Pending p;
    p.node.kind = NodeKind::kPlayer;
    p.node.player = player;
    p.node.children.assign(actions.size(), -1);
    p.infoset_label = std::move(infoset_label);
    p.actions = std::move(actions);
    return push(std::move(p));
  }

  int terminal(std::vector<double> utils) {
    if (static_cast<int>(utils.size()) != num_players_) {
      throw GameError("terminal has " + std::to_string(utils.size()) + " utilities, expected " +
                      std::to_string(num_players_));
    }
    for (double u : utils) {
      if (!std::isfinite(u)) throw GameError("terminal utility must be finite");
    }
    Pending p;
    p.node.utils = std::move(utils);
    return push(std::move(p));
  }

  void add_outcome(int chance_node, double prob, int child) {
    auto& p = pending_.at(chance_node);
    if (p.node.kind != NodeKind::kChance) throw GameError("add_outcome on a non-chance node");
    p.node.children.push_back(child);
    p.node.chance_probs.push_back(prob);
  }

  void set_child(int decision_node, int action, int child) {
    auto& p = pending_.at(decision_node);
    if (p.node.kind != NodeKind::kPlayer) throw GameError("set_child on a non-player node");
    p.node.children.at(action) = child;
  }

  void declare_utility_range(double lo, double hi) { range_ = std::make_pair(lo, hi); }

  ExtensiveFormGame build(int root) const {
    const int n = static_cast<int>(pending_.size());
    if (root < 0 || root >= n) throw GameError("root id out of range");
    std::vector<int> parents(n, 0);
    for (const auto& p : pending_) {
      for (int c : p.node.children) {
        if (c < 0 || c >= n) throw GameError("node has an unset or out-of-range child");
        if (++parents[c] > 1) throw GameError("node " + std::to_string(c) + " has two parents");
      }
    }
    if (parents[root] != 0) throw GameError("root has a parent");

    ExtensiveFormGame g;
    g.num_players_ = num_players_;
    g.declared_range_ = range_;
    std::map<std::string, int> infoset_ids;
    std::vector<int> new_id(n, -1);
    // Preorder, left to right.
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int old = stack.back();
      stack.pop_back();
      new_id[old] = static_cast<int>(g.nodes_.size());
      const Pending& p = pending_[old];
      GameNode node = p.node;
      if (node.kind == NodeKind::kPlayer) {
        auto [it, inserted] =
            infoset_ids.try_emplace(p.infoset_label, static_cast<int>(g.infosets_.size()));
        if (inserted) {
          g.infosets_.push_back({p.infoset_label, node.player, p.actions});
        } else {
          const Infoset& known = g.infosets_[it->second];
          if (known.player != node.player) {
            throw GameError("infoset '" + p.infoset_label + "' spans several players");
          }
          if (known.actions != p.actions) {
            throw GameError("infoset '" + p.infoset_label + "' has inconsistent action labels");
          }
        }
        node.infoset = it->second;
      } else if (node.kind == NodeKind::kChance && node.children.empty()) {
        throw GameError("chance node without outcomes");
      }
      g.nodes_.push_back(std::move(node));
      for (auto it = p.node.children.rbegin(); it != p.node.children.rend(); ++it) {
        stack.push_back(*it);
      }
    }
    if (static_cast<int>(g.nodes_.size()) != n) {
      throw GameError("builder contains nodes unreachable from the root");
    }
    for (auto& node : g.nodes_) {
      for (int& c : node.children) c = new_id[c];
    }
    return g;
  }

 private:
  struct Pending {
    GameNode node;
    std::string infoset_label;
    std::vector<std::string> actions;
  };
  int push(Pending p) {
    pending_.push_back(std::move(p));
    return static_cast<int>(pending_.size()) - 1;
  }

  int num_players_;
  std::vector<Pending> pending_;
  std::optional<std::pair<double, double>> range_;
};

struct ValidationReport {
  enum class Status { kOk, kMalformed, kRecallViolation };
  Status status = Status::kOk;
  std::string message;
  std::string infoset;  // offending infoset for recall violations

  bool ok() const { return status == Status::kOk; }
};

namespace detail {

inline std::string format_history(const std::vector<std::pair<int, int>>& h,
                                  const ExtensiveFormGame& g) {
  std::string s = "[";
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) s += ", ";
    const Infoset& is = g.infoset(h[i].first);
    s += is.label + ":" + is.actions[h[i].second];
  }
  return s + "]";
}

}  // namespace detail

/// Checks chance distributions, then perfect recall: every node of an
/// infoset must carry the same sequence of (infoset, action) pairs of the
/// owning player along its root path.
inline ValidationReport validate_perfect_recall(const ExtensiveFormGame& game) {
  ValidationReport report;
  for (int id = 0; id < game.num_nodes(); ++id) {
    const GameNode& n = game.node(id);
    if (n.kind != NodeKind::kChance) continue;
    double total = 0;
    for (double p : n.chance_probs) {
      if (!(p >= 0) || !std::isfinite(p)) {
        report.status = ValidationReport::Status::kMalformed;
        report.message = "chance node " + std::to_string(id) + " has a negative probability";
        return report;
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kChanceTolerance) {
      report.status = ValidationReport::Status::kMalformed;
      report.message = "chance node " + std::to_string(id) + " probabilities sum to " +
                       std::to_string(total);
      return report;
    }
  }

  using History = std::vector<std::pair<int, int>>;
  std::vector<std::optional<History>> seen(game.infosets().size());
  std::vector<History> per_player(game.num_players());
  // Iterative DFS carrying one history per player.
  struct Frame {
    int node;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{game.root(), 0}};
  {
    const GameNode& r = game.node(game.root());
    if (r.kind == NodeKind::kPlayer) seen[r.infoset] = per_player[r.player];
  }
  while (!stack.empty()) {
    Frame& f = stack.back();
    const GameNode& n = game.node(f.node);
    if (f.next_child == n.children.size()) {
      stack.pop_back();
      if (!stack.empty()) {
        const GameNode& parent = game.node(stack.back().node);
        if (parent.kind == NodeKind::kPlayer) per_player[parent.player].pop_back();
      }
      continue;
    }
    const int a = static_cast<int>(f.next_child++);
    if (n.kind == NodeKind::kPlayer) per_player[n.player].emplace_back(n.infoset, a);
    const int child = n.children[a];
    const GameNode& c = game.node(child);
    if (c.kind == NodeKind::kPlayer) {
      auto& slot = seen[c.infoset];
      const History& h = per_player[c.player];
      if (!slot) {
        slot = h;
      } else if (*slot != h) {
        report.status = ValidationReport::Status::kRecallViolation;
        report.infoset = game.infoset(c.infoset).label;
        report.message = "infoset '" + report.infoset + "' is reached with histories " +
                         detail::format_history(*slot, game) + " and " +
                         detail::format_history(h, game);
        return report;
      }
    }
    stack.push_back({child, 0});
  }
  return report;
}

/// Throws GameError / RecallError if the report is not ok.
inline void require_valid(const ExtensiveFormGame& game) {
  const ValidationReport r = validate_perfect_recall(game);
  switch (r.status) {
    case ValidationReport::Status::kOk:
      return;
    case ValidationReport::Status::kMalformed:
      throw GameError(r.message);
    case ValidationReport::Status::kRecallViolation:
      throw RecallError(r.message, r.infoset);
  }
}

}  // namespace utc_eq
