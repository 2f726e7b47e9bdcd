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

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "utc_eq/game.hpp"
#include "utc_eq/tfdp.hpp"

namespace utc_eq {

inline constexpr double kInputTolerance = 1e-6;

/// A validated game together with each player's decision problem and a flat
/// table of leaves (chance reach, per-player last sequence, payoffs). The
/// leaf table is what makes gradients a single pass over terminals.
class SequenceFormGame {
 public:
  struct Leaf {
    double chance_reach = 1.0;
    std::vector<int> sequence;  // per player
    std::vector<double> utils;  // per player
  };

  explicit SequenceFormGame(ExtensiveFormGame game) : game_(std::move(game)) {
    require_valid(game_);
    const int n = game_.num_players();
    for (int p = 0; p < n; ++p) tfdps_.push_back(build_tfdp(game_, p));

    // Per-player infoset -> decision index, rebuilt here so we can map
    // (infoset, action) to a sequence while walking the game.
    std::vector<std::vector<int>> decision_of(n, std::vector<int>(game_.infosets().size(), -1));
    for (int p = 0; p < n; ++p) {
      for (int j = 0; j < tfdps_[p].num_decisions(); ++j) {
        decision_of[p][tfdps_[p].decision(j).infoset] = j;
      }
    }
    struct Frame {
      int node;
      double reach;
      std::vector<int> seq;
    };
    std::vector<Frame> stack{{game_.root(), 1.0, std::vector<int>(n, kRootSequence)}};
    while (!stack.empty()) {
      Frame f = std::move(stack.back());
      stack.pop_back();
      const GameNode& node = game_.node(f.node);
      switch (node.kind) {
        case NodeKind::kTerminal:
          leaves_.push_back({f.reach, f.seq, node.utils});
          break;
        case NodeKind::kChance:
          for (int k = static_cast<int>(node.children.size()) - 1; k >= 0; --k) {
            stack.push_back({node.children[k], f.reach * node.chance_probs[k], f.seq});
          }
          break;
        case NodeKind::kPlayer: {
          const int j = decision_of[node.player][node.infoset];
          for (int a = static_cast<int>(node.children.size()) - 1; a >= 0; --a) {
            Frame child{node.children[a], f.reach, f.seq};
            child.seq[node.player] = tfdps_[node.player].sequence(j, a);
            stack.push_back(std::move(child));
          }
          break;
        }
      }
    }
  }

  const ExtensiveFormGame& game() const { return game_; }
  int num_players() const { return game_.num_players(); }
  const TreeFormDecisionProblem& tfdp(int player) const { return tfdps_.at(player); }
  const std::vector<Leaf>& leaves() const { return leaves_; }

  /// g over Sigma_i with <g, x_i> = E[u_i] for every x_i, given the other
  /// players' sequence-form strategies (entry `player` of `strategies` is
  /// ignored).
  Vector utility_gradient(int player, std::span<const Vector> strategies) const {
    check_profile(strategies, player);
    Vector g = Vector::Zero(tfdps_.at(player).dim());
    for (const Leaf& leaf : leaves_) {
      const double u = leaf.utils[player];
      if (u == 0.0) continue;
      double w = leaf.chance_reach * u;
      for (int k = 0; k < num_players(); ++k) {
        if (k != player) w *= strategies[k](leaf.sequence[k]);
      }
      g(leaf.sequence[player]) += w;
    }
    return g;
  }

  /// Expected payoff of every player under the given sequence-form profile.
  std::vector<double> expected_utility(std::span<const Vector> strategies) const {
    check_profile(strategies, -1);
    std::vector<double> v(num_players(), 0.0);
    for (const Leaf& leaf : leaves_) {
      double w = leaf.chance_reach;
      for (int k = 0; k < num_players(); ++k) w *= strategies[k](leaf.sequence[k]);
      if (w == 0.0) continue;
      for (int k = 0; k < num_players(); ++k) v[k] += w * leaf.utils[k];
    }
    return v;
  }

 private:
  void check_profile(std::span<const Vector> strategies, int skip) const {
    if (static_cast<int>(strategies.size()) != num_players()) {
      throw std::invalid_argument("expected one strategy per player");
    }
    for (int k = 0; k < num_players(); ++k) {
      if (k == skip) continue;
      const double r = check_sequence_form(strategies[k], tfdps_[k]);
      if (r > kInputTolerance) {
        throw std::invalid_argument("strategy of player " + std::to_string(k) +
                                    " is infeasible (residual " + std::to_string(r) + ")");
      }
    }
  }

  ExtensiveFormGame game_;
  std::vector<TreeFormDecisionProblem> tfdps_;
  std::vector<Leaf> leaves_;
};

}  // namespace utc_eq
