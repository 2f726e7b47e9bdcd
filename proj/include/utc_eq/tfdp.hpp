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

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "utc_eq/game.hpp"

namespace utc_eq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr int kRootSequence = 0;

struct DecisionPoint {
  int parent_sequence = kRootSequence;
  int first_sequence = 0;  // sequences of this point are contiguous
  int num_actions = 0;
  int infoset = -1;  // game infoset id, or -1 for hand-built problems
  std::string label;
};

struct SequenceInfo {
  int decision = -1;  // parent decision point; -1 for the empty sequence
  int action = -1;
  std::string label;
};

/// One player's tree-form decision problem: decision points J, sequences
/// Sigma (index 0 is the empty sequence) and the child map C_sigma.
class TreeFormDecisionProblem {
 public:
  TreeFormDecisionProblem() {
    sequences_.push_back({-1, -1, "<root>"});
    children_.emplace_back();
  }

  /// Appends a decision point below `parent_sequence`; returns its index.
  int add_decision(int parent_sequence, std::string label, std::span<const std::string> actions,
                   int infoset = -1) {
    if (parent_sequence < 0 || parent_sequence >= dim()) {
      throw std::out_of_range("parent sequence out of range");
    }
    if (actions.empty()) throw std::invalid_argument("decision point needs an action");
    const int j = num_decisions();
    DecisionPoint dp;
    dp.parent_sequence = parent_sequence;
    dp.first_sequence = dim();
    dp.num_actions = static_cast<int>(actions.size());
    dp.infoset = infoset;
    dp.label = std::move(label);
    decisions_.push_back(std::move(dp));
    children_[parent_sequence].push_back(j);
    for (int a = 0; a < static_cast<int>(actions.size()); ++a) {
      sequences_.push_back({j, a, actions[a]});
      children_.emplace_back();
    }
    return j;
  }

  int add_decision(int parent_sequence, std::string label, std::initializer_list<std::string> actions) {
    const std::vector<std::string> v(actions);
    return add_decision(parent_sequence, std::move(label), std::span<const std::string>(v));
  }

  int dim() const { return static_cast<int>(sequences_.size()); }
  int num_decisions() const { return static_cast<int>(decisions_.size()); }
  const DecisionPoint& decision(int j) const { return decisions_.at(j); }
  const std::vector<DecisionPoint>& decisions() const { return decisions_; }
  const SequenceInfo& sequence(int s) const { return sequences_.at(s); }
  int sequence(int j, int a) const { return decisions_[j].first_sequence + a; }
  int parent_sequence(int j) const { return decisions_[j].parent_sequence; }
  int num_actions(int j) const { return decisions_[j].num_actions; }
  /// C_sigma: decision points immediately following sequence `s`.
  std::span<const int> children(int s) const { return children_.at(s); }

  /// "J:action" style label; the root is "<root>".
  std::string sequence_label(int s) const {
    const SequenceInfo& si = sequences_.at(s);
    if (si.decision < 0) return si.label;
    return decisions_[si.decision].label + ":" + si.label;
  }

 private:
  std::vector<DecisionPoint> decisions_;
  std::vector<SequenceInfo> sequences_;
  std::vector<std::vector<int>> children_;
};

/// Derives player `player`'s decision problem. Decision points are the
/// player's infosets in depth-first, left-to-right discovery order.
inline TreeFormDecisionProblem build_tfdp(const ExtensiveFormGame& game, int player) {
  if (player < 0 || player >= game.num_players()) throw std::out_of_range("player out of range");
  TreeFormDecisionProblem tfdp;
  std::vector<int> infoset_to_decision(game.infosets().size(), -1);
  // (node, player's last sequence on the path)
  std::vector<std::pair<int, int>> stack{{game.root(), kRootSequence}};
  while (!stack.empty()) {
    const auto [id, seq] = stack.back();
    stack.pop_back();
    const GameNode& n = game.node(id);
    const bool mine = n.kind == NodeKind::kPlayer && n.player == player;
    int j = -1;
    if (mine) {
      j = infoset_to_decision[n.infoset];
      if (j < 0) {
        const Infoset& is = game.infoset(n.infoset);
        j = tfdp.add_decision(seq, is.label, std::span<const std::string>(is.actions), n.infoset);
        infoset_to_decision[n.infoset] = j;
      }
    }
    for (int a = static_cast<int>(n.children.size()) - 1; a >= 0; --a) {
      stack.emplace_back(n.children[a], mine ? tfdp.sequence(j, a) : seq);
    }
  }
  return tfdp;
}

/// Max violation of x(root) = 1, x(p_j) = sum_a x(ja), and 0 <= x <= 1.
inline double check_sequence_form(const Vector& x, const TreeFormDecisionProblem& tfdp) {
  if (x.size() != tfdp.dim()) {
    throw std::invalid_argument("sequence-form vector has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(tfdp.dim()));
  }
  double r = std::abs(x(kRootSequence) - 1.0);
  for (const DecisionPoint& dp : tfdp.decisions()) {
    double sum = 0;
    for (int a = 0; a < dp.num_actions; ++a) sum += x(dp.first_sequence + a);
    r = std::max(r, std::abs(x(dp.parent_sequence) - sum));
  }
  for (int s = 0; s < tfdp.dim(); ++s) {
    r = std::max({r, -x(s), x(s) - 1.0});
  }
  return r;
}

/// Behavioral strategy: one distribution per decision point, flattened in
/// sequence order (entry `first_sequence + a - 1` is the probability of a).
/// Pushes the distributions top-down into sequence form.
inline Vector behavioral_to_sequence_form(const TreeFormDecisionProblem& tfdp,
                                          std::span<const double> probs) {
  if (static_cast<int>(probs.size()) != tfdp.dim() - 1) {
    throw std::invalid_argument("behavioral strategy has wrong size");
  }
  Vector x = Vector::Zero(tfdp.dim());
  x(kRootSequence) = 1.0;
  // Decision points are created after their parent sequence, so index order
  // is top-down.
  for (const DecisionPoint& dp : tfdp.decisions()) {
    for (int a = 0; a < dp.num_actions; ++a) {
      const int s = dp.first_sequence + a;
      x(s) = x(dp.parent_sequence) * probs[s - 1];
    }
  }
  return x;
}

inline Vector uniform_strategy(const TreeFormDecisionProblem& tfdp) {
  std::vector<double> probs(tfdp.dim() - 1);
  for (const DecisionPoint& dp : tfdp.decisions()) {
    for (int a = 0; a < dp.num_actions; ++a) probs[dp.first_sequence + a - 1] = 1.0 / dp.num_actions;
  }
  return behavioral_to_sequence_form(tfdp, probs);
}

class EnumerationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of reduced pure strategies, saturating at `cap + 1`.
inline std::uint64_t count_pure_strategies(const TreeFormDecisionProblem& tfdp,
                                           std::uint64_t cap = UINT64_MAX - 1) {
  // count(sigma) = prod_{j in C_sigma} sum_a count(ja); bottom-up over
  // sequences in reverse index order.
  const std::uint64_t sat = cap + 1;
  std::vector<std::uint64_t> count(tfdp.dim(), 1);
  for (int j = tfdp.num_decisions() - 1; j >= 0; --j) {
    const DecisionPoint& dp = tfdp.decision(j);
    std::uint64_t sum = 0;
    for (int a = 0; a < dp.num_actions; ++a) sum = std::min(sat, sum + count[dp.first_sequence + a]);
    std::uint64_t& parent = count[dp.parent_sequence];
    parent = (sum != 0 && parent > sat / sum) ? sat : std::min(sat, parent * sum);
  }
  return count[kRootSequence];
}

inline constexpr std::uint64_t kDefaultEnumerationBound = 1'000'000;

/// All reduced pure strategies as 0/1 sequence-form vectors. Sequences below
/// an unchosen action are 0.
inline std::vector<Vector> enumerate_pure_strategies(const TreeFormDecisionProblem& tfdp,
                                                     std::uint64_t bound = kDefaultEnumerationBound) {
  const std::uint64_t n = count_pure_strategies(tfdp, bound);
  if (n > bound) {
    throw EnumerationLimitError("pure strategy count exceeds bound " + std::to_string(bound));
  }
  std::vector<Vector> out;
  out.reserve(n);
  Vector x = Vector::Zero(tfdp.dim());
  x(kRootSequence) = 1.0;
  // Worklist of decision points still to be decided under the current plan.
  std::vector<int> pending(tfdp.children(kRootSequence).begin(), tfdp.children(kRootSequence).end());
  std::function<void()> recurse = [&]() {
    if (pending.empty()) {
      out.push_back(x);
      return;
    }
    const int j = pending.back();
    pending.pop_back();
    const DecisionPoint& dp = tfdp.decision(j);
    for (int a = 0; a < dp.num_actions; ++a) {
      const int s = dp.first_sequence + a;
      x(s) = 1.0;
      const auto kids = tfdp.children(s);
      pending.insert(pending.end(), kids.begin(), kids.end());
      recurse();
      pending.resize(pending.size() - kids.size());
      x(s) = 0.0;
    }
    pending.push_back(j);
  };
  recurse();
  return out;
}

/// max_{x in co X} <g, x> by bottom-up dynamic programming, with the
/// maximizing pure strategy (ties go to the lowest action index).
inline std::pair<double, Vector> best_pure_response(const TreeFormDecisionProblem& tfdp,
                                                    const Vector& g) {
  if (g.size() != tfdp.dim()) throw std::invalid_argument("gradient has wrong dimension");
  Vector value = g;
  std::vector<int> best(tfdp.num_decisions(), 0);
  for (int j = tfdp.num_decisions() - 1; j >= 0; --j) {
    const DecisionPoint& dp = tfdp.decision(j);
    int arg = 0;
    for (int a = 1; a < dp.num_actions; ++a) {
      if (value(dp.first_sequence + a) > value(dp.first_sequence + arg)) arg = a;
    }
    best[j] = arg;
    value(dp.parent_sequence) += value(dp.first_sequence + arg);
  }
  Vector x = Vector::Zero(tfdp.dim());
  x(kRootSequence) = 1.0;
  for (int j = 0; j < tfdp.num_decisions(); ++j) {
    const DecisionPoint& dp = tfdp.decision(j);
    if (x(dp.parent_sequence) > 0) x(dp.first_sequence + best[j]) = 1.0;
  }
  return {value(kRootSequence), x};
}

}  // namespace utc_eq
