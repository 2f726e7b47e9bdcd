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

// Counterfactual regret minimization over a UTC decision DAG.
//
// The deviator controls every decision node and there is no chance or
// opponent inside the DAG, so a node's counterfactual action values are just
// the values of its children. Each decision node's learner observes those
// raw values; with the laminar decomposition of the utility over the DAG this
// bounds the overall regret by a sum of local regrets.

#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "utc_eq/deviation.hpp"
#include "utc_eq/regret_matching.hpp"
#include "utc_eq/utc_dag.hpp"

namespace utc_eq {

/// Linear utility over deviations: <G_A, A> + <G_B, B>, with G_B kept at zero.
struct DeviationGradient {
  Matrix G_A;
  Matrix G_B;
};

inline DeviationGradient outer_gradient(const UtcDag& dag, const Vector& g, const Vector& x) {
  return {g * x.transpose(), Matrix::Zero(dag.real().num_decisions(), dag.mediator().num_decisions())};
}

class CfrState {
 public:
  CfrState(std::shared_ptr<const UtcDag> dag, RmKind kind) : dag_(std::move(dag)) {
    if (!dag_) throw std::invalid_argument("null dag");
    learner_of_.assign(dag_->num_nodes(), -1);
    for (int v : dag_->decision_nodes()) {
      learner_of_[v] = static_cast<int>(learners_.size());
      learners_.emplace_back(kind, dag_->node(v).num_edges);
    }
  }

  const UtcDag& dag() const { return *dag_; }
  int t() const { return t_; }
  const std::vector<LocalRegretMinimizer>& learners() const { return learners_; }
  const LocalRegretMinimizer& learner_at(int node) const { return learners_.at(learner_of_.at(node)); }

  BehavioralUtcStrategy current_strategy() const {
    BehavioralUtcStrategy s{std::vector<double>(dag_->num_edges(), 1.0)};
    for (int v : dag_->decision_nodes()) {
      const UtcNode& n = dag_->node(v);
      const auto& strat = learners_[learner_of_[v]].strategy;
      for (int k = 0; k < n.num_edges; ++k) s.edge_prob[n.first_edge + k] = strat[k];
    }
    return s;
  }

  /// Observes the linear utility A -> <G_A, A>.
  void observe(const DeviationGradient& grad) {
    const UtcDag& dag = *dag_;
    if (grad.G_A.rows() != dag.real().dim() || grad.G_A.cols() != dag.mediator().dim()) {
      throw std::invalid_argument("gradient dimensions do not match the dag");
    }
    if (!grad.G_A.allFinite()) throw std::invalid_argument("non-finite gradient");
    std::vector<double> value(dag.num_nodes(), 0.0);
    std::vector<double> child_values;
    for (int v = dag.num_nodes() - 1; v >= 0; --v) {
      const UtcNode& n = dag.node(v);
      const auto edges = dag.out_edges(v);
      switch (n.kind) {
        case UtcNodeKind::kSequencePair: {
          double sum = grad.G_A(n.real, n.mediator);
          for (const auto& e : edges) sum += value[e.target];
          value[v] = sum;
          break;
        }
        case UtcNodeKind::kQueryPair: {
          double sum = 0;
          for (const auto& e : edges) sum += value[e.target];
          value[v] = sum;
          break;
        }
        case UtcNodeKind::kDecision: {
          LocalRegretMinimizer& lrm = learners_[learner_of_[v]];
          child_values.resize(edges.size());
          double ev = 0;
          for (std::size_t k = 0; k < edges.size(); ++k) {
            child_values[k] = value[edges[k].target];
            ev += lrm.strategy[k] * child_values[k];
          }
          value[v] = ev;
          rm_observe(lrm, child_values);
          break;
        }
      }
    }
    last_value_ = value[dag.root()];
    ++t_;
  }

  /// Expected utility of the strategy that was current before the last
  /// observe() call.
  double last_value() const { return last_value_; }

 private:
  std::shared_ptr<const UtcDag> dag_;
  std::vector<int> learner_of_;
  std::vector<LocalRegretMinimizer> learners_;
  int t_ = 0;
  double last_value_ = 0;
};

inline UtcDeviation cfr_recommend(const CfrState& state) {
  return behavioral_to_sequence(state.current_strategy(), state.dag());
}

inline void cfr_observe(CfrState& state, const DeviationGradient& grad) { state.observe(grad); }

}  // namespace utc_eq
