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
#include <stdexcept>
#include <vector>

#include "utc_eq/dag_cfr.hpp"
#include "utc_eq/deviation.hpp"
#include "utc_eq/tfdp.hpp"
#include "utc_eq/utc_dag.hpp"

namespace utc_eq {

/// Running sums that determine every linear deviation's payoff against the
/// empirical profile of play: G_bar = sum_t g_t x_t^T and v_bar = sum_t <g_t, x_t>.
struct ProfileAccumulator {
  std::vector<Matrix> G_bar;
  std::vector<Vector> g_bar;
  std::vector<double> v_bar;
  int T = 0;

  ProfileAccumulator() = default;
  explicit ProfileAccumulator(const std::vector<int>& dims) {
    for (int d : dims) {
      G_bar.push_back(Matrix::Zero(d, d));
      g_bar.push_back(Vector::Zero(d));
      v_bar.push_back(0.0);
    }
  }
  int num_players() const { return static_cast<int>(G_bar.size()); }
};

inline void accumulate(ProfileAccumulator& acc, const std::vector<Vector>& x, const std::vector<Vector>& g) {
  if (static_cast<int>(x.size()) != acc.num_players() || static_cast<int>(g.size()) != acc.num_players()) {
    throw std::invalid_argument("accumulate expects one strategy and gradient per player");
  }
  for (int i = 0; i < acc.num_players(); ++i) {
    acc.G_bar[i].noalias() += g[i] * x[i].transpose();
    acc.g_bar[i] += g[i];
    acc.v_bar[i] += g[i].dot(x[i]);
  }
  ++acc.T;
}

struct BestResponse {
  double value = 0;
  UtcDeviation argmax;
};

/// max over feasible (A, B) of <G_A, A>, by a reverse-topological pass over
/// the DAG. Ties at decision nodes go to the lowest-index edge.
inline BestResponse best_response_value(const UtcDag& dag, const Matrix& G_A) {
  if (G_A.rows() != dag.real().dim() || G_A.cols() != dag.mediator().dim()) {
    throw std::invalid_argument("gradient dimensions do not match the dag");
  }
  const int n = dag.num_nodes();
  std::vector<double> value(n, 0.0);
  std::vector<int> choice(n, -1);
  for (int v = n - 1; v >= 0; --v) {
    const UtcNode& node = dag.node(v);
    const auto edges = dag.out_edges(v);
    if (node.kind == UtcNodeKind::kDecision) {
      double best = 0;
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const double c = value[edges[k].target];
        if (choice[v] < 0 || c > best) {
          best = c;
          choice[v] = static_cast<int>(k);
        }
      }
      value[v] = best;
    } else {
      double sum = node.kind == UtcNodeKind::kSequencePair ? G_A(node.real, node.mediator) : 0.0;
      for (const auto& e : edges) sum += value[e.target];
      value[v] = sum;
    }
  }
  // Walk the greedy plan to collect its reached nodes.
  std::vector<int> reached;
  std::vector<int> stack{dag.root()};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    reached.push_back(v);
    const auto edges = dag.out_edges(v);
    if (dag.node(v).kind == UtcNodeKind::kDecision) {
      stack.push_back(edges[choice[v]].target);
    } else {
      for (const auto& e : edges) stack.push_back(e.target);
    }
  }
  return {value[dag.root()], pure_plan_to_deviation(dag, reached)};
}

inline BestResponse best_response_value(const UtcDag& dag, const DeviationGradient& G) {
  return best_response_value(dag, G.G_A);
}

struct GapReport {
  int t = 0;
  std::vector<double> gap_per_player;
  double gap_max = 0;
  double gap_sum = 0;
  std::vector<double> ext_gap_per_player;
  double ext_gap_max = 0;
};

inline std::vector<double> linear_swap_gap(const ProfileAccumulator& acc, const std::vector<const UtcDag*>& dags) {
  if (acc.T == 0) throw std::invalid_argument("linear swap gap needs at least one iteration");
  if (static_cast<int>(dags.size()) != acc.num_players()) throw std::invalid_argument("one dag per player expected");
  std::vector<double> gaps;
  for (int i = 0; i < acc.num_players(); ++i) {
    gaps.push_back((best_response_value(*dags[i], acc.G_bar[i]).value - acc.v_bar[i]) / acc.T);
  }
  return gaps;
}

/// Gap against constant deviations only: the best fixed strategy versus the
/// realized payoff.
inline std::vector<double> external_gap(const ProfileAccumulator& acc,
                                        const std::vector<const TreeFormDecisionProblem*>& tfdps) {
  if (acc.T == 0) throw std::invalid_argument("external gap needs at least one iteration");
  if (static_cast<int>(tfdps.size()) != acc.num_players()) throw std::invalid_argument("one tfdp per player expected");
  std::vector<double> gaps;
  for (int i = 0; i < acc.num_players(); ++i) {
    gaps.push_back((best_pure_response(*tfdps[i], acc.g_bar[i]).first - acc.v_bar[i]) / acc.T);
  }
  return gaps;
}

inline GapReport gap_report(const ProfileAccumulator& acc, const std::vector<const UtcDag*>& dags) {
  GapReport r;
  r.t = acc.T;
  r.gap_per_player = linear_swap_gap(acc, dags);
  std::vector<const TreeFormDecisionProblem*> tfdps;
  for (const UtcDag* d : dags) tfdps.push_back(&d->real());
  r.ext_gap_per_player = external_gap(acc, tfdps);
  r.gap_max = *std::max_element(r.gap_per_player.begin(), r.gap_per_player.end());
  for (double g : r.gap_per_player) r.gap_sum += g;
  r.ext_gap_max = *std::max_element(r.ext_gap_per_player.begin(), r.ext_gap_per_player.end());
  return r;
}

}  // namespace utc_eq
