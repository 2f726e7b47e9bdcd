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

// Sequence-form (A, B) representation of UTC deviations.
//
// A is |Sigma_X| x |Sigma_Y| and acts as the linear map x -> A x; B is
// |J_X| x |J_Y| and carries the mass routed through mediator queries. A pair
// is feasible when, for every real decision point j and mediator sequence s,
//
//   A(p_j, s) + B(j, p_s) = sum_a A(ja, s) + sum_{j~ in C_s} B(j, j~)
//
// with B(j, p_root) = 0, A(root, root) = 1, A(root, s) = 0 otherwise, and
// A, B >= 0.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "utc_eq/tfdp.hpp"
#include "utc_eq/utc_dag.hpp"

namespace utc_eq {

inline constexpr double kConstructionTolerance = 1e-12;
inline constexpr double kVerificationTolerance = 1e-9;

struct UtcDeviation {
  Matrix A;  // Sigma_X x Sigma_Y
  Matrix B;  // J_X x J_Y
};

/// Mixed deviator strategy: a probability per DAG edge. Only edges leaving
/// decision nodes are meaningful; observation edges carry 1.
struct BehavioralUtcStrategy {
  std::vector<double> edge_prob;
};

class DeviationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks that every decision node carries a distribution over its edges.
inline double behavioral_residual(const BehavioralUtcStrategy& s, const UtcDag& dag) {
  if (static_cast<int>(s.edge_prob.size()) != dag.num_edges()) {
    throw std::invalid_argument("behavioral strategy has wrong number of edges");
  }
  double r = 0;
  for (int v : dag.decision_nodes()) {
    const UtcNode& n = dag.node(v);
    double sum = 0;
    for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) {
      r = std::max(r, -s.edge_prob[e]);
      sum += s.edge_prob[e];
    }
    r = std::max(r, std::abs(sum - 1.0));
  }
  return r;
}

/// Uniform over every decision node's edges.
inline BehavioralUtcStrategy uniform_utc_strategy(const UtcDag& dag) {
  BehavioralUtcStrategy s{std::vector<double>(dag.num_edges(), 1.0)};
  for (int v : dag.decision_nodes()) {
    const UtcNode& n = dag.node(v);
    for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) s.edge_prob[e] = 1.0 / n.num_edges;
  }
  return s;
}

/// Per-node reach probability under `s`, pushed top-down in topological order.
inline std::vector<double> utc_reach(const BehavioralUtcStrategy& s, const UtcDag& dag) {
  std::vector<double> reach(dag.num_nodes(), 0.0);
  reach[dag.root()] = 1.0;
  for (int v = 0; v < dag.num_nodes(); ++v) {
    const double r = reach[v];
    if (r == 0.0) continue;
    const UtcNode& n = dag.node(v);
    const bool decides = n.kind == UtcNodeKind::kDecision;
    for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) {
      reach[dag.edge(e).target] += decides ? r * s.edge_prob[e] : r;
    }
  }
  return reach;
}

/// A(sigma, sigma~) and B(j, j~) are the reach masses of the corresponding
/// observation nodes. Pruned pairs are identically 0.
inline UtcDeviation behavioral_to_sequence(const BehavioralUtcStrategy& s, const UtcDag& dag) {
  const std::vector<double> reach = utc_reach(s, dag);
  UtcDeviation dev{Matrix::Zero(dag.real().dim(), dag.mediator().dim()),
                   Matrix::Zero(dag.real().num_decisions(), dag.mediator().num_decisions())};
  for (int v = 0; v < dag.num_nodes(); ++v) {
    const UtcNode& n = dag.node(v);
    if (n.kind == UtcNodeKind::kSequencePair) dev.A(n.real, n.mediator) = reach[v];
    if (n.kind == UtcNodeKind::kQueryPair) dev.B(n.real, n.mediator) = reach[v];
  }
  return dev;
}

struct ConstraintReport {
  double residual = 0;          // max violation over all constraints
  std::string worst;            // id of the constraint attaining it
  std::string first_violation;  // first constraint (scan order) above tolerance, or empty
};

/// Exact residuals of the (A, B) constraint system.
inline ConstraintReport check_constraints(const UtcDeviation& dev, const TreeFormDecisionProblem& real,
                                          const TreeFormDecisionProblem& mediator,
                                          double tol = kVerificationTolerance) {
  if (dev.A.rows() != real.dim() || dev.A.cols() != mediator.dim() ||
      dev.B.rows() != real.num_decisions() || dev.B.cols() != mediator.num_decisions()) {
    throw std::invalid_argument("deviation matrices do not match the decision problems");
  }
  ConstraintReport rep;
  auto note = [&](double v, auto&& id) {
    if (v > rep.residual) {
      rep.residual = v;
      rep.worst = id();
    }
    if (v > tol && rep.first_violation.empty()) rep.first_violation = id();
  };
  note(std::abs(dev.A(kRootSequence, kRootSequence) - 1.0), [] { return std::string("root A(<root>,<root>)=1"); });
  for (int s = 1; s < mediator.dim(); ++s) {
    note(std::abs(dev.A(kRootSequence, s)),
         [&] { return "root-row A(<root>," + mediator.sequence_label(s) + ")=0"; });
  }
  for (int j = 0; j < real.num_decisions(); ++j) {
    const DecisionPoint& dp = real.decision(j);
    for (int s = 0; s < mediator.dim(); ++s) {
      double lhs = dev.A(dp.parent_sequence, s);
      const int parent_dec = mediator.sequence(s).decision;
      if (parent_dec >= 0) lhs += dev.B(j, parent_dec);
      double rhs = 0;
      for (int a = 0; a < dp.num_actions; ++a) rhs += dev.A(dp.first_sequence + a, s);
      for (int jt : mediator.children(s)) rhs += dev.B(j, jt);
      note(std::abs(lhs - rhs), [&] { return "flow(" + dp.label + "," + mediator.sequence_label(s) + ")"; });
    }
  }
  for (int r = 0; r < dev.A.rows(); ++r) {
    for (int c = 0; c < dev.A.cols(); ++c) {
      note(-dev.A(r, c), [&] { return "nonneg A(" + real.sequence_label(r) + "," + mediator.sequence_label(c) + ")"; });
    }
  }
  for (int r = 0; r < dev.B.rows(); ++r) {
    for (int c = 0; c < dev.B.cols(); ++c) {
      note(-dev.B(r, c), [&] {
        return "nonneg B(" + real.decision(r).label + "," + mediator.decision(c).label + ")";
      });
    }
  }
  return rep;
}

inline ConstraintReport check_constraints(const UtcDeviation& dev, const UtcDag& dag,
                                          double tol = kVerificationTolerance) {
  return check_constraints(dev, dag.real(), dag.mediator(), tol);
}

/// phi(x) = A x, after checking both inputs against the input tolerance.
inline Vector apply_deviation(const UtcDeviation& dev, const UtcDag& dag, const Vector& x,
                              double tol = 1e-6) {
  const ConstraintReport rep = check_constraints(dev, dag, tol);
  if (rep.residual > tol) throw DeviationError("deviation infeasible: " + rep.worst);
  const double rx = check_sequence_form(x, dag.mediator());
  if (rx > tol) throw DeviationError("input strategy infeasible (residual " + std::to_string(rx) + ")");
  return dev.A * x;
}

/// Rewrites each row c of `raw` (a functional on the mediator's strategies)
/// into the unique equivalent form with c >= 0 and min_a c(j~a) = 0 at every
/// mediator decision point, by pushing minima up bottom-to-top.
inline Matrix canonicalize_rows(const Matrix& raw, const TreeFormDecisionProblem& mediator) {
  if (raw.cols() != mediator.dim()) throw std::invalid_argument("row length does not match mediator dimension");
  Matrix out = raw;
  for (int r = 0; r < out.rows(); ++r) {
    for (int jt = mediator.num_decisions() - 1; jt >= 0; --jt) {
      const DecisionPoint& dp = mediator.decision(jt);
      double m = std::numeric_limits<double>::infinity();
      for (int a = 0; a < dp.num_actions; ++a) m = std::min(m, out(r, dp.first_sequence + a));
      for (int a = 0; a < dp.num_actions; ++a) out(r, dp.first_sequence + a) -= m;
      out(r, dp.parent_sequence) += m;
    }
    if (out(r, kRootSequence) < -kVerificationTolerance) {
      throw DeviationError("row " + std::to_string(r) + " is negative on some pure strategy");
    }
  }
  return out;
}

/// Builds B for a row-canonical A so that (A, B) is feasible. For each real
/// decision point j, mediator decision points are visited leaf-to-root:
///   B~(j, s)  = sum_a A(ja, s) + sum_{j~ in C_s} B(j, j~) - A(p_j, s)
///   B(j, j~)  = min_a B~(j, j~a)
inline Matrix complete_matrix(const Matrix& A, const TreeFormDecisionProblem& real,
                              const TreeFormDecisionProblem& mediator) {
  if (A.rows() != real.dim() || A.cols() != mediator.dim()) {
    throw std::invalid_argument("A does not match the decision problems");
  }
  Matrix B = Matrix::Zero(real.num_decisions(), mediator.num_decisions());
  for (int j = 0; j < real.num_decisions(); ++j) {
    const DecisionPoint& dp = real.decision(j);
    auto b_tilde = [&](int s) {
      double v = -A(dp.parent_sequence, s);
      for (int a = 0; a < dp.num_actions; ++a) v += A(dp.first_sequence + a, s);
      for (int jt : mediator.children(s)) v += B(j, jt);
      return v;
    };
    for (int jt = mediator.num_decisions() - 1; jt >= 0; --jt) {
      const DecisionPoint& mp = mediator.decision(jt);
      double m = std::numeric_limits<double>::infinity();
      for (int a = 0; a < mp.num_actions; ++a) m = std::min(m, b_tilde(mp.first_sequence + a));
      if (m < -kVerificationTolerance) {
        throw DeviationError("A does not map the mediator polytope into the real one (B(" + dp.label + "," +
                             mp.label + ") = " + std::to_string(m) + ")");
      }
      B(j, jt) = m;
    }
    // Nothing sits above the mediator root, so its slack must vanish.
    const double root_slack = b_tilde(kRootSequence);
    if (std::abs(root_slack) > kVerificationTolerance) {
      throw DeviationError("A does not map the mediator polytope into the real one (flow at " + dp.label +
                           " off by " + std::to_string(root_slack) + ")");
    }
  }
  return B;
}

inline Matrix complete_matrix(const Matrix& A, const UtcDag& dag) {
  return complete_matrix(A, dag.real(), dag.mediator());
}

/// Number of pure deviator plans, saturating at UINT64_MAX.
inline std::uint64_t count_pure_deviations(const UtcDag& dag) {
  constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> count(dag.num_nodes(), 1);
  for (int v = dag.num_nodes() - 1; v >= 0; --v) {
    const UtcNode& n = dag.node(v);
    if (n.num_edges == 0) continue;
    const auto edges = dag.out_edges(v);
    if (n.kind == UtcNodeKind::kDecision) {
      std::uint64_t sum = 0;
      for (const auto& e : edges) sum = (kSat - sum < count[e.target]) ? kSat : sum + count[e.target];
      count[v] = sum;
    } else {
      std::uint64_t prod = 1;
      for (const auto& e : edges) {
        const std::uint64_t c = count[e.target];
        prod = (c != 0 && prod > kSat / c) ? kSat : prod * c;
      }
      count[v] = prod;
    }
  }
  return count[dag.root()];
}

/// Streams every pure deviator plan as the list of DAG nodes it reaches.
/// Under a pure plan each node is reached along at most one path, so the list
/// has no duplicates.
inline void for_each_pure_deviation(const UtcDag& dag, const std::function<void(std::span<const int>)>& visit) {
  std::vector<int> frontier{dag.root()};
  std::vector<int> reached;
  std::function<void()> step = [&]() {
    if (frontier.empty()) {
      visit(reached);
      return;
    }
    const int v = frontier.back();
    frontier.pop_back();
    reached.push_back(v);
    const UtcNode& n = dag.node(v);
    const auto edges = dag.out_edges(v);
    if (n.kind == UtcNodeKind::kDecision) {
      for (const auto& e : edges) {
        frontier.push_back(e.target);
        step();
        frontier.pop_back();
      }
    } else {
      for (const auto& e : edges) frontier.push_back(e.target);
      step();
      frontier.resize(frontier.size() - edges.size());
    }
    reached.pop_back();
    frontier.push_back(v);
  };
  step();
}

/// 0/1 (A, B) of a pure plan given its reached nodes.
inline UtcDeviation pure_plan_to_deviation(const UtcDag& dag, std::span<const int> reached) {
  UtcDeviation dev{Matrix::Zero(dag.real().dim(), dag.mediator().dim()),
                   Matrix::Zero(dag.real().num_decisions(), dag.mediator().num_decisions())};
  for (int v : reached) {
    const UtcNode& n = dag.node(v);
    if (n.kind == UtcNodeKind::kSequencePair) dev.A(n.real, n.mediator) = 1.0;
    if (n.kind == UtcNodeKind::kQueryPair) dev.B(n.real, n.mediator) = 1.0;
  }
  return dev;
}

inline std::vector<UtcDeviation> enumerate_pure_deviations(const UtcDag& dag,
                                                           std::uint64_t bound = kDefaultEnumerationBound) {
  const std::uint64_t n = count_pure_deviations(dag);
  if (n > bound) {
    throw EnumerationLimitError("pure deviation count " + std::to_string(n) + " exceeds bound " +
                                std::to_string(bound));
  }
  std::vector<UtcDeviation> out;
  out.reserve(n);
  for_each_pure_deviation(dag, [&](std::span<const int> reached) { out.push_back(pure_plan_to_deviation(dag, reached)); });
  return out;
}

/// Never queries; plays the behavioral strategy induced by x0 (uniform where
/// x0 does not reach). Represents the constant map x -> x0.
inline BehavioralUtcStrategy constant_utc_strategy(const UtcDag& dag, const Vector& x0) {
  const TreeFormDecisionProblem& real = dag.real();
  BehavioralUtcStrategy s{std::vector<double>(dag.num_edges(), 1.0)};
  for (int v : dag.decision_nodes()) {
    const UtcNode& n = dag.node(v);
    const DecisionPoint& dp = real.decision(n.real);
    const double mass = x0(dp.parent_sequence);
    for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) {
      const UtcEdge& edge = dag.edge(e);
      if (edge.kind == UtcEdgeKind::kPlay) {
        s.edge_prob[e] = mass > 0 ? x0(dp.first_sequence + edge.label) / mass : 1.0 / dp.num_actions;
      } else {
        s.edge_prob[e] = 0.0;
      }
    }
  }
  return s;
}

/// Query the current decision point and obey. Requires the real and mediator
/// problems to be the same; represents the identity map.
inline BehavioralUtcStrategy identity_utc_strategy(const UtcDag& dag) {
  const TreeFormDecisionProblem& real = dag.real();
  const TreeFormDecisionProblem& med = dag.mediator();
  if (real.dim() != med.dim() || real.num_decisions() != med.num_decisions()) {
    throw std::invalid_argument("identity deviation needs identical real and mediator problems");
  }
  BehavioralUtcStrategy s = uniform_utc_strategy(dag);
  for (int v : dag.decision_nodes()) {
    const UtcNode& n = dag.node(v);
    const DecisionPoint& dp = real.decision(n.real);
    int chosen = -1;
    for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) {
      const UtcEdge& edge = dag.edge(e);
      const bool ask = edge.kind == UtcEdgeKind::kQuery && edge.label == n.real && n.mediator == dp.parent_sequence;
      const bool obey = edge.kind == UtcEdgeKind::kPlay && n.mediator == dp.first_sequence + edge.label;
      if (ask || obey) chosen = e;
    }
    if (chosen < 0) continue;  // off the identity path; never reached
    for (int e = n.first_edge; e < n.first_edge + n.num_edges; ++e) s.edge_prob[e] = e == chosen ? 1.0 : 0.0;
  }
  return s;
}

/// Debug export: {"A": {"rows", "cols", "data"}, "B": {...}, "residual"}.
inline nlohmann::json deviation_to_json(const UtcDeviation& dev, const UtcDag& dag) {
  auto dense = [](const Matrix& m, std::vector<std::string> rows, std::vector<std::string> cols) {
    nlohmann::json data = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
      std::vector<double> row(m.cols());
      for (int c = 0; c < m.cols(); ++c) row[c] = m(r, c);
      data.push_back(row);
    }
    return nlohmann::json{{"rows", rows}, {"cols", cols}, {"data", data}};
  };
  std::vector<std::string> sx, sy, jx, jy;
  for (int s = 0; s < dag.real().dim(); ++s) sx.push_back(dag.real().sequence_label(s));
  for (int s = 0; s < dag.mediator().dim(); ++s) sy.push_back(dag.mediator().sequence_label(s));
  for (const auto& d : dag.real().decisions()) jx.push_back(d.label);
  for (const auto& d : dag.mediator().decisions()) jy.push_back(d.label);
  return {{"A", dense(dev.A, sx, sy)},
          {"B", dense(dev.B, jx, jy)},
          {"residual", check_constraints(dev, dag).residual}};
}

}  // namespace utc_eq
