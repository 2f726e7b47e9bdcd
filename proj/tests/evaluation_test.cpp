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

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace utc_eq;
using namespace testing_support;

namespace {

TreeFormDecisionProblem single(int k) {
  TreeFormDecisionProblem t;
  std::vector<std::string> acts;
  for (int a = 0; a < k; ++a) acts.push_back("x" + std::to_string(a));
  t.add_decision(0, "J", std::span<const std::string>(acts));
  return t;
}

// Simultaneous coordination game; (x, u) is a strict equilibrium.
ExtensiveFormGame coordination() {
  GameBuilder b(2);
  const int r = b.decision(0, "R", {"x", "y"});
  const std::vector<std::vector<double>> pay{{2, 2}, {0, 0}, {0, 0}, {1, 1}};
  for (int a = 0; a < 2; ++a) {
    const int s = b.decision(1, "S", {"u", "v"});
    for (int c = 0; c < 2; ++c) b.set_child(s, c, b.terminal(pay[2 * a + c]));
    b.set_child(r, a, s);
  }
  return b.build(r);
}

ProfileAccumulator accumulate_profiles(const SequenceFormGame& sf, const std::vector<std::vector<Vector>>& profiles) {
  std::vector<int> dims;
  for (int p = 0; p < sf.num_players(); ++p) dims.push_back(sf.tfdp(p).dim());
  ProfileAccumulator acc(dims);
  for (const auto& prof : profiles) {
    std::vector<Vector> g;
    for (int p = 0; p < sf.num_players(); ++p) g.push_back(sf.utility_gradient(p, prof));
    accumulate(acc, prof, g);
  }
  return acc;
}

std::vector<std::vector<Vector>> fig1_profiles(const SequenceFormGame& sf) {
  std::vector<std::vector<Vector>> out;
  for (int i = 1; i <= 2; ++i) {
    for (int j = 1; j <= 2; ++j) {
      const std::string si = std::to_string(i), sj = std::to_string(j);
      out.push_back({pure_from_labels(sf.tfdp(0), {"a" + si, "b" + sj, "c1"}),
                     pure_from_labels(sf.tfdp(1), {"f" + si, "g" + sj})});
    }
  }
  return out;
}

std::vector<std::vector<Vector>> fig3_profiles(const SequenceFormGame& sf) {
  return {{pure_from_labels(sf.tfdp(0), {"a1", "b1"}), pure_from_labels(sf.tfdp(1), {"c1"})},
          {pure_from_labels(sf.tfdp(0), {"a1", "b2"}), pure_from_labels(sf.tfdp(1), {"c2"})}};
}

std::vector<const UtcDag*> ptrs(const std::vector<UtcDag>& d) {
  std::vector<const UtcDag*> out;
  for (const auto& x : d) out.push_back(&x);
  return out;
}

}  // namespace

TEST(Accumulate, ZeroGradientLeavesSums) {
  ProfileAccumulator acc({3});
  const std::vector<Vector> x{Vector::Ones(3)}, g{Vector::Zero(3)};
  accumulate(acc, x, g);
  EXPECT_TRUE(acc.G_bar[0].isZero());
  EXPECT_EQ(acc.T, 1);
}

TEST(Accumulate, TwoIdenticalCallsDouble) {
  std::mt19937_64 rng(51);
  ProfileAccumulator acc({4}), once({4});
  const std::vector<Vector> x{Vector::Random(4)}, g{Vector::Random(4)};
  accumulate(once, x, g);
  accumulate(acc, x, g);
  accumulate(acc, x, g);
  EXPECT_EQ(acc.G_bar[0], 2 * once.G_bar[0]);
  EXPECT_EQ(acc.v_bar[0], 2 * once.v_bar[0]);
  EXPECT_EQ(acc.T, 2);
}

TEST(Accumulate, TraceMatchesRealizedValue) {
  std::mt19937_64 rng(52);
  const SequenceFormGame sf(gen_kuhn(2, 3));
  ProfileAccumulator acc({sf.tfdp(0).dim(), sf.tfdp(1).dim()});
  for (int t = 0; t < 50; ++t) {
    std::vector<Vector> x{random_sequence_form(rng, sf.tfdp(0)), random_sequence_form(rng, sf.tfdp(1))};
    accumulate(acc, x, {sf.utility_gradient(0, x), sf.utility_gradient(1, x)});
  }
  for (int p = 0; p < 2; ++p) EXPECT_NEAR(acc.G_bar[p].trace(), acc.v_bar[p], 1e-6 * acc.T);
}

TEST(Accumulate, WrongArityThrows) {
  ProfileAccumulator acc({2, 2});
  EXPECT_THROW(accumulate(acc, {Vector::Ones(2)}, {Vector::Ones(2)}), std::invalid_argument);
}

TEST(BestResponse, ZeroGradient) {
  const auto dag = build_utc_dag(build_tfdp(gen_fig1_example(), 0));
  EXPECT_EQ(best_response_value(dag, Matrix::Zero(11, 11)).value, 0.0);
}

TEST(BestResponse, MatchesEnumerationOnSmallDags) {
  std::mt19937_64 rng(53);
  for (const auto& t : {single(2), single(3), build_tfdp(gen_fig3_example(), 0), build_tfdp(gen_fig3_example(), 1),
                        build_tfdp(gen_fig1_example(), 1)}) {
    const auto dag = build_utc_dag(t);
    const auto verts = enumerate_pure_deviations(dag);
    for (int trial = 0; trial < 30; ++trial) {
      const Matrix G = random_matrix(rng, t.dim(), t.dim());
      double best = -1e300;
      for (const auto& d : verts) best = std::max(best, (G.array() * d.A.array()).sum());
      const auto br = best_response_value(dag, G);
      EXPECT_NEAR(br.value, best, 1e-9);
      EXPECT_EQ(check_constraints(br.argmax, dag).residual, 0.0);
      EXPECT_NEAR((G.array() * br.argmax.A.array()).sum(), br.value, 1e-9);
    }
  }
}

TEST(BestResponse, MatchesStreamedEnumerationOnLargerDags) {
  std::mt19937_64 rng(54);
  for (const auto& t : {build_tfdp(gen_fig1_example(), 0), build_tfdp(gen_kuhn(2, 3), 0)}) {
    const auto dag = build_utc_dag(t);
    const Matrix G = random_matrix(rng, t.dim(), t.dim());
    EXPECT_NEAR(best_response_value(dag, G).value, brute_force_best(dag, G), 1e-9);
  }
}

TEST(BestResponse, TiesGoToLowestEdge) {
  const auto dag = build_utc_dag(single(2));
  // All-zero gradient: every plan scores 0; the lowest edge plays x0 unqueried.
  const auto br = best_response_value(dag, Matrix::Zero(3, 3));
  EXPECT_EQ(br.argmax.A(1, 0), 1.0);
  EXPECT_TRUE(br.argmax.B.isZero());
}

TEST(LinearSwapGap, Fig1Counterexample) {
  const SequenceFormGame sf(gen_fig1_example());
  const auto profiles = fig1_profiles(sf);
  const auto acc = accumulate_profiles(sf, profiles);
  std::vector<UtcDag> dags{build_utc_dag(sf.tfdp(0)), build_utc_dag(sf.tfdp(1))};
  const auto gaps = linear_swap_gap(acc, ptrs(dags));
  EXPECT_NEAR(gaps[0], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(gaps[1], 0.0, 1e-9);
  EXPECT_NEAR(gaps[0], brute_force_gap(sf, 0, profiles), 1e-9);
  EXPECT_NEAR(gaps[1], brute_force_gap(sf, 1, profiles), 1e-9);
  // The ask-later deviation alone already earns the whole gap.
  const auto dev = behavioral_to_sequence(fig1_deviation(dags[0]), dags[0]);
  EXPECT_NEAR(((acc.G_bar[0].array() * dev.A.array()).sum() - acc.v_bar[0]) / acc.T, 1.0 / 3.0, 1e-12);
}

TEST(LinearSwapGap, Fig3Counterexample) {
  const SequenceFormGame sf(gen_fig3_example());
  const auto profiles = fig3_profiles(sf);
  const auto acc = accumulate_profiles(sf, profiles);
  std::vector<UtcDag> dags{build_utc_dag(sf.tfdp(0)), build_utc_dag(sf.tfdp(1))};
  const auto gaps = linear_swap_gap(acc, ptrs(dags));
  EXPECT_NEAR(gaps[0], 1.0, 1e-9);
  EXPECT_NEAR(gaps[0], brute_force_gap(sf, 0, profiles), 1e-9);
  const auto dev = behavioral_to_sequence(fig3_deviation(dags[0]), dags[0]);
  EXPECT_NEAR(((acc.G_bar[0].array() * dev.A.array()).sum() - acc.v_bar[0]) / acc.T, 1.0, 1e-12);
  // No constant deviation helps here: c is uncorrelated with a.
  const auto ext = external_gap(acc, {&sf.tfdp(0), &sf.tfdp(1)});
  EXPECT_NEAR(ext[0], 0.0, 1e-12);
}

TEST(LinearSwapGap, StrictEquilibriumHasZeroGap) {
  const SequenceFormGame sf(coordination());
  const auto acc = accumulate_profiles(
      sf, {{pure_from_labels(sf.tfdp(0), {"x"}), pure_from_labels(sf.tfdp(1), {"u"})}});
  std::vector<UtcDag> dags{build_utc_dag(sf.tfdp(0)), build_utc_dag(sf.tfdp(1))};
  for (double g : linear_swap_gap(acc, ptrs(dags))) EXPECT_NEAR(g, 0.0, 1e-9);
}

TEST(LinearSwapGap, EmptyAccumulatorThrows) {
  ProfileAccumulator acc({3});
  const auto dag = build_utc_dag(single(2));
  EXPECT_THROW(linear_swap_gap(acc, {&dag}), std::invalid_argument);
  EXPECT_THROW(external_gap(acc, {&dag.real()}), std::invalid_argument);
}

TEST(ExternalGap, ZeroGradients) {
  ProfileAccumulator acc({3});
  accumulate(acc, {(Vector(3) << 1, 1, 0).finished()}, {Vector::Zero(3)});
  const auto t = single(2);
  EXPECT_EQ(external_gap(acc, {&t})[0], 0.0);
}

TEST(ExternalGap, MatchesPureEnumerationAndIsDominated) {
  std::mt19937_64 rng(55);
  const SequenceFormGame sf(gen_kuhn(2, 3));
  std::vector<UtcDag> dags{build_utc_dag(sf.tfdp(0)), build_utc_dag(sf.tfdp(1))};
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<Vector>> profiles;
    for (int k = 0; k < 4; ++k) {
      profiles.push_back({random_sequence_form(rng, sf.tfdp(0)), random_sequence_form(rng, sf.tfdp(1))});
    }
    const auto acc = accumulate_profiles(sf, profiles);
    const auto ext = external_gap(acc, {&sf.tfdp(0), &sf.tfdp(1)});
    const auto lin = linear_swap_gap(acc, ptrs(dags));
    for (int p = 0; p < 2; ++p) {
      double best = -1e300;
      for (const auto& x : enumerate_pure_strategies(sf.tfdp(p))) best = std::max(best, acc.g_bar[p].dot(x));
      EXPECT_NEAR(ext[p], (best - acc.v_bar[p]) / acc.T, 1e-12);
      EXPECT_GE(ext[p], -1e-9);
      EXPECT_LE(ext[p], lin[p] + 1e-9);
    }
  }
}

TEST(GapReport, AggregatesMaxAndSum) {
  const SequenceFormGame sf(gen_fig1_example());
  const auto acc = accumulate_profiles(sf, fig1_profiles(sf));
  std::vector<UtcDag> dags{build_utc_dag(sf.tfdp(0)), build_utc_dag(sf.tfdp(1))};
  const auto r = gap_report(acc, ptrs(dags));
  EXPECT_EQ(r.t, 4);
  EXPECT_NEAR(r.gap_max, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.gap_sum, 1.0 / 3.0, 1e-9);
  EXPECT_LE(r.ext_gap_max, r.gap_max + 1e-9);
  const auto j = gap_report_to_json(r);
  for (const char* k : {"t", "gap_per_player", "gap_max", "gap_sum", "ext_gap_per_player"}) EXPECT_TRUE(j.contains(k));
}
