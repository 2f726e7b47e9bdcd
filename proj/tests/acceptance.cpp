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

// Acceptance suite: one PASS/FAIL line per criterion, each with its own
// tolerance and wall-clock budget. Exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "test_support.hpp"

using namespace utc_eq;
using namespace testing_support;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

int failures = 0;
int expected_hit = 0;
int unexpected_pass = 0;
std::set<std::string> expected_failures;

void criterion(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < budget_s;
  const bool pass = o.ok && in_time;
  failures += !pass;
  const bool expected = expected_failures.count(id) > 0;
  expected_hit += expected && !pass;
  unexpected_pass += expected && pass;
  std::printf("%s %s: %s (%.2fs / %.0fs budget%s) %s%s\n", id, pass ? "PASS" : "FAIL", title, s, budget_s,
              in_time ? "" : ", over budget", o.detail.c_str(),
              expected ? (pass ? " [listed as expected failure but passed]" : " [expected failure]") : "");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

TreeFormDecisionProblem single(int k) {
  TreeFormDecisionProblem t;
  std::vector<std::string> acts;
  for (int a = 0; a < k; ++a) acts.push_back("x" + std::to_string(a));
  t.add_decision(0, "J", std::span<const std::string>(acts));
  return t;
}

// Every pure deviation as the flat list of (sigma, sigma~) cells set to 1.
std::vector<std::vector<int>> pure_cells(const UtcDag& dag) {
  std::vector<std::vector<int>> out;
  const int cols = dag.mediator().dim();
  for_each_pure_deviation(dag, [&](std::span<const int> reached) {
    std::vector<int> cells;
    for (int v : reached) {
      const auto& n = dag.node(v);
      if (n.kind == UtcNodeKind::kSequencePair) cells.push_back(n.real * cols + n.mediator);
    }
    out.push_back(std::move(cells));
  });
  return out;
}

double score(const std::vector<int>& cells, const Matrix& G) {
  double v = 0;
  for (int c : cells) v += G(c / G.cols(), c % G.cols());
  return v;
}

Outcome ac1() {
  const int k = gen_kuhn(4, 5).num_terminals();
  const int l = gen_leduc(3, 3, 2).num_terminals();
  const int s = gen_sheriff(10, 2, 2).num_terminals();
  return {k == 3960 && l == 4500 && s == 2376, fmt("kuhn(4,5)=%g leduc(3,3,2)=%g sheriff(10,2,2)=%g", k, l, s)};
}

Outcome ac2() {
  std::mt19937_64 rng(2026);
  double worst_res = 0, worst_map = 0;
  for (const auto& t : {build_tfdp(gen_fig1_example(), 0), build_tfdp(gen_fig1_example(), 1),
                        build_tfdp(gen_kuhn(2, 3), 0), build_tfdp(gen_kuhn(2, 3), 1)}) {
    const auto dag = build_utc_dag(t);
    const auto pure = enumerate_pure_strategies(t);
    for (int trial = 0; trial < 200; ++trial) {
      const auto dev = behavioral_to_sequence(random_behavioral(rng, dag), dag);
      const Matrix A = canonicalize_rows(dev.A, t);
      const Matrix B = complete_matrix(A, dag);
      worst_res = std::max(worst_res, check_constraints({A, B}, dag).residual);
      for (const auto& x : pure) worst_map = std::max(worst_map, (A * x - dev.A * x).cwiseAbs().maxCoeff());
    }
  }
  return {worst_res <= 1e-9 && worst_map <= 1e-9,
          fmt("max residual %.3g, max disagreement on pure x %.3g", worst_res, worst_map)};
}

Outcome ac3() {
  std::uint64_t checked = 0, bad = 0;
  for (const auto& g : {gen_fig1_example(), gen_fig3_example()}) {
    const SequenceFormGame sf(g);
    for (int p = 0; p < 2; ++p) {
      const auto& t = sf.tfdp(p);
      const auto dag = build_utc_dag(t);
      const auto xs = enumerate_pure_strategies(t);
      std::uint64_t index = 0;
      for_each_pure_deviation(dag, [&](std::span<const int> reached) {
        // Spot-check the full constraint system on a sample; the image check
        // below covers every deviation.
        if (index++ % 997 == 0 && check_constraints(pure_plan_to_deviation(dag, reached), dag).residual != 0.0) {
          ++bad;
        }
        for (const auto& x : xs) {
          Vector y = Vector::Zero(t.dim());
          for (int v : reached) {
            const auto& n = dag.node(v);
            if (n.kind == UtcNodeKind::kSequencePair) y(n.real) += x(n.mediator);
          }
          bool zero_one = true;
          for (int s = 0; s < y.size(); ++s) zero_one &= y(s) == 0.0 || y(s) == 1.0;
          if (!zero_one || check_sequence_form(y, t) != 0.0) ++bad;
          ++checked;
        }
      });
    }
  }
  return {bad == 0, fmt("%.0f (deviation, strategy) pairs checked, %.0f failures", double(checked), double(bad))};
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

Outcome ac4() {
  auto gaps_of = [](const SequenceFormGame& sf, const std::vector<std::vector<Vector>>& profiles) {
    ProfileAccumulator acc({sf.tfdp(0).dim(), sf.tfdp(1).dim()});
    for (const auto& prof : profiles) accumulate(acc, prof, {sf.utility_gradient(0, prof), sf.utility_gradient(1, prof)});
    const auto d0 = build_utc_dag(sf.tfdp(0)), d1 = build_utc_dag(sf.tfdp(1));
    return linear_swap_gap(acc, {&d0, &d1});
  };
  const SequenceFormGame f1(gen_fig1_example());
  const auto p1 = fig1_profiles(f1);
  const auto g1 = gaps_of(f1, p1);
  const double e1 = brute_force_gap(f1, 0, p1), e1b = brute_force_gap(f1, 1, p1);
  const SequenceFormGame f3(gen_fig3_example());
  const std::vector<std::vector<Vector>> p3{
      {pure_from_labels(f3.tfdp(0), {"a1", "b1"}), pure_from_labels(f3.tfdp(1), {"c1"})},
      {pure_from_labels(f3.tfdp(0), {"a1", "b2"}), pure_from_labels(f3.tfdp(1), {"c2"})}};
  const auto g3 = gaps_of(f3, p3);
  const double e3 = brute_force_gap(f3, 0, p3);
  const bool ok = std::abs(g1[0] - 1.0 / 3) <= 1e-9 && std::abs(g1[0] - e1) <= 1e-9 && std::abs(g1[1]) <= 1e-9 &&
                  std::abs(g1[1] - e1b) <= 1e-9 && std::abs(g3[0] - 1.0) <= 1e-9 && std::abs(g3[0] - e3) <= 1e-9;
  return {ok, fmt("fig1 P1 gap %.12f (enum %.12f), fig1 P2 gap %.3g, fig3 P1 gap %.12f", g1[0], e1, g1[1], g3[0])};
}

// AC5 and AC6 share the kuhn(2,3) run.
struct KuhnRun {
  double worst_fp = 0, worst_sf = 0;
  double gap100 = -1, gap10000 = -1;
};

const KuhnRun& kuhn_run() {
  static const KuhnRun r = [] {
    KuhnRun k;
    DynamicsConfig cfg;
    cfg.iters = 10000;
    cfg.seed = 0;
    cfg.log_every = 100;
    const auto log = run_dynamics(gen_kuhn(2, 3), cfg, [&](const IterationRecord& rec) {
      for (double v : rec.fp_residual) k.worst_fp = std::max(k.worst_fp, v);
      for (double v : rec.sf_residual) k.worst_sf = std::max(k.worst_sf, v);
    });
    for (const auto& e : log) {
      if (e.gaps.t == 100) k.gap100 = e.gaps.gap_max;
      if (e.gaps.t == 10000) k.gap10000 = e.gaps.gap_max;
    }
    return k;
  }();
  return r;
}

Outcome ac5() {
  const auto& k = kuhn_run();
  return {k.worst_fp <= 1e-9 && k.worst_sf <= 1e-9,
          fmt("max ||Ax-x|| %.3g, max sequence-form residual %.3g over 10000 iterations", k.worst_fp, k.worst_sf)};
}

Outcome ac6() {
  const auto& k = kuhn_run();
  DynamicsConfig cfg;
  cfg.iters = 10000;
  cfg.log_every = 10;
  const auto log = run_dynamics(gen_fig1_example(), cfg);
  double f10 = -1, f10000 = -1;
  for (const auto& e : log) {
    if (e.gaps.t == 10) f10 = e.gaps.gap_max;
    if (e.gaps.t == 10000) f10000 = e.gaps.gap_max;
  }
  const bool ok = k.gap100 > 0 && k.gap10000 <= k.gap100 / 3 && f10 > 0 && f10000 <= 0.05 * f10;
  return {ok, fmt("kuhn gap %.4g -> %.4g (ratio %.3f); fig1 gap %.4g", k.gap100, k.gap10000, k.gap10000 / k.gap100,
                  f10) +
                  fmt(" -> %.4g (ratio %.4f)", f10000, f10000 / f10)};
}

Outcome ac7() {
  std::mt19937_64 rng(7);
  double worst = 0;
  int instances = 0;
  std::vector<TreeFormDecisionProblem> problems{build_tfdp(gen_fig1_example(), 0), build_tfdp(gen_fig1_example(), 1),
                                                build_tfdp(gen_fig3_example(), 0), build_tfdp(gen_fig3_example(), 1),
                                                single(3)};
  for (const auto& t : problems) {
    const auto dag = build_utc_dag(t);
    const auto cells = pure_cells(dag);
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix G = random_matrix(rng, t.dim(), t.dim());
      double best = -1e300;
      for (const auto& c : cells) best = std::max(best, score(c, G));
      worst = std::max(worst, std::abs(best_response_value(dag, G).value - best));
      ++instances;
    }
  }
  return {worst <= 1e-9, fmt("%.0f gradients, max |DP - enumeration| %.3g", instances, worst)};
}

// Phi-regret of DAG-CFR (RM+ at each node) and of plain RM+ over the
// pure-deviation vertices, fed the same utility stream.
std::pair<double, double> phi_regrets(std::uint64_t seed, int T) {
  const auto t = single(3);
  auto dag = std::make_shared<const UtcDag>(build_utc_dag(t));
  const auto cells = pure_cells(*dag);
  const int n = static_cast<int>(cells.size());
  CfrState cfr(dag, RmKind::kRmPlus);
  LocalRegretMinimizer vertex_rm(RmKind::kRmPlus, n);
  std::vector<double> vertex_total(n, 0.0), u(n);
  double cfr_value = 0, rm_value = 0;
  std::mt19937_64 rng(seed);
  for (int it = 0; it < T; ++it) {
    const Vector g = random_matrix(rng, t.dim(), 1);
    const Vector x = random_sequence_form(rng, t);
    const DeviationGradient G = outer_gradient(*dag, g, x);
    cfr_value += (G.G_A.array() * cfr_recommend(cfr).A.array()).sum();
    for (int v = 0; v < n; ++v) {
      u[v] = score(cells[v], G.G_A);
      vertex_total[v] += u[v];
      rm_value += vertex_rm.strategy[v] * u[v];
    }
    rm_observe(vertex_rm, u);
    cfr_observe(cfr, G);
  }
  const double best = *std::max_element(vertex_total.begin(), vertex_total.end());
  return {best - cfr_value, best - rm_value};
}

Outcome ac8() {
  const auto [r_cfr, r_rm] = phi_regrets(8, 5000);
  const double rel = std::abs(r_cfr - r_rm) / std::abs(r_rm);
  // Context only: how often other streams land inside the band.
  int within = 0;
  double mean = 0;
  for (std::uint64_t s = 100; s < 120; ++s) {
    const auto [a, b] = phi_regrets(s, 5000);
    const double r = std::abs(a - b) / std::abs(b);
    within += r <= 0.10;
    mean += r / 20;
  }
  return {rel <= 0.10, fmt("Phi-regret DAG-CFR %.4f vs vertex RM+ %.4f (relative difference %.3f);", r_cfr, r_rm,
                           rel) +
                           fmt(" other streams: %.0f/20 within 10%%, mean relative difference %.3f", within, mean)};
}

}  // namespace

// --expect-fail ID marks a criterion known not to hold for this
// implementation. It still prints FAIL, but does not fail the run; if it
// unexpectedly passes, the run fails so the list gets updated.
int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--expect-fail") expected_failures.insert(argv[++i]);
  }
  criterion("AC1", "generator golden counts", 10, ac1);
  criterion("AC2", "UTC = linear round trip", 60, ac2);
  criterion("AC3", "pure deviations map pure strategies to pure strategies", 60, ac3);
  criterion("AC4", "counterexample gaps", 10, ac4);
  criterion("AC5", "fixed-point reduction soundness", 600, ac5);
  criterion("AC6", "gap convergence", 900, ac6);
  criterion("AC7", "best-response DP equals vertex enumeration", 120, ac7);
  criterion("AC8", "single-decision DAG-CFR vs vertex regret matching", 120, ac8);
  std::printf("%d of 8 criteria failed", failures);
  if (!expected_failures.empty()) std::printf(" (%d expected)", expected_hit);
  std::printf("\n");
  return failures - expected_hit + unexpected_pass == 0 ? 0 : 1;
}
