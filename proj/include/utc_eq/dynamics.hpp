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
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "utc_eq/dag_cfr.hpp"
#include "utc_eq/evaluation.hpp"
#include "utc_eq/fixed_point.hpp"
#include "utc_eq/sequence_form.hpp"

namespace utc_eq {

struct DynamicsConfig {
  int iters = 1000;
  std::string algo = "utc-cfr-rm+";
  std::uint64_t seed = 0;  // recorded for provenance; the dynamics are deterministic
  double eps_fp = 1e-9;
  bool normalize_utils = false;
  int log_every = 50;
};

/// Raised when an iteration violates the fixed-point or feasibility contract,
/// or when a component fails; carries the 1-based iteration index.
class DynamicsError : public std::runtime_error {
 public:
  DynamicsError(int t, const std::string& what, bool numerical)
      : std::runtime_error("iteration " + std::to_string(t) + ": " + what), t_(t), numerical_(numerical) {}
  int iteration() const { return t_; }
  bool numerical() const { return numerical_; }

 private:
  int t_;
  bool numerical_;
};

struct IterationRecord {
  int t = 0;
  std::vector<double> fp_residual;  // ||A x - x|| per player
  std::vector<double> sf_residual;  // sequence-form residual per player
  std::vector<Vector> x;
  std::vector<Vector> g;
  double iter_ms = 0;
};

/// Worker count for per-player steps: UTC_EQ_THREADS if set, else the
/// hardware concurrency, never more than `work`.
inline int worker_count(int work) {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("UTC_EQ_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = cap;
  }
  return std::max(1, std::min(n, work));
}

template <typename F>
void parallel_for(int count, F&& body) {
  const int workers = worker_count(count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Self-play where every player runs the fixed-point reduction on top of
/// DAG-CFR over its own UTC decision problem. Updates are simultaneous.
class Dynamics {
 public:
  Dynamics(const ExtensiveFormGame& game, DynamicsConfig config)
      : config_(std::move(config)),
        game_(config_.normalize_utils ? game.normalized() : game),
        kind_(parse_rm_kind(config_.algo)) {
    if (!(config_.eps_fp > 0)) throw std::invalid_argument("eps_fp must be positive");
    std::vector<int> dims;
    for (int p = 0; p < game_.num_players(); ++p) {
      dags_.push_back(std::make_shared<const UtcDag>(build_utc_dag(game_.tfdp(p))));
      cfr_.emplace_back(dags_.back(), kind_);
      dims.push_back(game_.tfdp(p).dim());
    }
    acc_ = ProfileAccumulator(dims);
  }

  const SequenceFormGame& game() const { return game_; }
  const DynamicsConfig& config() const { return config_; }
  const ProfileAccumulator& accumulator() const { return acc_; }
  const CfrState& cfr(int p) const { return cfr_.at(p); }
  const UtcDag& dag(int p) const { return *dags_.at(p); }
  int t() const { return acc_.T; }

  std::vector<const UtcDag*> dag_ptrs() const {
    std::vector<const UtcDag*> out;
    for (const auto& d : dags_) out.push_back(d.get());
    return out;
  }

  GapReport gaps() const { return gap_report(acc_, dag_ptrs()); }

  IterationRecord step() {
    const auto start = std::chrono::steady_clock::now();
    const int n = game_.num_players();
    const int t = acc_.T + 1;
    IterationRecord rec;
    rec.t = t;
    rec.x.resize(n);
    rec.g.resize(n);
    rec.fp_residual.resize(n);
    rec.sf_residual.resize(n);
    std::vector<Matrix> A(n);
    FixedPointOptions opt;
    opt.eps = config_.eps_fp;
    try {
      parallel_for(n, [&](int p) {
        const UtcDeviation phi = cfr_recommend(cfr_[p]);
        rec.x[p] = fixed_point(phi, game_.tfdp(p), opt);
        A[p] = phi.A;
      });
    } catch (const FixedPointError& e) {
      throw DynamicsError(t, e.what(), true);
    } catch (const std::exception& e) {
      throw DynamicsError(t, e.what(), false);
    }
    for (int p = 0; p < n; ++p) {
      rec.fp_residual[p] = (A[p] * rec.x[p] - rec.x[p]).cwiseAbs().maxCoeff();
      rec.sf_residual[p] = check_sequence_form(rec.x[p], game_.tfdp(p));
      if (rec.fp_residual[p] > config_.eps_fp || rec.sf_residual[p] > config_.eps_fp) {
        throw DynamicsError(t, "player " + std::to_string(p) + " fixed point residual " +
                                   std::to_string(std::max(rec.fp_residual[p], rec.sf_residual[p])) +
                                   " exceeds eps_fp",
                            true);
      }
    }
    for (int p = 0; p < n; ++p) rec.g[p] = game_.utility_gradient(p, rec.x);
    parallel_for(n, [&](int p) { cfr_observe(cfr_[p], outer_gradient(*dags_[p], rec.g[p], rec.x[p])); });
    accumulate(acc_, rec.x, rec.g);
    rec.iter_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
  }

 private:
  DynamicsConfig config_;
  SequenceFormGame game_;
  RmKind kind_;
  std::vector<std::shared_ptr<const UtcDag>> dags_;
  std::vector<CfrState> cfr_;
  ProfileAccumulator acc_;
};

struct RunLogEntry {
  GapReport gaps;
  double fp_residual_max = 0;  // over the iterations since the previous entry
};

/// Runs `config.iters` iterations, evaluating gaps every `log_every`
/// iterations and after the last one. `on_iteration` sees every iteration.
inline std::vector<RunLogEntry> run_dynamics(const ExtensiveFormGame& game, const DynamicsConfig& config,
                                             const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  if (config.iters < 1 || config.log_every < 1) throw std::invalid_argument("iters and log_every must be >= 1");
  Dynamics dyn(game, config);
  std::vector<RunLogEntry> log;
  double window_max = 0;
  for (int t = 1; t <= config.iters; ++t) {
    const IterationRecord rec = dyn.step();
    if (on_iteration) on_iteration(rec);
    for (double r : rec.fp_residual) window_max = std::max(window_max, r);
    if (t % config.log_every == 0 || t == config.iters) {
      log.push_back({dyn.gaps(), window_max});
      window_max = 0;
    }
  }
  return log;
}

}  // namespace utc_eq
