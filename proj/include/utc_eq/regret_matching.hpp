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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace utc_eq {

enum class RmKind { kRm, kRmPlus };

/// Regret matching over a finite action set. Regret-matching+ additionally
/// clamps cumulative regrets at zero after every update.
struct LocalRegretMinimizer {
  RmKind kind = RmKind::kRmPlus;
  std::vector<double> regret;
  std::vector<double> strategy;

  LocalRegretMinimizer() = default;
  LocalRegretMinimizer(RmKind k, int num_actions)
      : kind(k), regret(num_actions, 0.0), strategy(num_actions, 1.0 / num_actions) {}

  int num_actions() const { return static_cast<int>(regret.size()); }
};

/// Proportional to the positive part of the regrets; uniform when none is
/// positive.
inline std::vector<double> rm_next_strategy(const LocalRegretMinimizer& lrm) {
  const std::size_t n = lrm.regret.size();
  std::vector<double> s(n, 0.0);
  double total = 0;
  for (std::size_t a = 0; a < n; ++a) {
    s[a] = std::max(0.0, lrm.regret[a]);
    total += s[a];
  }
  if (total > 0) {
    for (double& v : s) v /= total;
  } else {
    std::fill(s.begin(), s.end(), 1.0 / static_cast<double>(n));
  }
  return s;
}

/// Observes a utility vector against the current strategy and refreshes it.
inline void rm_observe(LocalRegretMinimizer& lrm, std::span<const double> utility) {
  if (utility.size() != lrm.regret.size()) throw std::invalid_argument("utility has wrong length");
  double expected = 0;
  for (std::size_t a = 0; a < utility.size(); ++a) expected += lrm.strategy[a] * utility[a];
  for (std::size_t a = 0; a < utility.size(); ++a) {
    lrm.regret[a] += utility[a] - expected;
    if (lrm.kind == RmKind::kRmPlus && lrm.regret[a] < 0) lrm.regret[a] = 0;
  }
  lrm.strategy = rm_next_strategy(lrm);
}

inline RmKind parse_rm_kind(const std::string& algo) {
  if (algo == "utc-cfr-rm+") return RmKind::kRmPlus;
  if (algo == "utc-cfr-rm") return RmKind::kRm;
  throw std::invalid_argument("unknown algorithm '" + algo + "' (expected utc-cfr-rm+ or utc-cfr-rm)");
}

}  // namespace utc_eq
