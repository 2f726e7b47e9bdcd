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

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "utc_eq/harness.hpp"

namespace {

// Flags shared by the default run and by bench (which takes --game separately).
void add_run_flags(CLI::App& app, utc_eq::RunConfig& c) {
  app.add_option("--algo", c.algo, "utc-cfr-rm+ or utc-cfr-rm");
  app.add_option("--iters", c.iters, "iteration limit");
  app.add_option("--time-limit", c.time_limit, "wall-clock limit in seconds (0 = none)");
  app.add_option("--seed", c.seed, "recorded seed");
  app.add_option("--eps-fp", c.eps_fp, "fixed-point tolerance");
  app.add_option("--log-every", c.log_every, "gap evaluation cadence");
  app.add_flag("--no-timing", c.no_timing, "write zeros in timing columns");
  app.add_flag("--normalize", c.normalize, "rescale utilities to [0,1]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear correlated equilibrium dynamics via untimed-communication deviations"};
  app.require_subcommand(0, 1);

  utc_eq::RunConfig run_cfg;
  app.add_option("--game", run_cfg.game, "kuhn[:P=..,D=..] | leduc[:P,R,S] | sheriff[:N,B,R] | fig1 | fig3 | file:PATH");
  add_run_flags(app, run_cfg);
  app.add_option("--out", run_cfg.out, "CSV output path; the summary is written beside it as <stem>.summary.json");
  app.add_option("--export-deviation", run_cfg.deviation_out, "write the final recommended deviations as JSON");

  utc_eq::RunConfig bench_cfg;
  std::vector<std::string> bench_games;
  std::string bench_json_path;
  CLI::App* bench = app.add_subcommand("bench", "time iterations for one or more games");
  add_run_flags(*bench, bench_cfg);
  bench->add_option("--game", bench_games, "game specs (repeatable)")->required();
  bench->add_option("--json", bench_json_path, "write machine-readable results here");

  std::string export_spec, export_out;
  CLI::App* exp = app.add_subcommand("export-game", "write a generated game as JSON");
  exp->add_option("--game", export_spec)->required();
  exp->add_option("--out", export_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : utc_eq::kExitConfig;
  }

  if (*bench) {
    std::vector<utc_eq::RunConfig> configs;
    for (const auto& g : bench_games) {
      utc_eq::RunConfig c = bench_cfg;
      c.game = g;
      configs.push_back(c);
    }
    const auto rows = utc_eq::bench(configs);
    std::cout << utc_eq::bench_table(rows);
    if (!bench_json_path.empty()) std::ofstream(bench_json_path) << utc_eq::bench_json(rows).dump(2) << "\n";
    for (const auto& r : rows) {
      if (r.exit_code != 0) return r.exit_code;
    }
    return 0;
  }

  if (*exp) {
    try {
      utc_eq::save_game(utc_eq::make_game(export_spec), export_out);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return utc_eq::kExitConfig;
    }
    return 0;
  }

  const utc_eq::RunResult r = utc_eq::run(run_cfg);
  if (r.exit_code != utc_eq::kExitOk) {
    std::cerr << "error: " << r.message << "\n";
    return r.exit_code;
  }
  if (!r.log.empty()) {
    const auto& g = r.log.back().gaps;
    std::cout << "iterations=" << r.iterations << " terminated_by=" << r.terminated_by << " gap_max=" << g.gap_max
              << " gap_sum=" << g.gap_sum << " ext_gap_max=" << g.ext_gap_max << "\n";
  }
  return 0;
}
