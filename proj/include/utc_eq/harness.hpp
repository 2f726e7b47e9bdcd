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

// Experiment harness behind the command-line tool: runs the dynamics with
// periodic gap evaluation, writes the CSV log and the JSON summary, and
// times batches of runs.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "utc_eq/dynamics.hpp"
#include "utc_eq/game_io.hpp"

namespace utc_eq {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitResource = 4 };

struct RunConfig {
  std::string game = "kuhn";
  std::string algo = "utc-cfr-rm+";
  int iters = 1000;
  double time_limit = 0;  // seconds; 0 disables
  std::uint64_t seed = 0;
  double eps_fp = 1e-9;
  int log_every = 50;
  std::string out;  // CSV path; empty disables file output
  bool no_timing = false;
  bool normalize = false;
  std::string deviation_out;  // optional JSON export of the final recommendations
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::string terminated_by;  // "iterations" or "time_limit"
  int iterations = 0;
  std::vector<double> iter_ms;
  std::vector<RunLogEntry> log;
  nlohmann::json summary;
};

inline nlohmann::json gap_report_to_json(const GapReport& r) {
  return {{"t", r.t},
          {"gap_per_player", r.gap_per_player},
          {"gap_max", r.gap_max},
          {"gap_sum", r.gap_sum},
          {"ext_gap_per_player", r.ext_gap_per_player}};
}

inline std::string csv_header(int players) {
  std::string h = "t,wall_ms,iter_ms_mean,iter_ms_std,gap_max,gap_sum";
  for (int p = 1; p <= players; ++p) h += ",gap_p" + std::to_string(p);
  return h + ",ext_gap_max,fp_residual_max";
}

/// Path of the summary written next to a CSV: "run.csv" -> "run.summary.json".
inline std::string summary_path(const std::string& csv) {
  std::filesystem::path p(csv);
  p.replace_extension(".summary.json");
  return p.string();
}

inline void validate(const RunConfig& c) {
  if (c.iters < 1) throw ConfigError("--iters must be >= 1");
  if (c.log_every < 1) throw ConfigError("--log-every must be >= 1");
  if (c.time_limit < 0) throw ConfigError("--time-limit must be positive");
  if (!(c.eps_fp > 0)) throw ConfigError("--eps-fp must be positive");
  if (c.algo != "utc-cfr-rm+" && c.algo != "utc-cfr-rm") {
    throw ConfigError("unknown --algo '" + c.algo + "' (expected utc-cfr-rm+ or utc-cfr-rm)");
  }
}

inline std::pair<double, double> mean_std(const std::vector<double>& v, std::size_t from = 0) {
  if (v.size() <= from) return {0.0, 0.0};
  double sum = 0;
  for (std::size_t i = from; i < v.size(); ++i) sum += v[i];
  const double n = static_cast<double>(v.size() - from);
  const double mean = sum / n;
  double sq = 0;
  for (std::size_t i = from; i < v.size(); ++i) sq += (v[i] - mean) * (v[i] - mean);
  return {mean, std::sqrt(sq / n)};
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Never throws: failures are mapped to exit codes with a message.
inline RunResult run(const RunConfig& config) {
  RunResult res;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_s = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  std::unique_ptr<Dynamics> dyn;
  try {
    validate(config);
    DynamicsConfig dc;
    dc.iters = config.iters;
    dc.algo = config.algo;
    dc.seed = config.seed;
    dc.eps_fp = config.eps_fp;
    dc.normalize_utils = config.normalize;
    dc.log_every = config.log_every;
    dyn = std::make_unique<Dynamics>(make_game(config.game), dc);
  } catch (const ConfigError& e) {
    res.exit_code = kExitConfig;
    res.message = e.what();
    return res;
  } catch (const GameError& e) {
    res.exit_code = kExitConfig;
    res.message = e.what();
    return res;
  } catch (const std::invalid_argument& e) {
    res.exit_code = kExitConfig;
    res.message = e.what();
    return res;
  }

  const int n = dyn->game().num_players();
  std::ofstream csv;
  if (!config.out.empty()) {
    csv.open(config.out);
    if (!csv) {
      res.exit_code = kExitConfig;
      res.message = "cannot write " + config.out;
      return res;
    }
    csv << csv_header(n) << "\n";
  }

  double window_max = 0;
  double wall_ms = 0;  // iteration time only, gap evaluation excluded
  res.terminated_by = "iterations";
  auto emit = [&] {
    RunLogEntry entry{dyn->gaps(), window_max};
    window_max = 0;
    if (csv.is_open()) {
      const auto [mean, sd] = mean_std(res.iter_ms);
      const bool timing = !config.no_timing;
      csv << entry.gaps.t << "," << format_double(timing ? wall_ms : 0) << "," << format_double(timing ? mean : 0)
          << "," << format_double(timing ? sd : 0) << "," << format_double(entry.gaps.gap_max) << ","
          << format_double(entry.gaps.gap_sum);
      for (double g : entry.gaps.gap_per_player) csv << "," << format_double(g);
      csv << "," << format_double(entry.gaps.ext_gap_max) << "," << format_double(entry.fp_residual_max) << "\n";
    }
    res.log.push_back(std::move(entry));
  };

  try {
    for (int t = 1; t <= config.iters; ++t) {
      if (config.time_limit > 0 && elapsed_s() >= config.time_limit) {
        res.terminated_by = "time_limit";
        break;
      }
      const IterationRecord rec = dyn->step();
      res.iter_ms.push_back(rec.iter_ms);
      wall_ms += rec.iter_ms;
      for (double r : rec.fp_residual) window_max = std::max(window_max, r);
      if (t % config.log_every == 0) emit();
    }
  } catch (const DynamicsError& e) {
    res.exit_code = e.numerical() ? kExitNumerical : kExitConfig;
    res.message = e.what();
  }
  res.iterations = dyn->t();
  if (res.iterations == 0) {
    if (res.exit_code == kExitOk) {
      res.exit_code = kExitResource;
      res.message = "time limit reached before the first iteration completed";
    }
    return res;
  }
  if (res.log.empty() || res.log.back().gaps.t != res.iterations) emit();

  nlohmann::json summary;
  summary["game"] = config.game;
  summary["algo"] = config.algo;
  summary["seed"] = config.seed;
  summary["normalize_utils"] = config.normalize;
  summary["terminal_states"] = dyn->game().game().num_terminals();
  std::vector<int> dims, nodes;
  for (int p = 0; p < n; ++p) {
    dims.push_back(dyn->game().tfdp(p).dim());
    nodes.push_back(dyn->dag(p).num_nodes());
  }
  summary["d_per_player"] = dims;
  summary["dag_nodes_per_player"] = nodes;
  summary["iterations"] = res.iterations;
  summary["terminated_by"] = res.terminated_by;
  summary["total_time"] = config.no_timing ? 0.0 : elapsed_s();
  summary["final_gaps"] = gap_report_to_json(res.log.back().gaps);
  res.summary = summary;
  if (!config.out.empty()) {
    std::ofstream js(summary_path(config.out));
    js << summary.dump(2) << "\n";
  }
  if (!config.deviation_out.empty()) {
    nlohmann::json devs = nlohmann::json::array();
    for (int p = 0; p < n; ++p) devs.push_back(deviation_to_json(cfr_recommend(dyn->cfr(p)), dyn->dag(p)));
    std::ofstream js(config.deviation_out);
    js << devs.dump(1) << "\n";
  }
  return res;
}

struct BenchRow {
  std::string game;
  std::string algo;
  int iterations = 0;
  double mean_ms = 0;
  double std_ms = 0;
  int exit_code = kExitOk;
};

/// Warm-up iterations excluded from timing: a tenth of the run, at most 10.
inline std::size_t warmup_count(std::size_t iterations) {
  return std::min<std::size_t>(10, iterations / 10);
}

/// Runs configs one after another (never concurrently, to keep timings
/// clean) and reports mean and standard deviation of the iteration time.
inline std::vector<BenchRow> bench(const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw ConfigError("bench needs at least one config");
  std::vector<BenchRow> rows;
  for (RunConfig c : configs) {
    c.out.clear();
    const RunResult r = run(c);
    BenchRow row{c.game, c.algo, r.iterations, 0, 0, r.exit_code};
    std::tie(row.mean_ms, row.std_ms) = mean_std(r.iter_ms, warmup_count(r.iter_ms.size()));
    rows.push_back(row);
  }
  return rows;
}

inline std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "game" << std::setw(14) << "algo" << std::right << std::setw(8) << "iters"
     << std::setw(26) << "ms/iter (mean +- std)" << "\n";
  for (const auto& r : rows) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(4) << r.mean_ms << " +- " << r.std_ms;
    os << std::left << std::setw(24) << r.game << std::setw(14) << r.algo << std::right << std::setw(8)
       << r.iterations << std::setw(26) << t.str() << "\n";
  }
  return os.str();
}

inline nlohmann::json bench_json(const std::vector<BenchRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"game", r.game},
                   {"algo", r.algo},
                   {"iterations", r.iterations},
                   {"mean_ms", r.mean_ms},
                   {"std_ms", r.std_ms},
                   {"exit_code", r.exit_code}});
  }
  return out;
}

}  // namespace utc_eq
