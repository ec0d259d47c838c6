/*
 * Copyright 2026 The idbal Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment protocol: repeated split + logging simulation, horizon sweeps
// over a (C, eta) grid, AUC of the error-vs-queries curve, and CSV output.
//
// Seeds: master -> (dataset, repeat) -> (algorithm, parameter point). All
// algorithms of one repeat share the split and the logging realization.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "idbal/data.hpp"
#include "idbal/execution.hpp"
#include "idbal/learners.hpp"
#include "idbal/policies.hpp"

namespace idbal {

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "IDBAL_OUTPUT_DIR";

struct ExperimentConfig {
  std::vector<std::string> datasets{"synthetic"};  // "synthetic" or a sparse-format file
  SyntheticSpec synthetic;
  SplitFractions split;

  std::string policy_name = "uniform";
  double policy_p = 0.005;
  std::array<double, 3> policy_probs{0.005, 0.05, 0.5};
  std::optional<double> policy_c;  // unset: calibrate per repeat
  double calibration_target = 0.1;
  std::optional<std::uint64_t> group_seed;  // unset: derived per repeat
  double coarse_fraction = 0.1;
  std::string policy_table;

  std::vector<Algorithm> algorithms{Algorithm::kPassive, Algorithm::kDbalw, Algorithm::kDbalwm,
                                    Algorithm::kIdbal};
  std::size_t repeats = 10;
  std::size_t horizon_base = 10;
  std::size_t horizon_growth = 2;
  std::vector<double> c_grid;
  std::vector<double> eta_grid;
  std::uint64_t seed = 1;
  double delta = 0.1;
  UpdateRule update = UpdateRule::kImportanceAware;
  std::size_t infimum_sample = 0;
  std::size_t max_online = 0;  // 0: whole online split
  std::size_t threads = 0;     // 0: runtime default
  std::string output_dir;

  ExperimentConfig();

  // repeats=5, 4x4 grids, synthetic + the two bundled datasets.
  static ExperimentConfig quick();

  // Config keys in the order they are documented.
  static const std::vector<std::string>& keys();
  // algo.name, algo.C, algo.eta and algo.delta set algorithms, grid.C,
  // grid.eta and delta; algo.mode accepts only "practical".
  static const std::vector<std::string>& alias_keys();
  // Sets one key from its text form; throws std::invalid_argument on an
  // unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  void validate() const;
};

// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
// Keys are applied on top of `base` in file order.
ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

// Output directory: explicit value, else the environment variable, else
// "results".
std::string resolve_output_dir(const std::string& configured);

// base * growth^i for i = 0, 1, ... up to the largest value <= online_size.
std::vector<std::size_t> horizons_for(std::size_t online_size, std::size_t base, std::size_t growth);

// {base * 2^k : k = first, first + step, ..., last}.
std::vector<double> power_grid(double base, int first, int last, int step);

struct LoadedDataset {
  std::string name;
  std::vector<Example> examples;
};
// Resolves every dataset up front; throws before any run when one is missing.
std::vector<LoadedDataset> load_datasets(const ExperimentConfig& cfg);

// The split and logged realization shared by every algorithm in a repeat.
struct RepeatData {
  DataSplit split;
  std::vector<LoggedTriple> logged;
  std::vector<Example> online;  // possibly truncated to max_online
  LoggingPolicy policy;
  std::uint64_t seed = 0;
};
RepeatData prepare_repeat(const ExperimentConfig& cfg, const LoadedDataset& data, std::size_t repeat);
LoggingPolicy build_policy(const ExperimentConfig& cfg, std::span<const Example> training,
                           std::span<const Example> logged_examples, std::uint64_t repeat_seed);

struct ParamPoint {
  double C = 1.0;
  double eta = 0.01;
};

struct RunRecord {
  std::string dataset;
  Algorithm algorithm = Algorithm::kIdbal;
  std::size_t param_index = 0;
  ParamPoint param;
  std::size_t repeat = 0;
  std::vector<TracePoint> trace;
};

struct CurvePoint {
  double n_bar = 0.0;
  double e_bar = 0.0;
  std::size_t horizon_index = 0;
};

struct SweepCurve {
  std::string dataset;
  Algorithm algorithm = Algorithm::kIdbal;
  std::size_t param_index = 0;
  ParamPoint param;
  std::vector<CurvePoint> points;  // horizon order
  double auc = 0.0;
};

struct ProtocolResult {
  std::vector<RunRecord> runs;      // dataset, algorithm, param, repeat order
  std::vector<SweepCurve> curves;   // dataset, algorithm, param order
};

// Area under the curve by the trapezoid rule over (n_bar, e_bar). Throws
// std::invalid_argument when n_bar decreases anywhere.
double auc(std::span<const CurvePoint> curve);
// Points ordered by n_bar (ties keep horizon order), as auc needs them.
std::vector<CurvePoint> sorted_by_queries(std::span<const CurvePoint> curve);

struct BestAuc {
  std::size_t curve_index = 0;
  ParamPoint param;
  double value = 0.0;
};
// Minimum AUC over the grid for (dataset, algorithm); ties go to the smallest
// C, then eta. Throws when no curve matches.
BestAuc best_auc(std::span<const SweepCurve> curves, const std::string& dataset, Algorithm algorithm);

// Averages repeats into curves and computes every curve's AUC.
std::vector<SweepCurve> aggregate_runs(std::span<const RunRecord> runs);

ProtocolResult run_protocol(const ExperimentConfig& cfg, Execution exec = Execution::kParallel);
// Same as run_protocol with already-loaded data.
ProtocolResult run_protocol(const ExperimentConfig& cfg, std::span<const LoadedDataset> data,
                            Execution exec = Execution::kParallel);

struct PairedOrdering {
  std::string dataset;
  Algorithm a = Algorithm::kIdbal;
  Algorithm b = Algorithm::kPassive;
  std::size_t wins = 0;     // repeats where a's best AUC is strictly below b's
  std::size_t repeats = 0;
  double fraction() const { return repeats == 0 ? 0.0 : static_cast<double>(wins) / repeats; }
};
// Per-repeat best AUC (min over the grid of that repeat's curve), compared
// for every ordered pair of algorithms.
std::vector<PairedOrdering> paired_ordering(std::span<const RunRecord> runs);
// Best AUC per (dataset, algorithm, repeat).
std::map<std::tuple<std::string, Algorithm, std::size_t>, double> per_repeat_best_auc(
    std::span<const RunRecord> runs);

// "%.6g".
std::string format_number(double v);

void write_curve_csv(std::ostream& out, std::span<const RunRecord> runs);
void write_summary_csv(std::ostream& out, std::span<const SweepCurve> curves);
void write_paired_csv(std::ostream& out, std::span<const PairedOrdering> rows);
std::vector<RunRecord> parse_curve_csv(std::string_view text);

// Writes curves.csv, summary.csv and paired.csv under `dir`; throws
// std::runtime_error when a file cannot be written.
void write_reports(const std::string& dir, std::span<const RunRecord> runs);

}  // namespace idbal
