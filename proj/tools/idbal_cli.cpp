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

// Command-line front end.
//
//   idbal gen-data  [--count N] [--dim D] [--flip P] [--seed S] [--output FILE]
//   idbal run       [--config FILE] [--algorithm A] [--C c] [--eta e] [--<key> v]...
//   idbal sweep     [--config FILE] [--quick] [--<key> v]...
//   idbal verify    [--seed S] [--fixtures N] [--trials T] [--exact-runs R] [--output FILE]
//   idbal report    --input CURVES.csv [--output-dir DIR]
//
// Every config-file key can be given as a flag of the same name; flags win
// over the file, and the file wins over the defaults.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "idbal/data.hpp"
#include "idbal/harness.hpp"
#include "idbal/oracle.hpp"

namespace {

using idbal::ExperimentConfig;

struct ConfigFlags {
  std::string config_path;
  bool quick = false;
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags, bool with_quick) {
  cmd->add_option("--config", flags.config_path, "flat key = value config file");
  if (with_quick) cmd->add_flag("--quick", flags.quick, "desk-scale profile (5 repeats, 4x4 grid)");
  auto all = ExperimentConfig::keys();
  all.insert(all.end(), ExperimentConfig::alias_keys().begin(), ExperimentConfig::alias_keys().end());
  for (const auto& key : all) {
    cmd->add_option_function<std::string>(
        "--" + key, [&flags, key](const std::string& v) { flags.overrides[key] = v; }, "config key " + key);
  }
}

ExperimentConfig resolve_config(const ConfigFlags& flags, ExperimentConfig base) {
  if (flags.quick) base = ExperimentConfig::quick();
  if (!flags.config_path.empty()) base = idbal::load_config(flags.config_path, std::move(base));
  for (const auto& [k, v] : flags.overrides) base.set(k, v);
  base.output_dir = idbal::resolve_output_dir(base.output_dir);
  base.validate();
  return base;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_summary(const idbal::ProtocolResult& result) {
  std::ostringstream summary;
  idbal::write_summary_csv(summary, result.curves);
  std::cout << summary.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning with logged data: experiments and verification"};
  app.require_subcommand(1);

  // gen-data
  idbal::SyntheticSpec synth;
  std::string gen_output;
  auto* gen = app.add_subcommand("gen-data", "emit the synthetic dataset in sparse text format");
  gen->add_option("--count", synth.count, "number of examples")->capture_default_str();
  gen->add_option("--dim", synth.dim, "dimension")->capture_default_str();
  gen->add_option("--flip", synth.flip_prob, "label flip probability")->capture_default_str();
  gen->add_option("--seed", synth.seed, "seed")->capture_default_str();
  gen->add_option("--output", gen_output, "output file (default: <output dir>/synthetic.txt)");

  // run
  ConfigFlags run_flags;
  std::string run_algorithm = "idbal";
  double run_c = 1.0;
  double run_eta = 0.01;
  auto* run = app.add_subcommand("run", "one algorithm at one (C, eta) point");
  add_config_flags(run, run_flags, false);
  run->add_option("--algorithm", run_algorithm, "passive, dbalw, dbalwm or idbal")->capture_default_str();
  run->add_option("--C", run_c, "capacity constant")->capture_default_str();
  run->add_option("--eta", run_eta, "stepsize parameter")->capture_default_str();

  // sweep
  ConfigFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "full protocol over datasets, repeats, algorithms and grid");
  add_config_flags(sweep, sweep_flags, true);

  // verify
  idbal::VerifyOptions vopt;
  std::string verify_output;
  auto* verify = app.add_subcommand("verify", "oracle checks; writes a pass/fail CSV");
  verify->add_option("--seed", vopt.seed, "master seed")->capture_default_str();
  verify->add_option("--fixtures", vopt.fixtures, "random fixtures for estimator checks")->capture_default_str();
  verify->add_option("--trials", vopt.trials, "Monte-Carlo trials per fixture")->capture_default_str();
  verify->add_option("--exact-runs", vopt.exact_runs, "exact-mode learner runs")->capture_default_str();
  verify->add_option("--output", verify_output, "CSV path (default: <output dir>/verify.csv)");

  // report
  std::string report_input;
  std::string report_dir;
  auto* report = app.add_subcommand("report", "summary and paired-ordering CSVs from a curve CSV");
  report->add_option("--input", report_input, "curve CSV written by sweep or run")->required();
  report->add_option("--output-dir", report_dir, "directory for the rendered CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      synth.validate();
      const auto data = idbal::generate_synthetic(synth);
      std::string path = gen_output;
      if (path.empty()) {
        const std::filesystem::path dir(idbal::resolve_output_dir(""));
        std::filesystem::create_directories(dir);
        path = (dir / "synthetic.txt").string();
      }
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write '" + path + "'");
      idbal::write_sparse_dataset(out, data);
      std::cerr << "wrote " << data.size() << " examples to " << path << "\n";
      return 0;
    }

    if (*run) {
      ExperimentConfig base;
      base.repeats = 1;
      auto cfg = resolve_config(run_flags, base);
      // Explicit flags win; a single configured value is kept; otherwise
      // the run defaults apply.
      if (run->count("--algorithm") > 0 || cfg.algorithms.size() != 1) {
        cfg.algorithms = {idbal::parse_algorithm(run_algorithm)};
      }
      if (run->count("--C") > 0 || cfg.c_grid.size() != 1) cfg.c_grid = {run_c};
      if (run->count("--eta") > 0 || cfg.eta_grid.size() != 1) cfg.eta_grid = {run_eta};
      const auto result = idbal::run_protocol(cfg);
      idbal::write_reports(cfg.output_dir, result.runs);
      idbal::write_curve_csv(std::cout, result.runs);
      return 0;
    }

    if (*sweep) {
      const auto cfg = resolve_config(sweep_flags, ExperimentConfig{});
      const auto start = std::chrono::steady_clock::now();
      const auto result = idbal::run_protocol(cfg);
      idbal::write_reports(cfg.output_dir, result.runs);
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      print_summary(result);
      std::cerr << result.runs.size() << " runs in " << took.count() << " s; CSVs in " << cfg.output_dir
                << "\n";
      return 0;
    }

    if (*verify) {
      const auto rows = idbal::run_verification(vopt);
      std::string path = verify_output;
      if (path.empty()) {
        const std::filesystem::path dir(idbal::resolve_output_dir(""));
        std::filesystem::create_directories(dir);
        path = (dir / "verify.csv").string();
      }
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write '" + path + "'");
      idbal::write_verification_csv(out, rows);
      idbal::write_verification_csv(std::cout, rows);
      bool ok = true;
      for (const auto& r : rows) ok = ok && r.passed;
      return ok ? 0 : 1;
    }

    if (*report) {
      const auto runs = idbal::parse_curve_csv(read_file(report_input));
      if (runs.empty()) throw std::runtime_error("curve CSV '" + report_input + "' has no rows");
      const std::string dir = idbal::resolve_output_dir(report_dir);
      idbal::write_reports(dir, runs);
      std::ostringstream summary;
      idbal::write_summary_csv(summary, idbal::aggregate_runs(runs));
      std::cout << summary.str();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
