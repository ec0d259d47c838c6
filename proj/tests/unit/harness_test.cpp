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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "idbal/harness.hpp"
#include "idbal/rng.hpp"

namespace idbal {
namespace {

std::vector<CurvePoint> curve(std::vector<std::pair<double, double>> pts) {
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({pts[i].first, pts[i].second, i});
  return out;
}

// Plain trapezoid sum written independently of auc().
double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  long double s = 0.0L;
  for (std::size_t i = 1; i < x.size(); ++i) {
    s += (static_cast<long double>(x[i]) - x[i - 1]) * (static_cast<long double>(y[i]) + y[i - 1]) / 2.0L;
  }
  return static_cast<double>(s);
}

TEST(Auc, HandValue) { EXPECT_DOUBLE_EQ(auc(curve({{0, 1.0}, {10, 0.5}, {30, 0.25}})), 15.0); }

TEST(Auc, DegenerateCurves) {
  EXPECT_EQ(auc(curve({{5, 0.3}})), 0.0);
  EXPECT_EQ(auc(curve({})), 0.0);
  EXPECT_DOUBLE_EQ(auc(curve({{2, 0.2}, {7, 0.2}, {12, 0.2}})), 0.2 * 10);
  EXPECT_THROW(auc(curve({{5, 0.3}, {4, 0.1}})), std::invalid_argument);
}

TEST(Auc, MatchesIndependentTrapezoid) {
  Rng rng(99);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.below(20);
    std::vector<double> x(n), y(n);
    double at = rng.uniform(0, 10);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = at;
      at += rng.uniform(0, 200);
      y[i] = rng.uniform();
    }
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({x[i], y[i]});
    const double want = trapezoid(x, y);
    EXPECT_LE(std::abs(auc(curve(pts)) - want), 1e-12 * std::abs(want));
  }
}

TEST(Auc, SortedByQueriesKeepsTiesInOrder) {
  const auto s = sorted_by_queries(curve({{10, 0.5}, {0, 1.0}, {10, 0.4}}));
  EXPECT_EQ(s[0].horizon_index, 1u);
  EXPECT_EQ(s[1].horizon_index, 0u);
  EXPECT_EQ(s[2].horizon_index, 2u);
}

SweepCurve scurve(double C, double eta, double value) {
  SweepCurve c;
  c.dataset = "d";
  c.algorithm = Algorithm::kIdbal;
  c.param = {C, eta};
  c.auc = value;
  return c;
}

TEST(BestAuc, MinimumAndTies) {
  const std::vector<SweepCurve> one{scurve(1, 1, 15.0)};
  EXPECT_EQ(best_auc(one, "d", Algorithm::kIdbal).value, 15.0);
  const std::vector<SweepCurve> two{scurve(1, 1, 15.0), scurve(2, 1, 12.0)};
  EXPECT_EQ(best_auc(two, "d", Algorithm::kIdbal).param.C, 2.0);
  const std::vector<SweepCurve> ties{scurve(2, 0.1, 5.0), scurve(1, 0.5, 5.0), scurve(1, 0.2, 5.0)};
  const auto b = best_auc(ties, "d", Algorithm::kIdbal);
  EXPECT_EQ(b.param.C, 1.0);
  EXPECT_EQ(b.param.eta, 0.2);
  EXPECT_EQ(b.curve_index, 2u);
  EXPECT_THROW(best_auc(ties, "d", Algorithm::kPassive), std::invalid_argument);
}

TEST(Horizons, Schedule) {
  const auto h = horizons_for(2400, 10, 2);
  EXPECT_EQ(h, (std::vector<std::size_t>{10, 20, 40, 80, 160, 320, 640, 1280}));
  EXPECT_EQ(horizons_for(10, 10, 2), (std::vector<std::size_t>{10}));
  EXPECT_TRUE(horizons_for(9, 10, 2).empty());
  EXPECT_THROW(horizons_for(100, 10, 1), std::invalid_argument);
}

TEST(Horizons, DefaultSyntheticSplitGivesEightPoints) {
  ExperimentConfig cfg;
  const auto data = load_datasets(cfg);
  const auto split = split_dataset(data[0].examples, cfg.split, 1);
  EXPECT_EQ(split.online.size(), 2400u);
  EXPECT_EQ(horizons_for(split.online.size(), cfg.horizon_base, cfg.horizon_growth).size(), 8u);
}

TEST(Config, DefaultsAndGrids) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.repeats, 10u);
  ASSERT_EQ(cfg.c_grid.size(), 10u);
  EXPECT_DOUBLE_EQ(cfg.c_grid.front(), 0.01);
  EXPECT_DOUBLE_EQ(cfg.c_grid.back(), 0.01 * 262144);
  EXPECT_DOUBLE_EQ(cfg.eta_grid[1], 0.0004);
  const auto q = ExperimentConfig::quick();
  EXPECT_EQ(q.repeats, 5u);
  EXPECT_EQ(q.c_grid.size(), 4u);
  EXPECT_EQ(q.eta_grid.size(), 4u);
  EXPECT_EQ(q.datasets.size(), 3u);
}

TEST(Config, ParsesFlatFileWithComments) {
  const auto cfg = parse_config_text(
      "# experiment\n"
      "repeats = 3\n"
      "\n"
      "grid.C = 0.5, 2   # two values\r\n"
      "policy.name=identical\n"
      "policy.p = 0.25\n"
      "algorithms = passive, idbal\n");
  EXPECT_EQ(cfg.repeats, 3u);
  EXPECT_EQ(cfg.c_grid, (std::vector<double>{0.5, 2.0}));
  EXPECT_EQ(cfg.policy_name, "identical");
  EXPECT_DOUBLE_EQ(cfg.policy_p, 0.25);
  EXPECT_EQ(cfg.algorithms, (std::vector<Algorithm>{Algorithm::kPassive, Algorithm::kIdbal}));
}

TEST(Config, ErrorsCarryTheLine) {
  try {
    parse_config_text("repeats = 2\nbogus.key = 1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_config_text("repeats\n"), ParseError);
  EXPECT_THROW(parse_config_text("repeats = -1\n"), ParseError);
  EXPECT_THROW(parse_config_text("update = newton\n"), ParseError);
}

TEST(Config, LearnerKeyAliases) {
  ExperimentConfig cfg;
  cfg.set("algo.name", "dbalwm");
  cfg.set("algo.C", "4");
  cfg.set("algo.eta", "0.5");
  cfg.set("algo.delta", "0.2");
  cfg.set("algo.mode", "practical");
  EXPECT_EQ(cfg.algorithms, (std::vector<Algorithm>{Algorithm::kDbalwm}));
  EXPECT_EQ(cfg.c_grid, (std::vector<double>{4.0}));
  EXPECT_EQ(cfg.eta_grid, (std::vector<double>{0.5}));
  EXPECT_DOUBLE_EQ(cfg.delta, 0.2);
  EXPECT_THROW(cfg.set("algo.mode", "exact"), std::invalid_argument);
}

TEST(Config, EveryKeyRoundTripsThroughItsTextForm) {
  ExperimentConfig cfg = ExperimentConfig::quick();
  cfg.policy_c = 2.5;
  cfg.group_seed = 42;
  cfg.output_dir = "out";
  const auto m = cfg.to_map();
  EXPECT_EQ(m.size(), ExperimentConfig::keys().size());
  ExperimentConfig back;
  for (const auto& k : ExperimentConfig::keys()) back.set(k, m.at(k));
  EXPECT_EQ(back.to_map(), m);
}

TEST(Config, ValidationRejectsBadValues) {
  ExperimentConfig cfg;
  cfg.repeats = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.c_grid.clear();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.policy_name = "oracle";
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Config, OutputDirectoryResolution) {
  ::setenv(kOutputDirEnv, "/tmp/from-env", 1);
  EXPECT_EQ(resolve_output_dir(""), "/tmp/from-env");
  EXPECT_EQ(resolve_output_dir("explicit"), "explicit");
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(resolve_output_dir(""), "results");
}

TEST(Datasets, MissingFileFailsBeforeAnyRun) {
  ExperimentConfig cfg;
  cfg.datasets = {"synthetic", "/nonexistent/data.txt"};
  EXPECT_THROW(load_datasets(cfg), std::runtime_error);
  EXPECT_THROW(run_protocol(cfg), std::runtime_error);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.synthetic.count = 700;
  cfg.synthetic.dim = 6;
  cfg.repeats = 2;
  cfg.c_grid = {0.5, 50.0};
  cfg.eta_grid = {0.01};
  cfg.max_online = 160;
  return cfg;
}

TEST(Protocol, RowCountsAndPairing) {
  const auto cfg = small_config();
  const auto res = run_protocol(cfg);
  const std::size_t horizons = horizons_for(160, 10, 2).size();  // 5
  ASSERT_EQ(res.runs.size(), 1u * 4 * 2 * 2);
  for (const auto& r : res.runs) EXPECT_EQ(r.trace.size(), horizons);
  EXPECT_EQ(res.curves.size(), 4u * 2);
  std::ostringstream out;
  write_curve_csv(out, res.runs);
  const auto text = out.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), 1 + 4 * 2 * 2 * horizons);

  std::ostringstream summary;
  write_summary_csv(summary, res.curves);
  const auto s = summary.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}

TEST(Protocol, PassiveQueriesTheWholeHorizon) {
  auto cfg = small_config();
  cfg.repeats = 1;
  cfg.algorithms = {Algorithm::kPassive};
  cfg.c_grid = {1.0};
  cfg.horizon_base = 160;
  const auto res = run_protocol(cfg);
  ASSERT_EQ(res.curves.size(), 1u);
  ASSERT_EQ(res.curves[0].points.size(), 1u);
  EXPECT_EQ(res.curves[0].points[0].n_bar, 160.0);
  EXPECT_EQ(res.curves[0].auc, 0.0);
}

// Every horizon is a fresh run on a prefix of the stream, and the partition
// plan depends on the prefix length, so only passive is monotone by
// construction; the disagreement-based learners can dip between horizons.
TEST(Protocol, QueryCountsStayWithinHorizon) {
  auto cfg = small_config();
  cfg.synthetic.count = 1500;
  cfg.max_online = 640;
  cfg.repeats = 3;
  cfg.c_grid = {0.1, 10.0, 1000.0};
  const auto res = run_protocol(cfg);
  for (const auto& r : res.runs) {
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      EXPECT_LE(r.trace[i].queries, r.trace[i].horizon);
      if (r.algorithm == Algorithm::kPassive) {
        EXPECT_EQ(r.trace[i].queries, r.trace[i].horizon);
        if (i > 0) EXPECT_LT(r.trace[i - 1].queries, r.trace[i].queries);
      }
    }
  }
}

TEST(Protocol, RepeatsShareDataAcrossAlgorithms) {
  const auto cfg = small_config();
  const auto data = load_datasets(cfg);
  const auto a = prepare_repeat(cfg, data[0], 1);
  const auto b = prepare_repeat(cfg, data[0], 1);
  const auto c = prepare_repeat(cfg, data[0], 0);
  EXPECT_EQ(a.logged, b.logged);
  EXPECT_EQ(a.online, b.online);
  EXPECT_NE(a.online, c.online);
}

TEST(Protocol, SerialMatchesParallelByteForByte) {
  const auto cfg = small_config();
  const auto p = run_protocol(cfg, Execution::kParallel);
  const auto s = run_protocol(cfg, Execution::kSerial);
  const auto again = run_protocol(cfg, Execution::kParallel);
  std::ostringstream a, b, c;
  write_curve_csv(a, p.runs);
  write_curve_csv(b, s.runs);
  write_curve_csv(c, again.runs);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), c.str());
}

TEST(Aggregate, IdenticalRepeatsAverageToThemselves) {
  RunRecord r;
  r.dataset = "d";
  r.trace = {{10, 4, 0.3}, {20, 9, 0.2}};
  RunRecord r2 = r;
  r2.repeat = 1;
  const std::vector<RunRecord> one{r};
  const std::vector<RunRecord> two{r, r2};
  const auto a = aggregate_runs(one);
  const auto b = aggregate_runs(two);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(a[0].points[1].n_bar, b[0].points[1].n_bar);
  EXPECT_EQ(a[0].points[1].e_bar, b[0].points[1].e_bar);
  EXPECT_DOUBLE_EQ(b[0].auc, 0.25 * 5);
}

TEST(Paired, CountsStrictWins) {
  std::vector<RunRecord> runs;
  const double idbal_err[3] = {0.1, 0.5, 0.3};
  for (std::size_t k = 0; k < 3; ++k) {
    RunRecord a;
    a.dataset = "d";
    a.algorithm = Algorithm::kIdbal;
    a.repeat = k;
    a.trace = {{10, 0, idbal_err[k]}, {20, 10, idbal_err[k]}};
    RunRecord b = a;
    b.algorithm = Algorithm::kPassive;
    b.trace = {{10, 0, 0.3}, {20, 10, 0.3}};
    runs.push_back(a);
    runs.push_back(b);
  }
  const auto rows = paired_ordering(runs);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].a, Algorithm::kIdbal);
  EXPECT_EQ(rows[0].wins, 1u);
  EXPECT_EQ(rows[0].repeats, 3u);
  EXPECT_EQ(rows[1].wins, 1u);
}

TEST(Reports, WritesAndReparsesCurves) {
  const auto cfg = small_config();
  const auto res = run_protocol(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "idbal_harness_test";
  std::filesystem::remove_all(dir);
  write_reports(dir.string(), res.runs);
  for (const char* f : {"curves.csv", "summary.csv", "paired.csv"}) EXPECT_TRUE(std::filesystem::exists(dir / f));

  std::ifstream in(dir / "curves.csv", std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto parsed = parse_curve_csv(buf.str());
  ASSERT_EQ(parsed.size(), res.runs.size());
  std::ostringstream rewritten;
  write_curve_csv(rewritten, parsed);
  EXPECT_EQ(rewritten.str(), buf.str());

  const auto sub = dir / "again";
  write_reports(sub.string(), parsed);
  for (const char* f : {"summary.csv", "paired.csv"}) {
    std::ifstream x(dir / f, std::ios::binary), y(sub / f, std::ios::binary);
    std::ostringstream bx, by;
    bx << x.rdbuf();
    by << y.rdbuf();
    EXPECT_EQ(bx.str(), by.str()) << f;
  }
  std::filesystem::remove_all(dir);
}

TEST(Format, SixSignificantDigits) {
  EXPECT_EQ(format_number(0.123456789), "0.123457");
  EXPECT_EQ(format_number(15.0), "15");
  EXPECT_EQ(format_number(2621.44), "2621.44");
  EXPECT_EQ(format_number(1e-7), "1e-07");
}

}  // namespace
}  // namespace idbal
