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

#include <numeric>
#include <vector>

#include "idbal/data.hpp"
#include "idbal/learners.hpp"
#include "idbal/oracle.hpp"
#include "idbal/rng.hpp"

namespace idbal {
namespace {

std::size_t sum(const std::vector<std::size_t>& v) { return std::accumulate(v.begin(), v.end(), std::size_t{0}); }

TEST(PlanPartition, Examples) {
  const auto p = plan_partition(9, 3);
  EXPECT_EQ(p.K, 2u);
  EXPECT_EQ(p.n_parts, (std::vector<std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(p.alpha, 2.0);
  EXPECT_EQ(p.m_parts, (std::vector<std::size_t>{3, 2, 4}));

  EXPECT_EQ(plan_partition(30, 7).n_parts, (std::vector<std::size_t>{1, 2, 4}));

  const auto smallest = plan_partition(3, 1);
  EXPECT_EQ(smallest.K, 1u);
  EXPECT_EQ(smallest.n_parts, (std::vector<std::size_t>{1}));
  EXPECT_EQ(smallest.m_parts, (std::vector<std::size_t>{1, 2}));
}

TEST(PlanPartition, Offsets) {
  const auto p = plan_partition(9, 3);
  EXPECT_EQ(p.logged_offset(0), 0u);
  EXPECT_EQ(p.logged_offset(1), 3u);
  EXPECT_EQ(p.logged_offset(2), 5u);
  EXPECT_EQ(p.online_offset(1), 0u);
  EXPECT_EQ(p.online_offset(2), 1u);
  EXPECT_EQ(p.n_at(0), 0u);
}

TEST(PlanPartition, TotalsForArbitrarySizes) {
  for (std::size_t n = 1; n < 300; n += 7) {
    for (std::size_t m : {3ul, 10ul, 97ul, 1000ul}) {
      const auto p = plan_partition(m, n);
      EXPECT_EQ(p.n_parts.size(), p.K);
      EXPECT_EQ(p.m_parts.size(), p.K + 1);
      EXPECT_EQ(sum(p.n_parts), n);
      EXPECT_EQ(sum(p.m_parts), m);
      for (std::size_t k = 1; k < p.K; ++k) EXPECT_EQ(p.n_parts[k - 1], std::size_t{1} << (k - 1));
      EXPECT_LT(n, std::size_t{1} << p.K);
      EXPECT_GE(n, std::size_t{1} << (p.K - 1));
    }
  }
}

TEST(PlanPartition, RejectsTinyInputs) {
  EXPECT_THROW(plan_partition(2, 5), std::invalid_argument);
  EXPECT_THROW(plan_partition(10, 0), std::invalid_argument);
}

TEST(DebiasRule, Examples) {
  EXPECT_FALSE(debias_rule(0.9, 0.1, 2.0));
  EXPECT_TRUE(debias_rule(0.5, 0.1, 2.0));
  EXPECT_TRUE(debias_rule(0.6, 0.1, 2.0));
  for (double q : {0.0, 0.005, 0.3, 1.0}) EXPECT_TRUE(debias_rule(q, q, 3.0));
  // 1/alpha >= 1 makes the rule vacuous.
  EXPECT_TRUE(debias_rule(1.0, 0.0, 0.75));
  EXPECT_THROW(debias_rule(0.5, 0.1, 0.0), std::invalid_argument);
}

TEST(AlgoConfig, ValidationAndNames) {
  AlgoConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.C = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  for (auto a : {Algorithm::kPassive, Algorithm::kDbalw, Algorithm::kDbalwm, Algorithm::kIdbal}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_THROW(parse_algorithm("dbal"), std::invalid_argument);
  EXPECT_EQ(parse_mode("exact"), Mode::kExact);
}

// --- exact mode

struct ExactCase {
  DiscreteInstance inst;
  Draw draw;
};

ExactCase exact_case(std::uint64_t seed, std::size_t m = 120, std::size_t n = 40, bool unit_q0 = false) {
  FixtureOptions fo;
  fo.pool_size = 10;
  fo.class_size = 24;
  auto inst = random_fixture(seed, fo);
  if (unit_q0) std::fill(inst.q0.begin(), inst.q0.end(), 1.0);
  Rng rng(derive_seed(seed, Stream::kTrial));
  auto d = draw_sample(inst, SamplingSetup{m, n, {}}, rng);
  return {std::move(inst), std::move(d)};
}

AlgoConfig exact_cfg() {
  AlgoConfig cfg;
  cfg.mode = Mode::kExact;
  cfg.delta = 0.1;
  return cfg;
}

RunResult run_exact(Algorithm a, const ExactCase& c, AlgoConfig cfg = exact_cfg(), std::uint64_t seed = 1) {
  return run_algorithm(a, c.draw.logged, c.draw.online_examples, c.inst.q0_policy(),
                       ExactSpace{&c.inst.cls, c.inst.pool}, cfg, seed);
}

TEST(Idbal, TwoHypothesisHandTrace) {
  // Members differ only on instance 1; every logged record reveals it as 1.
  const auto cls = FiniteClass::from_label_rows({{Label::kZero, Label::kZero}, {Label::kZero, Label::kOne}});
  const auto x = FeatureVector{};
  std::vector<LoggedTriple> logged;
  for (int i = 0; i < 9; ++i) logged.push_back(LoggedTriple::observed(1, x, Label::kOne));
  const std::vector<Example> online{{0, x, Label::kZero}, {1, x, Label::kOne}, {1, x, Label::kOne}};
  policy::Table t;
  t.probs = {{0, 1.0}, {1, 1.0}};
  AlgoConfig cfg = exact_cfg();
  cfg.bound.gamma0 = 1e-6;
  const auto r = run_idbal(logged, online, t, ExactSpace{&cls, {{0, x}, {1, x}}}, cfg, 3);
  ASSERT_GE(r.candidate_history.size(), 2u);
  EXPECT_EQ(r.candidate_history[0].size(), 2u);
  EXPECT_EQ(r.candidate_history[1], (CandidateSetExact{{1}}));
  EXPECT_EQ(r.query_count, 0u);
  EXPECT_EQ(r.inferred_count, 3u);
  EXPECT_EQ(std::get<std::size_t>(r.final_classifier), 1u);
}

TEST(Idbal, EmptyOnlineReturnsWarmStartErm) {
  const auto c = exact_case(4);
  const std::vector<Example> none;
  const auto r = run_idbal(c.draw.logged, none, c.inst.q0_policy(), ExactSpace{&c.inst.cls, c.inst.pool},
                           exact_cfg(), 1);
  EXPECT_EQ(r.query_count, 0u);
  EXPECT_TRUE(r.decisions.empty());
  const auto s = make_mis_sample(c.draw.logged, {}, c.inst.q0_propensity(), c.inst.q0_propensity());
  EXPECT_EQ(std::get<std::size_t>(r.final_classifier),
            erm_weighted(c.inst.cls, s, CandidateSetExact::all(c.inst.cls)).index);
}

TEST(Idbal, CandidateSetsAreNested) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = run_exact(Algorithm::kIdbal, exact_case(seed));
    for (std::size_t k = 1; k < r.candidate_history.size(); ++k) {
      EXPECT_TRUE(r.candidate_history[k].subset_of(r.candidate_history[k - 1]));
      EXPECT_FALSE(r.candidate_history[k].active.empty());
    }
  }
}

TEST(Idbal, LabelAccounting) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = exact_case(seed);
    for (auto a : {Algorithm::kIdbal, Algorithm::kDbalwm, Algorithm::kDbalw}) {
      const auto r = run_exact(a, c);
      ASSERT_EQ(r.decisions.size(), c.draw.online_examples.size());
      std::size_t q = 0, inf = 0, dis = 0;
      for (auto d : r.decisions) {
        q += d == Decision::kQueried;
        inf += d == Decision::kInferred;
        dis += d == Decision::kDiscarded;
      }
      EXPECT_EQ(q, r.query_count);
      EXPECT_EQ(inf, r.inferred_count);
      EXPECT_EQ(dis, r.discarded_count);
      EXPECT_EQ(sum(r.queries_per_iteration), r.query_count);
      if (a != Algorithm::kIdbal) EXPECT_EQ(r.discarded_count, 0u);
    }
  }
}

TEST(Idbal, UnitPropensityMatchesDbalwm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = exact_case(seed, 90, 60, true);
    const auto a = run_exact(Algorithm::kIdbal, c);
    const auto b = run_exact(Algorithm::kDbalwm, c);
    EXPECT_EQ(a.decisions, b.decisions);
    EXPECT_EQ(a.final_classifier, b.final_classifier);
    EXPECT_EQ(a.discarded_count, 0u);
  }
}

TEST(Idbal, FirstSegmentQueriesNeverExceedDbalwm) {
  // Both variants share V_1; the debias rule can only remove queries there.
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = exact_case(seed);
    const auto a = run_exact(Algorithm::kIdbal, c);
    const auto b = run_exact(Algorithm::kDbalwm, c);
    ASSERT_FALSE(a.queries_per_iteration.empty());
    EXPECT_LE(a.queries_per_iteration[0], b.queries_per_iteration[0]);
    EXPECT_EQ(a.candidate_history[1], b.candidate_history[1]);
  }
}

TEST(Idbal, InferredLabelsLeaveDifferencesUnchanged) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = exact_case(seed);
    AlgoConfig cfg = exact_cfg();
    cfg.keep_audit = true;
    for (auto a : {Algorithm::kIdbal, Algorithm::kDbalwm}) {
      const auto r = run_exact(a, c, cfg);
      ASSERT_FALSE(r.audit.empty());
      for (const auto& seg : r.audit) {
        const auto& v = seg.candidates.active;
        for (std::size_t i = 0; i < v.size(); ++i) {
          for (std::size_t j = i + 1; j < v.size(); ++j) {
            const auto h1 = c.inst.cls.classifier(v[i]);
            const auto h2 = c.inst.cls.classifier(v[j]);
            const double inferred = estimate_error(h1, seg.inferred) - estimate_error(h2, seg.inferred);
            const double truth = estimate_error(h1, seg.truth) - estimate_error(h2, seg.truth);
            EXPECT_NEAR(inferred, truth, 1e-12);
          }
        }
      }
    }
  }
}

TEST(Idbal, DeterministicGivenInputs) {
  const auto c = exact_case(7);
  const auto a = run_exact(Algorithm::kIdbal, c, exact_cfg(), 11);
  const auto b = run_exact(Algorithm::kIdbal, c, exact_cfg(), 11);
  EXPECT_EQ(a.decisions, b.decisions);
  EXPECT_EQ(a.final_classifier, b.final_classifier);
  EXPECT_EQ(a.xi, b.xi);
  EXPECT_EQ(a.config_fingerprint, b.config_fingerprint);
}

TEST(Idbal, WarnsWhenAlphaBelowOne) {
  const auto c = exact_case(2, 30, 40);
  EXPECT_FALSE(run_exact(Algorithm::kIdbal, c).warnings.empty());
  EXPECT_TRUE(run_exact(Algorithm::kIdbal, exact_case(2)).warnings.empty());
}

TEST(Idbal, ModeMustMatchSpace) {
  const auto c = exact_case(1);
  AlgoConfig cfg;  // practical
  EXPECT_THROW(run_exact(Algorithm::kIdbal, c, cfg), std::invalid_argument);
  std::vector<Example> online{{0, FeatureVector{}, Label::kOne}};
  EXPECT_THROW(run_idbal(c.draw.logged, online, policy::Identical{1.0}, LinearSpace{1, {}}, exact_cfg(), 1),
               std::invalid_argument);
}

// --- practical mode

struct PracticalCase {
  std::vector<LoggedTriple> logged;
  std::vector<Example> online;
  std::vector<Example> test;
};

PracticalCase practical_case(std::uint64_t seed, const LoggingPolicy& pol, std::size_t count = 1500) {
  SyntheticSpec spec;
  spec.count = count;
  spec.dim = 10;
  spec.seed = seed;
  const auto data = generate_synthetic(spec);
  const auto split = split_dataset(data, {}, derive_seed(seed, Stream::kSplit));
  return {apply_logging(split.logged, as_propensity(pol), derive_seed(seed, Stream::kLogging)), split.online,
          split.test};
}

AlgoConfig practical_cfg(double C = 10.0) {
  AlgoConfig cfg;
  cfg.C = C;
  cfg.eta = 0.01;
  return cfg;
}

TEST(Practical, PassiveQueriesEverything) {
  const LoggingPolicy pol = policy::Identical{0.3};
  const auto c = practical_case(1, pol);
  const auto r = run_passive(c.logged, c.online, pol, LinearSpace{10, {}}, practical_cfg(), 1);
  EXPECT_EQ(r.query_count, c.online.size());
  EXPECT_LT(test_error(r, LinearSpace{10, {}}, c.test), 0.3);
}

TEST(Practical, PassiveIgnoresHiddenLogs) {
  const LoggingPolicy none = policy::Identical{0.0};
  const auto c = practical_case(2, none);
  std::vector<LoggedTriple> empty{LoggedTriple::hidden(0, c.online[0].x)};
  const auto a = run_passive(c.logged, c.online, none, LinearSpace{10, {}}, practical_cfg(), 1);
  const auto b = run_passive(empty, c.online, none, LinearSpace{10, {}}, practical_cfg(), 1);
  EXPECT_EQ(a.final_classifier, b.final_classifier);
}

TEST(Practical, UnitPropensityMatchesDbalwm) {
  const LoggingPolicy pol = policy::Identical{1.0};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = practical_case(seed, pol);
    const auto a = run_idbal(c.logged, c.online, pol, LinearSpace{10, {}}, practical_cfg(), seed);
    const auto b = run_dbalwm(c.logged, c.online, pol, LinearSpace{10, {}}, practical_cfg(), seed);
    EXPECT_EQ(a.decisions, b.decisions);
    EXPECT_EQ(a.final_classifier, b.final_classifier);
  }
}

TEST(Practical, LargeCapacityQueriesAll) {
  const LoggingPolicy pol = policy::Identical{0.5};
  const auto c = practical_case(3, pol);
  // 300 of 600 online examples keeps alpha above 1, so no segment has
  // m_k + n_k = 1 (where ln 1 = 0 would zero the capacity term).
  const auto online = std::span<const Example>(c.online).first(300);
  const auto r = run_dbalwm(c.logged, online, pol, LinearSpace{10, {}}, practical_cfg(1e12), 3);
  EXPECT_EQ(r.query_count, online.size());
}

TEST(Practical, FirstSegmentDominanceUnderGroups) {
  const LoggingPolicy pol = policy::UniformGroups{{0.005, 0.05, 0.5}, 5};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = practical_case(seed, pol);
    const auto a = run_idbal(c.logged, c.online, pol, LinearSpace{10, {}}, practical_cfg(100.0), seed);
    const auto b = run_dbalwm(c.logged, c.online, pol, LinearSpace{10, {}}, practical_cfg(100.0), seed);
    EXPECT_LE(a.queries_per_iteration.at(0), b.queries_per_iteration.at(0));
    EXPECT_EQ(a.discarded_count + a.inferred_count + a.query_count, c.online.size());
  }
}

TEST(Practical, HorizonTraceIsConsistent) {
  const LoggingPolicy pol = policy::Identical{0.2};
  const auto c = practical_case(4, pol);
  const std::vector<std::size_t> horizons{10, 20, 40, 80, 160};
  const LinearSpace space{10, {}};
  const auto r = run_with_horizons(Algorithm::kPassive, c.logged, c.online, c.test, pol, space,
                                   practical_cfg(), horizons, 4);
  ASSERT_EQ(r.trace.size(), horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    EXPECT_EQ(r.trace[i].horizon, horizons[i]);
    EXPECT_EQ(r.trace[i].queries, horizons[i]);
  }
  const auto last = run_passive(c.logged, std::span<const Example>(c.online).first(160), pol, space,
                                practical_cfg(), 4);
  EXPECT_EQ(r.final_classifier, last.final_classifier);
  EXPECT_DOUBLE_EQ(r.trace.back().test_error, test_error(last, space, c.test));
}

TEST(Practical, TestErrorSerialMatchesParallel) {
  const LoggingPolicy pol = policy::Identical{0.2};
  const auto c = practical_case(6, pol, 4000);
  const auto r = run_idbal(c.logged, c.online, pol, LinearSpace{10, {}}, practical_cfg(), 6);
  EXPECT_EQ(test_error(r, LinearSpace{10, {}}, c.test, Execution::kSerial),
            test_error(r, LinearSpace{10, {}}, c.test, Execution::kParallel));
}

}  // namespace
}  // namespace idbal
