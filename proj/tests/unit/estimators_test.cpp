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
#include <vector>

#include "idbal/estimators.hpp"
#include "idbal/rng.hpp"

namespace idbal {
namespace {

FeatureVector at(double v) { return FeatureVector::from_entries({{1, v}}); }

Propensity constant(double q) {
  return [q](std::uint64_t, const FeatureVector&) { return q; };
}

Propensity by_id(std::vector<double> q) {
  return [q = std::move(q)](std::uint64_t id, const FeatureVector&) { return q.at(id); };
}

const auto always0 = [](std::uint64_t, const FeatureVector&) { return Label::kZero; };
const auto always1 = [](std::uint64_t, const FeatureVector&) { return Label::kOne; };
const auto sign = [](std::uint64_t, const FeatureVector& x) { return label_of(x.at(1) >= 0.0); };

LoggedTriple one(std::uint64_t id, double v = 1.0) {
  return LoggedTriple::observed(id, at(v), Label::kOne);
}

TEST(IsError, SingleRecordWeight) {
  const std::vector<LoggedTriple> logged{one(0)};
  EXPECT_DOUBLE_EQ(is_error(always0, logged, {}, constant(0.5), constant(1.0)), 2.0);
}

TEST(IsError, AllHiddenIsZero) {
  const std::vector<LoggedTriple> logged{LoggedTriple::hidden(0, at(1)), LoggedTriple::hidden(1, at(2))};
  EXPECT_EQ(is_error(always0, logged, {}, constant(0.0), constant(1.0)), 0.0);
}

TEST(IsError, UnitPropensityIsEmpiricalMean) {
  const std::vector<LoggedTriple> logged{one(0, 1), one(1, 2), one(2, 3), one(3, -1)};
  EXPECT_DOUBLE_EQ(is_error(sign, logged, {}, constant(1.0), constant(1.0)), 0.25);
}

TEST(IsError, UsesTheSourcePropensity) {
  const std::vector<LoggedTriple> logged{one(0)};
  const std::vector<LoggedTriple> online{one(1)};
  // (1/2) * (1/0.25 + 1/0.5)
  EXPECT_DOUBLE_EQ(is_error(always0, logged, online, constant(0.25), constant(0.5)), 3.0);
}

TEST(IsError, LabeledZeroPropensityThrows) {
  const std::vector<LoggedTriple> logged{one(0)};
  EXPECT_THROW(is_error(always0, logged, {}, constant(0.0), constant(1.0)), std::domain_error);
  // A correct prediction on a zero-propensity labeled record is still an impossible event.
  EXPECT_THROW(is_error(always1, logged, {}, constant(0.0), constant(1.0)), std::domain_error);
}

TEST(MisError, PooledDenominator) {
  const std::vector<LoggedTriple> logged{one(0)};
  const std::vector<LoggedTriple> online{one(1)};
  const auto s = make_mis_sample(logged, online, constant(0.2), constant(1.0));
  EXPECT_DOUBLE_EQ(mis_error(always0, s), 2.0 / 1.2);
  EXPECT_EQ(mis_error(always1, s), 0.0);
}

TEST(MisError, UnitPropensitiesGiveThePlainEmpiricalError) {
  Rng rng(3);
  std::vector<LoggedTriple> logged;
  std::vector<LoggedTriple> online;
  std::size_t wrong = 0;
  for (std::uint64_t i = 0; i < 37; ++i) {
    const double v = rng.uniform(-1, 1);
    const Label y = label_of(rng.bernoulli(0.6));
    auto t = LoggedTriple::observed(i, at(v), y);
    wrong += sign(i, t.x()) != y;
    (i < 20 ? logged : online).push_back(t);
  }
  const auto s = make_mis_sample(logged, online, constant(1.0), constant(1.0));
  EXPECT_DOUBLE_EQ(mis_error(sign, s), static_cast<double>(wrong) / 37.0);
}

TEST(MisError, HiddenRecordsContributeNothing) {
  const std::vector<LoggedTriple> logged{LoggedTriple::hidden(0, at(1)), one(1)};
  const auto s = make_mis_sample(logged, {}, by_id({0.0, 0.5}), constant(1.0));
  EXPECT_DOUBLE_EQ(mis_error(always0, s), 1.0);
}

TEST(MisError, RejectsImportanceSamples) {
  const std::vector<LoggedTriple> logged{one(0)};
  const auto s = make_is_sample(logged, {}, constant(1.0), constant(1.0));
  EXPECT_THROW(mis_error(always0, s), std::invalid_argument);
}

TEST(MisError, ZeroDenominatorThrows) {
  const std::vector<LoggedTriple> logged{one(0)};
  const auto s = make_mis_sample(logged, {}, constant(0.0), constant(0.0));
  EXPECT_THROW(mis_error(always0, s), std::domain_error);
}

TEST(Disagreement, Examples) {
  const std::vector<Instance> xs{{0, at(1)}, {1, at(2)}, {2, at(-3)}, {3, at(4)}};
  const std::span<const Instance> s(xs);
  EXPECT_EQ(empirical_disagreement(sign, sign, s), 0.0);
  const auto complement = [](std::uint64_t id, const FeatureVector& x) { return flip(sign(id, x)); };
  EXPECT_EQ(empirical_disagreement(sign, complement, s), 1.0);
  EXPECT_DOUBLE_EQ(empirical_disagreement(sign, always1, s), 0.25);
  EXPECT_THROW(empirical_disagreement(sign, always1, std::span<const Instance>{}), std::invalid_argument);
}

TEST(Disagreement, IgnoresLabelsAndZ) {
  const std::vector<LoggedTriple> recs{LoggedTriple::hidden(0, at(-1)), one(1, 1), one(2, -2),
                                       LoggedTriple::hidden(3, at(5))};
  EXPECT_DOUBLE_EQ(empirical_disagreement(sign, always1, std::span<const LoggedTriple>(recs)), 0.5);
  const auto s = make_mis_sample(recs, {}, constant(1.0), constant(1.0));
  EXPECT_DOUBLE_EQ(empirical_disagreement(sign, always1, std::span<const WeightedRecord>(s.records)), 0.5);
}

TEST(Sigma, Examples) {
  BoundConfig cfg;
  cfg.hypothesis_count = 8;
  cfg.delta = 0.5;
  EXPECT_DOUBLE_EQ(sigma({4.0, 0.0}, 1.0, cfg), std::log(16.0) / 4.0);
  EXPECT_NEAR(sigma({2.0, 2.0}, 1.0, cfg), 0.6931, 1e-4);
  EXPECT_DOUBLE_EQ(sigma({4.0, 4.0}, 1.0, cfg), sigma({2.0, 2.0}, 1.0, cfg) / 2.0);
  EXPECT_DOUBLE_EQ(sigma({10.0, 1.0}, 0.3, cfg), std::log(16.0) / 4.0);

  BoundConfig unit;
  unit.hypothesis_count = 1;
  unit.delta = 1.0;  // ratio 1; outside validate()'s domain but well defined here
  EXPECT_EQ(sigma({3.0, 1.0}, 0.5, unit), 0.0);

  EXPECT_THROW(sigma({5.0, 0.0}, 0.0, cfg), std::domain_error);
}

TEST(DeltaBound, Examples) {
  BoundConfig cfg;
  EXPECT_DOUBLE_EQ(delta_bound(0.25, 0.25, cfg), 0.5);
  EXPECT_DOUBLE_EQ(delta_bound(0.3, 0.0, cfg), 0.3);
  EXPECT_EQ(delta_bound(0.0, 0.7, cfg), 0.0);
  cfg.gamma0 = 2.0;
  EXPECT_DOUBLE_EQ(delta_bound(0.25, 0.25, cfg), 1.0);
}

TEST(DeltaBound, MonotoneInBothArguments) {
  const BoundConfig cfg;
  for (double s = 0.0; s < 2.0; s += 0.1) {
    for (double r = 0.0; r < 1.0; r += 0.1) {
      EXPECT_LE(delta_bound(s, r, cfg), delta_bound(s + 0.05, r, cfg));
      EXPECT_LE(delta_bound(s, r, cfg), delta_bound(s, std::min(1.0, r + 0.05), cfg));
    }
  }
}

TEST(BoundConfig, Validation) {
  BoundConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.gamma0 = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.hypothesis_count = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace idbal
