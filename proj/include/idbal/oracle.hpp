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

// Brute-force verification on small discrete problems: exact error rates and
// disagreement geometry, Monte-Carlo checks of the estimators, and the
// sequences that drive the consistency and label-complexity bounds.
//
// A DiscreteInstance is a distribution over a finite pool (pool[i].id == i)
// together with a finite class and a logging policy given per instance. Zero
// mass points are outside the support: they never enter DIS(.), S(., .), or a
// supremum over the instance space.

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "idbal/data.hpp"
#include "idbal/estimators.hpp"
#include "idbal/execution.hpp"
#include "idbal/hypotheses.hpp"
#include "idbal/learners.hpp"
#include "idbal/rng.hpp"

namespace idbal {

struct DiscreteInstance {
  std::vector<Instance> pool;
  std::vector<double> mass;  // sums to 1
  std::vector<double> p1;    // Pr(Y = 1 | x)
  FiniteClass cls;
  std::vector<double> q0;    // logging propensities

  void validate() const;
  std::size_t size() const { return pool.size(); }
  Propensity q0_propensity() const;
  policy::Table q0_policy() const;
};

// How one draw of logged + online data is generated: m logged records with
// z ~ Q0(x), n online records with z ~ Q1(x).
struct SamplingSetup {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> q1;  // per instance; empty means Q1 = 1

  Propensity q1_propensity() const;
};

double true_error(const DiscreteInstance& inst, std::size_t member);
// rho(h1, h2) = Pr(h1(X) != h2(X)).
double disagreement_mass(const DiscreteInstance& inst, std::size_t h1, std::size_t h2);

struct BestMember {
  std::size_t index = 0;  // lowest index among minimisers
  double error = 0.0;     // nu
};
BestMember best_member(const DiscreteInstance& inst);

// B(h, r) = {h' : rho(h, h') <= r}.
CandidateSetExact dis_ball(const DiscreteInstance& inst, std::size_t center, double r);
// DIS(V) over the support, as ascending instance indices.
std::vector<std::size_t> dis_region(const DiscreteInstance& inst, const CandidateSetExact& v);
double region_mass(const DiscreteInstance& inst, std::span<const std::size_t> region);

enum class SRegionVariant : std::uint8_t { kLiteral, kRestricted };

// Literal: union over every nonempty A' of region of
// A' n {x : Q0(x) <= inf_{A'} Q0 + 1/alpha}; pools above kLiteralPoolLimit are
// rejected. Restricted: region n {x : Q0(x) <= inf_region Q0 + 1/alpha}.
inline constexpr std::size_t kLiteralPoolLimit = 20;
std::vector<std::size_t> s_region(const DiscreteInstance& inst, std::span<const std::size_t> region,
                                  double alpha, SRegionVariant variant);

// sup_{r > r0} Pr(S(DIS(B(h*, r)), alpha)) / r, evaluated at r0+ and at every
// achievable rho(h*, h) above r0.
double adjusted_dis_coefficient(const DiscreteInstance& inst, double r0, double alpha,
                                SRegionVariant variant = SRegionVariant::kRestricted);
// sup_{r > r0} Pr(DIS(B(h*, r))) / r, computed from the members that
// disagree with h* instead of through DIS/S.
double standard_dis_coefficient(const DiscreteInstance& inst, double r0);

struct Draw {
  std::vector<LoggedTriple> logged;
  std::vector<LoggedTriple> online;    // logged by Q1
  std::vector<Example> online_examples;  // the same online draws, fully labeled
};
// One i.i.d. draw of the generative process.
Draw draw_sample(const DiscreteInstance& inst, const SamplingSetup& setup, Rng& rng);

struct McStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  double true_value = 0.0;
  double variance = 0.0;
  std::size_t trials = 0;
};

// Monte-Carlo mean of the estimator of l(h) over `trials` independent
// redraws. Trial t uses the seed derive_seed(seed, kTrial, t), so the result is
// independent of the execution path.
McStats mc_unbiasedness(const DiscreteInstance& inst, std::size_t member, const SamplingSetup& setup,
                        std::size_t trials, std::uint64_t seed,
                        Weighting weighting = Weighting::kMultipleImportance,
                        Execution exec = Execution::kParallel);

struct VarianceComparison {
  double var_is = 0.0;
  double var_mis = 0.0;
  double mean_is = 0.0;
  double mean_mis = 0.0;
};
// Sample variances of both estimators on shared draws.
VarianceComparison variance_compare(const DiscreteInstance& inst, std::size_t member,
                                    const SamplingSetup& setup, std::size_t trials, std::uint64_t seed,
                                    Execution exec = Execution::kParallel);

struct ConcentrationRow {
  std::size_t effective_size = 0;
  double quantile = 0.0;
};
struct ConcentrationTable {
  std::vector<ConcentrationRow> rows;
  double slope = 0.0;  // least-squares slope of ln(quantile) on ln(N); NaN if degenerate
};
// For each N, the 0.9-quantile of |(l(h1,S) - l(h2,S)) - (l(h1) - l(h2))|
// over `trials` draws of S with m = N/2 logged and n = N - N/2 online
// records, using the MIS estimator with Q1 from `setup` (its m, n ignored).
ConcentrationTable concentration_rate(const DiscreteInstance& inst, std::size_t h1, std::size_t h2,
                                      std::span<const std::size_t> effective_sizes,
                                      const SamplingSetup& setup, std::size_t trials,
                                      std::uint64_t seed, Execution exec = Execution::kParallel);

struct TheoryQuantities {
  double nu = 0.0;
  std::size_t h_star_index = 0;
  std::vector<double> zeta_k;                   // k = 1..K at [k-1]
  std::vector<double> epsilon_k;                // k = 1..K at [k-1]
  std::vector<std::vector<std::size_t>> dis_k;  // DIS_0..DIS_K
  double zeta = 0.0;
  double gamma2 = 1.0;
};
TheoryQuantities theory_sequences(const DiscreteInstance& inst, const PartitionPlan& plan,
                                  double delta, double gamma2 = 1.0);

struct FixtureOptions {
  std::size_t pool_size = 8;
  std::size_t class_size = 16;
  double min_q0 = 0.01;
  bool force_small_propensity = true;  // at least one q0 <= 0.05
  double label_noise = 0.1;            // p1 in {noise, 1 - noise}; 0 gives random p1
};
// Random instance: Dirichlet(1) masses, a Bayes classifier plus perturbed
// copies as the class (deduplicated, shuffled), and random propensities.
DiscreteInstance random_fixture(std::uint64_t seed, const FixtureOptions& options = {});

struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20260101;
  std::size_t fixtures = 20;
  std::size_t trials = 100000;
  std::size_t exact_runs = 100;
  Execution exec = Execution::kParallel;
};

// Runs the oracle checks and returns one row per check.
std::vector<CheckResult> run_verification(const VerifyOptions& options);
void write_verification_csv(std::ostream& out, std::span<const CheckResult> rows);

}  // namespace idbal
