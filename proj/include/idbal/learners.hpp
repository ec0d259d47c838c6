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

// Disagreement-based active learning with logged data and its baselines.
//
// The logged set T0 and the online stream are cut into disjoint segments
// (see PartitionPlan). Iteration k estimates errors on
// S~_k = T0^(k) u T~_k only, prunes the candidate set, and then walks the next
// online segment: an example is dropped when the query rule says Q_{k+1}(x) = 0,
// its label is queried when x lies in the disagreement region, and otherwise
// the label is inferred from the current ERM.
//
//   passive  queries every online label; importance-sampling ERM.
//   dbalw    warm start, importance-sampling estimator, Q_k = 1.
//   dbalwm   warm start, multiple-importance estimator, Q_k = 1.
//   idbal    warm start, multiple-importance estimator, debiased Q_k.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idbal/data.hpp"
#include "idbal/estimators.hpp"
#include "idbal/hypotheses.hpp"
#include "idbal/policies.hpp"

namespace idbal {

enum class Algorithm : std::uint8_t { kPassive, kDbalw, kDbalwm, kIdbal };
enum class Mode : std::uint8_t { kExact, kPractical };

std::string to_string(Algorithm a);
std::string to_string(Mode m);
Algorithm parse_algorithm(std::string_view name);
Mode parse_mode(std::string_view name);

struct PartitionPlan {
  std::size_t K = 0;
  std::vector<std::size_t> n_parts;  // n_1..n_K, stored at [0..K-1]
  std::vector<std::size_t> m_parts;  // m_0..m_K
  double alpha = 0.0;                // 2m / (3n)

  // n_k with n_0 = 0.
  std::size_t n_at(std::size_t k) const { return k == 0 ? 0 : n_parts[k - 1]; }
  std::size_t m_at(std::size_t k) const { return m_parts[k]; }
  // First index of T0^(k) in the logged set and of T_k in the online stream.
  std::size_t logged_offset(std::size_t k) const;
  std::size_t online_offset(std::size_t k) const;
};

// K = ceil(log2(n + 1)); n_k = 2^(k-1) with the last part truncated to what
// remains; m_k = floor(alpha * n_k) for k >= 1 and m_0 takes the rest.
PartitionPlan plan_partition(std::size_t m, std::size_t n);

// 1 iff q0 <= xi + 1/alpha.
bool debias_rule(double q0_at_x, double xi, double alpha);

struct AlgoConfig {
  Mode mode = Mode::kPractical;
  double delta = 0.1;
  BoundConfig bound;  // hypothesis_count is taken from the class in exact mode
  double C = 1.0;
  double eta = 0.01;
  UpdateRule update = UpdateRule::kImportanceAware;
  // Size of the unlabeled sample used to estimate xi_k in practical mode;
  // 0 uses every instance supplied.
  std::size_t infimum_sample = 0;
  // Keep S~_k, its true-label counterpart, and V_k for every iteration.
  bool keep_audit = false;

  void validate() const;
  std::string fingerprint() const;
};

// Exact mode: explicit finite class over a pool of instances. The pool is the
// support of the instance distribution; xi_k and D_k are computed over it.
struct ExactSpace {
  const FiniteClass* cls = nullptr;
  std::vector<Instance> pool;
};

// Practical mode: linear models with `dim` features. `unlabeled` is the sample
// for estimating xi_k; when empty, the logged instances are used.
struct LinearSpace {
  std::size_t dim = 0;
  std::vector<Instance> unlabeled;
};

using HypothesisSpace = std::variant<ExactSpace, LinearSpace>;

enum class Decision : std::uint8_t { kQueried, kInferred, kDiscarded };

struct SegmentAudit {
  WeightedSample inferred;      // S~_k as the learner saw it
  WeightedSample truth;         // the same records with true labels
  CandidateSetExact candidates; // V_k (exact mode)
};

struct TracePoint {
  std::size_t horizon = 0;
  std::size_t queries = 0;
  double test_error = 0.0;
};

using FinalClassifier = std::variant<std::size_t, LinearModel>;  // member index or model

struct RunResult {
  FinalClassifier final_classifier;
  std::vector<std::size_t> queries_per_iteration;  // online segment k+1 at index k
  std::vector<Decision> decisions;                 // one per online example
  std::size_t query_count = 0;
  std::size_t inferred_count = 0;
  std::size_t discarded_count = 0;
  std::vector<double> xi;                          // xi_0..xi_K
  std::vector<CandidateSetExact> candidate_history;  // V_0..V_K (exact mode)
  std::vector<SegmentAudit> audit;
  std::vector<TracePoint> trace;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  std::vector<std::string> warnings;  // e.g. alpha < 1
};

// Label of the final classifier on (id, x).
Label predict(const RunResult& r, const HypothesisSpace& space, std::uint64_t id,
              const FeatureVector& x);
double test_error(const RunResult& r, const HypothesisSpace& space, std::span<const Example> test,
                  Execution exec = Execution::kSerial);

RunResult run_idbal(std::span<const LoggedTriple> logged, std::span<const Example> online,
                    const LoggingPolicy& policy, const HypothesisSpace& space,
                    const AlgoConfig& cfg, std::uint64_t seed);
RunResult run_dbalwm(std::span<const LoggedTriple> logged, std::span<const Example> online,
                     const LoggingPolicy& policy, const HypothesisSpace& space,
                     const AlgoConfig& cfg, std::uint64_t seed);
RunResult run_dbalw(std::span<const LoggedTriple> logged, std::span<const Example> online,
                    const LoggingPolicy& policy, const HypothesisSpace& space,
                    const AlgoConfig& cfg, std::uint64_t seed);
RunResult run_passive(std::span<const LoggedTriple> logged, std::span<const Example> online,
                      const LoggingPolicy& policy, const HypothesisSpace& space,
                      const AlgoConfig& cfg, std::uint64_t seed);

RunResult run_algorithm(Algorithm algo, std::span<const LoggedTriple> logged,
                        std::span<const Example> online, const LoggingPolicy& policy,
                        const HypothesisSpace& space, const AlgoConfig& cfg, std::uint64_t seed);

// One run per horizon on the first `h` online examples; fills `trace` with
// (horizon, queries, test error) and returns the last horizon's classifier.
RunResult run_with_horizons(Algorithm algo, std::span<const LoggedTriple> logged,
                            std::span<const Example> online, std::span<const Example> test,
                            const LoggingPolicy& policy, const HypothesisSpace& space,
                            const AlgoConfig& cfg, std::span<const std::size_t> horizons,
                            std::uint64_t seed);

}  // namespace idbal
