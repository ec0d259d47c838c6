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

// Hypothesis representations for the two execution modes.
//
// Exact mode works with an explicit finite class: ERM is a scan over the
// active members, the candidate set is an explicit index list, and
// disagreement is tested member by member.
//
// Practical mode works with a single linear model trained by importance
// weighted online gradient descent on the squared loss; the candidate set is
// never materialised and membership in its disagreement region is decided by
// a margin test against the current ERM.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idbal/data.hpp"
#include "idbal/estimators.hpp"
#include "idbal/execution.hpp"

namespace idbal {

// Linear classifier 1{w . x~ >= 0}, with x~ = (1, x). weights[0] is the bias.
struct LinearModel {
  std::vector<double> weights;
  std::uint64_t trained_steps = 0;
  double last_stepsize = 0.0;  // stepsize of the most recent update, 0 if none

  LinearModel() : weights(1, 0.0) {}
  explicit LinearModel(std::size_t dim) : weights(dim + 1, 0.0) {}
  explicit LinearModel(std::vector<double> w) : weights(std::move(w)) {
    if (weights.empty()) weights.push_back(0.0);
  }

  // Feature indices beyond the weight vector contribute 0.
  double score(const FeatureVector& x) const {
    double s = weights[0];
    for (const auto& f : x.entries()) {
      if (f.index < weights.size()) s += weights[f.index] * f.value;
    }
    return s;
  }
  Label predict(const FeatureVector& x) const { return label_of(score(x) >= 0.0); }
  Label operator()(std::uint64_t, const FeatureVector& x) const { return predict(x); }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

inline Label predict(const LinearModel& h, const FeatureVector& x) { return h.predict(x); }

// One-line CSV of the weights, bias first, shortest round-trip formatting.
std::string to_csv_line(const LinearModel& model);
LinearModel linear_model_from_csv_line(const std::string& line);

// sqrt(eta / (t + eta)).
double ogd_stepsize(std::uint64_t t, double eta);

// Squared-loss target in {-1, +1}.
constexpr double regression_target(Label y) { return y == Label::kOne ? 1.0 : -1.0; }

// Plain gradient step on weight * (w . x~ - y~)^2 with the pre-increment
// stepsize: w <- w - a * weight * 2 * (w . x~ - y~) * x~. Increments
// trained_steps and returns the stepsize used.
double ogd_update(LinearModel& model, const FeatureVector& x, Label y, double importance_weight,
                  double eta);

// Importance-aware step for the same loss and stepsize: the closed-form
// solution of the gradient flow over the importance weight, so a large weight
// moves the prediction at most up to the target and never overshoots. Agrees
// with ogd_update to first order in importance_weight.
double importance_aware_update(LinearModel& model, const FeatureVector& x, Label y,
                               double importance_weight, double eta);

enum class UpdateRule : std::uint8_t { kGradient, kImportanceAware };

double apply_update(UpdateRule rule, LinearModel& model, const FeatureVector& x, Label y,
                    double importance_weight, double eta);

struct ApproxDisParams {
  double stepsize = 1.0;     // a: stepsize of the most recent update
  double C = 1.0;            // model capacity
  double erm_loss = 0.0;     // l(h_k, S~_k)
  double effective_n = 1.0;  // m_k * xi_k + n_k
  double segment_size = 1.0; // m_k + n_k

  // sqrt(C * erm_loss / effective_n) + C * ln(segment_size) / effective_n.
  double threshold() const;
};

// x is declared inside the disagreement region when
// |2 w . x~| / (a * x~ . x~) <= threshold().
bool approx_dis_test(const LinearModel& erm, const FeatureVector& x, const ApproxDisParams& p);
bool approx_dis_test(const LinearModel& erm, const FeatureVector& x, double threshold,
                     double stepsize);

// Fraction of examples misclassified.
double zero_one_error(const LinearModel& model, std::span<const Example> data,
                      Execution exec = Execution::kSerial);

// ---------------------------------------------------------------------------
// Exact mode.

// Explicit labels over a pool of instances, indexed by instance id.
struct LabelTable {
  std::vector<bool> labels;
};

class FiniteClass {
 public:
  using Member = std::variant<LabelTable, LinearModel>;

  explicit FiniteClass(std::vector<Member> members);
  // Members given as label rows over a pool of `pool_size` ids.
  static FiniteClass from_label_rows(const std::vector<std::vector<Label>>& rows);

  std::size_t size() const { return members_.size(); }
  const Member& member(std::size_t i) const { return members_.at(i); }

  // Throws std::out_of_range when a label table does not cover the id.
  Label predict(std::size_t member, std::uint64_t id, const FeatureVector& x) const;

  // Classifier view of member i; the class must outlive the view.
  auto classifier(std::size_t i) const {
    return [this, i](std::uint64_t id, const FeatureVector& x) { return predict(i, id, x); };
  }

 private:
  std::vector<Member> members_;
};

struct CandidateSetExact {
  std::vector<std::size_t> active;  // ascending member indices

  static CandidateSetExact all(const FiniteClass& cls);
  bool contains(std::size_t i) const;
  bool subset_of(const CandidateSetExact& other) const;
  std::size_t size() const { return active.size(); }
  friend bool operator==(const CandidateSetExact&, const CandidateSetExact&) = default;
};

struct ErmResult {
  std::size_t index = 0;
  double value = 0.0;
};

// Estimator value of each active member, in `restrict` order.
std::vector<double> member_errors(const FiniteClass& cls, const WeightedSample& sample,
                                  const CandidateSetExact& restrict);

// Minimiser of the sample's estimator over `restrict`; ties go to the lowest
// index.
ErmResult erm_weighted(const FiniteClass& cls, const WeightedSample& sample,
                       const CandidateSetExact& restrict);

// Delta(h, erm) for member indices.
using ThresholdFn = std::function<double(std::size_t member, std::size_t erm)>;

// Keeps h in current with l(h) <= l(erm) + threshold(h, erm). Always keeps erm.
CandidateSetExact update_candidates(const FiniteClass& cls, const WeightedSample& sample,
                                    const CandidateSetExact& current, const ThresholdFn& threshold);

// The standard threshold: delta_bound(sigma, rho_S(h, erm)) with rho over all
// records of the sample.
ThresholdFn disagreement_threshold(const FiniteClass& cls, const WeightedSample& sample,
                                   double sigma_val, const BoundConfig& cfg);

// 1 iff two active members label (id, x) differently.
bool exact_dis_test(const FiniteClass& cls, const CandidateSetExact& candidates, std::uint64_t id,
                    const FeatureVector& x);

}  // namespace idbal
