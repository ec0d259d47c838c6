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

#include "idbal/hypotheses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace idbal {

std::string to_csv_line(const LinearModel& model) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (i > 0) out += ',';
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, model.weights[i]);
    out.append(buf, ptr);
  }
  return out;
}

LinearModel linear_model_from_csv_line(const std::string& line) {
  std::vector<double> w;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    auto comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string_view tok(line.data() + pos, comma - pos);
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == '\n' || tok.back() == ' ')) {
      tok.remove_suffix(1);
    }
    double v;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw std::invalid_argument("bad weight '" + std::string(tok) + "'");
    }
    w.push_back(v);
    pos = comma + 1;
  }
  return LinearModel(std::move(w));
}

double ogd_stepsize(std::uint64_t t, double eta) {
  return std::sqrt(eta / (static_cast<double>(t) + eta));
}

namespace {

void ensure_dim(LinearModel& model, const FeatureVector& x) {
  const auto need = static_cast<std::size_t>(x.max_index()) + 1;
  if (model.weights.size() < need) model.weights.resize(need, 0.0);
}

// w <- w - coef * x~
void axpy(LinearModel& model, const FeatureVector& x, double coef) {
  model.weights[0] -= coef;
  for (const auto& f : x.entries()) model.weights[f.index] -= coef * f.value;
}

}  // namespace

double ogd_update(LinearModel& model, const FeatureVector& x, Label y, double importance_weight,
                  double eta) {
  if (importance_weight < 0.0) throw std::invalid_argument("importance weight must be >= 0");
  const double a = ogd_stepsize(model.trained_steps, eta);
  ++model.trained_steps;
  model.last_stepsize = a;
  if (importance_weight == 0.0) return a;
  ensure_dim(model, x);
  const double residual = model.score(x) - regression_target(y);
  axpy(model, x, a * importance_weight * 2.0 * residual);
  return a;
}

double importance_aware_update(LinearModel& model, const FeatureVector& x, Label y,
                               double importance_weight, double eta) {
  if (importance_weight < 0.0) throw std::invalid_argument("importance weight must be >= 0");
  const double a = ogd_stepsize(model.trained_steps, eta);
  ++model.trained_steps;
  model.last_stepsize = a;
  if (importance_weight == 0.0) return a;
  ensure_dim(model, x);
  const double residual = model.score(x) - regression_target(y);
  const double q = 1.0 + x.squared_norm();
  // Prediction follows p(s) = y + (p - y) exp(-2 a q s) for s in [0, weight].
  const double shrink = -std::expm1(-2.0 * a * importance_weight * q);
  axpy(model, x, residual * shrink / q);
  return a;
}

double apply_update(UpdateRule rule, LinearModel& model, const FeatureVector& x, Label y,
                    double importance_weight, double eta) {
  return rule == UpdateRule::kGradient ? ogd_update(model, x, y, importance_weight, eta)
                                       : importance_aware_update(model, x, y, importance_weight, eta);
}

double ApproxDisParams::threshold() const {
  return std::sqrt(C * erm_loss / effective_n) + C * std::log(segment_size) / effective_n;
}

bool approx_dis_test(const LinearModel& erm, const FeatureVector& x, double threshold,
                     double stepsize) {
  const double lhs = std::abs(2.0 * erm.score(x)) / (stepsize * (1.0 + x.squared_norm()));
  return lhs <= threshold;
}

bool approx_dis_test(const LinearModel& erm, const FeatureVector& x, const ApproxDisParams& p) {
  return approx_dis_test(erm, x, p.threshold(), p.stepsize);
}

double zero_one_error(const LinearModel& model, std::span<const Example> data, Execution exec) {
  if (data.empty()) return 0.0;
  const auto n = static_cast<std::int64_t>(data.size());
  std::int64_t errors = 0;
  if (exec == Execution::kParallel) {
#pragma omp parallel for reduction(+ : errors) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      errors += model.predict(data[i].x) != data[i].y ? 1 : 0;
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      errors += model.predict(data[i].x) != data[i].y ? 1 : 0;
    }
  }
  return static_cast<double>(errors) / static_cast<double>(n);
}

FiniteClass::FiniteClass(std::vector<Member> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("finite class must be nonempty");
}

FiniteClass FiniteClass::from_label_rows(const std::vector<std::vector<Label>>& rows) {
  std::vector<Member> members;
  members.reserve(rows.size());
  for (const auto& row : rows) {
    LabelTable t;
    t.labels.resize(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) t.labels[i] = row[i] == Label::kOne;
    members.emplace_back(std::move(t));
  }
  return FiniteClass(std::move(members));
}

Label FiniteClass::predict(std::size_t member, std::uint64_t id, const FeatureVector& x) const {
  const auto& m = members_[member];
  if (const auto* table = std::get_if<LabelTable>(&m)) {
    if (id >= table->labels.size()) {
      throw std::out_of_range("label table does not cover instance " + std::to_string(id));
    }
    return label_of(table->labels[id]);
  }
  return std::get<LinearModel>(m).predict(x);
}

CandidateSetExact CandidateSetExact::all(const FiniteClass& cls) {
  CandidateSetExact s;
  s.active.resize(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) s.active[i] = i;
  return s;
}

bool CandidateSetExact::contains(std::size_t i) const {
  return std::binary_search(active.begin(), active.end(), i);
}

bool CandidateSetExact::subset_of(const CandidateSetExact& other) const {
  return std::includes(other.active.begin(), other.active.end(), active.begin(), active.end());
}

std::vector<double> member_errors(const FiniteClass& cls, const WeightedSample& sample,
                                  const CandidateSetExact& restrict) {
  std::vector<double> out;
  out.reserve(restrict.size());
  for (auto i : restrict.active) out.push_back(estimate_error(cls.classifier(i), sample));
  return out;
}

ErmResult erm_weighted(const FiniteClass& cls, const WeightedSample& sample,
                       const CandidateSetExact& restrict) {
  if (restrict.active.empty()) throw std::invalid_argument("ERM over an empty candidate set");
  const auto errs = member_errors(cls, sample, restrict);
  ErmResult best{restrict.active[0], errs[0]};
  for (std::size_t j = 1; j < errs.size(); ++j) {
    if (errs[j] < best.value) best = {restrict.active[j], errs[j]};
  }
  return best;
}

CandidateSetExact update_candidates(const FiniteClass& cls, const WeightedSample& sample,
                                    const CandidateSetExact& current, const ThresholdFn& threshold) {
  if (current.active.empty()) throw std::invalid_argument("update of an empty candidate set");
  const auto errs = member_errors(cls, sample, current);
  std::size_t best = 0;
  for (std::size_t j = 1; j < errs.size(); ++j) {
    if (errs[j] < errs[best]) best = j;
  }
  const auto erm = current.active[best];
  CandidateSetExact next;
  for (std::size_t j = 0; j < errs.size(); ++j) {
    const auto h = current.active[j];
    if (h == erm || errs[j] <= errs[best] + threshold(h, erm)) next.active.push_back(h);
  }
  return next;
}

ThresholdFn disagreement_threshold(const FiniteClass& cls, const WeightedSample& sample,
                                   double sigma_val, const BoundConfig& cfg) {
  return [&cls, &sample, sigma_val, cfg](std::size_t h, std::size_t erm) {
    if (sample.records.empty()) return delta_bound(sigma_val, 0.0, cfg);
    const double rho = empirical_disagreement(cls.classifier(h), cls.classifier(erm),
                                              std::span<const WeightedRecord>(sample.records));
    return delta_bound(sigma_val, rho, cfg);
  };
}

bool exact_dis_test(const FiniteClass& cls, const CandidateSetExact& candidates, std::uint64_t id,
                    const FeatureVector& x) {
  if (candidates.active.empty()) return false;
  const Label first = cls.predict(candidates.active[0], id, x);
  for (std::size_t j = 1; j < candidates.active.size(); ++j) {
    if (cls.predict(candidates.active[j], id, x) != first) return true;
  }
  return false;
}

}  // namespace idbal
