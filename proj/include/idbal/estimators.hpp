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

// Importance-weighted error estimators over pooled logged + online records,
// empirical disagreement, and the concentration thresholds used to prune the
// candidate set.

#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "idbal/data.hpp"

namespace idbal {

// Anything that labels an instance identified by (id, x).
template <class F>
concept Classifier = requires(const F& h, std::uint64_t id, const FeatureVector& x) {
  { h(id, x) } -> std::convertible_to<Label>;
};

enum class Weighting : std::uint8_t {
  kImportance,          // (1/(m+n)) * sum z*err / Q_source(x)
  kMultipleImportance,  // sum z*err / (m*Q0(x) + n*Q1(x)), balance heuristic
};

struct WeightedRecord {
  LoggedTriple triple;
  double denominator = 1.0;
};

struct WeightedSample {
  Weighting weighting = Weighting::kMultipleImportance;
  std::vector<WeightedRecord> records;
  std::size_t m = 0;  // logged records
  std::size_t n = 0;  // online records

  // Multiplier applied to each z*err/denominator term.
  double scale() const {
    if (weighting == Weighting::kMultipleImportance) return 1.0;
    return (m + n) == 0 ? 0.0 : 1.0 / static_cast<double>(m + n);
  }
};

// Denominators m*Q0(x) + n*Q1(x) on every record, logged and online alike.
WeightedSample make_mis_sample(std::span<const LoggedTriple> logged,
                               std::span<const LoggedTriple> online, const Propensity& q0,
                               const Propensity& q1);
// Denominators Q0(x) on logged records and Q1(x) on online records.
WeightedSample make_is_sample(std::span<const LoggedTriple> logged,
                              std::span<const LoggedTriple> online, const Propensity& q0,
                              const Propensity& q1);

namespace detail {
[[noreturn]] void throw_zero_denominator(std::uint64_t id);
}

// Evaluates the sample's own weighting. z = 0 records contribute exactly 0,
// before any division. A z = 1 record with a non-positive denominator is an
// impossible event and raises std::domain_error.
template <Classifier H>
double estimate_error(const H& h, const WeightedSample& sample) {
  double sum = 0.0;
  for (const auto& r : sample.records) {
    if (!r.triple.z()) continue;
    if (!(r.denominator > 0.0)) detail::throw_zero_denominator(r.triple.id());
    if (h(r.triple.id(), r.triple.x()) != r.triple.label()) sum += 1.0 / r.denominator;
  }
  return sum * sample.scale();
}

template <Classifier H>
double is_error(const H& h, std::span<const LoggedTriple> logged,
                std::span<const LoggedTriple> online, const Propensity& q0,
                const Propensity& q1) {
  return estimate_error(h, make_is_sample(logged, online, q0, q1));
}

template <Classifier H>
double mis_error(const H& h, const WeightedSample& sample) {
  if (sample.weighting != Weighting::kMultipleImportance) {
    throw std::invalid_argument("mis_error needs a multiple-importance sample");
  }
  return estimate_error(h, sample);
}

// rho_S(h1, h2): fraction of instances on which h1 and h2 disagree. Labels
// and z are ignored.
template <Classifier H1, Classifier H2, class Record>
double empirical_disagreement(const H1& h1, const H2& h2, std::span<const Record> instances) {
  if (instances.empty()) throw std::invalid_argument("empirical_disagreement on an empty set");
  std::size_t count = 0;
  for (const auto& r : instances) {
    std::uint64_t id;
    const FeatureVector* x;
    if constexpr (std::same_as<Record, WeightedRecord>) {
      id = r.triple.id();
      x = &r.triple.x();
    } else if constexpr (std::same_as<Record, LoggedTriple>) {
      id = r.id();
      x = &r.x();
    } else {
      id = r.id;
      x = &r.x;
    }
    if (h1(id, *x) != h2(id, *x)) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(instances.size());
}

struct BoundConfig {
  double gamma0 = 1.0;
  double gamma1 = 1.0;
  std::size_t hypothesis_count = 1;
  double delta = 0.1;

  void validate() const;
};

struct SegmentSizes {
  double m = 0.0;  // logged records in the segment
  double n = 0.0;  // online records in the segment
};

// ln(|H| / delta) / (m*xi + n). Natural logarithm.
double sigma(SegmentSizes sizes, double xi, const BoundConfig& cfg);

// gamma0 * (sigma + sqrt(sigma * rho)).
double delta_bound(double sigma_val, double rho, const BoundConfig& cfg);

}  // namespace idbal
