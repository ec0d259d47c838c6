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

#include "idbal/estimators.hpp"

#include <cmath>

namespace idbal {

namespace detail {
void throw_zero_denominator(std::uint64_t id) {
  throw std::domain_error("labeled record " + std::to_string(id) +
                          " has zero propensity; the data is inconsistent with the policy");
}
}  // namespace detail

WeightedSample make_mis_sample(std::span<const LoggedTriple> logged,
                               std::span<const LoggedTriple> online, const Propensity& q0,
                               const Propensity& q1) {
  WeightedSample s;
  s.weighting = Weighting::kMultipleImportance;
  s.m = logged.size();
  s.n = online.size();
  s.records.reserve(s.m + s.n);
  const double m = static_cast<double>(s.m);
  const double n = static_cast<double>(s.n);
  auto denom = [&](const LoggedTriple& t) {
    return m * q0(t.id(), t.x()) + (s.n > 0 ? n * q1(t.id(), t.x()) : 0.0);
  };
  for (const auto& t : logged) s.records.push_back({t, denom(t)});
  for (const auto& t : online) s.records.push_back({t, denom(t)});
  return s;
}

WeightedSample make_is_sample(std::span<const LoggedTriple> logged,
                              std::span<const LoggedTriple> online, const Propensity& q0,
                              const Propensity& q1) {
  WeightedSample s;
  s.weighting = Weighting::kImportance;
  s.m = logged.size();
  s.n = online.size();
  s.records.reserve(s.m + s.n);
  for (const auto& t : logged) s.records.push_back({t, q0(t.id(), t.x())});
  for (const auto& t : online) s.records.push_back({t, q1(t.id(), t.x())});
  return s;
}

void BoundConfig::validate() const {
  if (!(gamma0 > 0.0) || !(gamma1 > 0.0)) throw std::invalid_argument("gamma constants must be positive");
  if (hypothesis_count == 0) throw std::invalid_argument("hypothesis_count must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

double sigma(SegmentSizes sizes, double xi, const BoundConfig& cfg) {
  const double denom = sizes.m * xi + sizes.n;
  if (!(denom > 0.0)) {
    throw std::domain_error("sigma: m*xi + n must be positive (empty segment)");
  }
  return std::log(static_cast<double>(cfg.hypothesis_count) / cfg.delta) / denom;
}

double delta_bound(double sigma_val, double rho, const BoundConfig& cfg) {
  return cfg.gamma0 * (sigma_val + std::sqrt(sigma_val * rho));
}

}  // namespace idbal
