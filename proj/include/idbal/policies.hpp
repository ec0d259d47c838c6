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

// Logging policies Q0 : X -> [0, 1] and infimum estimation over regions.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>

#include "idbal/data.hpp"
#include "idbal/hypotheses.hpp"

namespace idbal {

namespace policy {

struct Identical {
  double p = 0.005;
};

// Each instance falls in one of three groups by a seeded hash of its feature
// bytes; group g reveals with probability probs[g].
struct UniformGroups {
  std::array<double, 3> probs{0.005, 0.05, 0.5};
  std::uint64_t group_seed = 0;
};

// exp(-c r^2), r the geometric distance to the coarse model's boundary.
struct Uncertainty {
  double c = 1.0;
  LinearModel coarse;
};

// min(1, c r^2).
struct Certainty {
  double c = 1.0;
  LinearModel coarse;
};

// Explicit per-instance probabilities keyed by instance id.
struct Table {
  std::map<std::uint64_t, double> probs;
};

}  // namespace policy

using LoggingPolicy = std::variant<policy::Identical, policy::UniformGroups, policy::Uncertainty,
                                   policy::Certainty, policy::Table>;

std::string policy_name(const LoggingPolicy& p);

// Group in {0, 1, 2}; depends only on the instance's features and the seed.
int uniform_group(const FeatureVector& x, std::uint64_t group_seed);

// |w . x~| / ||w_{1..d}||_2; the bias is left out of the norm. A model with
// no feature weights puts every point on its boundary (r = 0).
double boundary_distance(const LinearModel& coarse, const FeatureVector& x);

// Deterministic, always in [0, 1]. Throws std::out_of_range when a Table
// policy lacks the id.
double policy_prob(const LoggingPolicy& p, std::uint64_t id, const FeatureVector& x);

inline Propensity as_propensity(const LoggingPolicy& p) {
  return [&p](std::uint64_t id, const FeatureVector& x) { return policy_prob(p, id, x); };
}

struct CoarseFitOptions {
  double eta = 0.01;
  UpdateRule rule = UpdateRule::kImportanceAware;
};

// Linear model trained by unit-weight OGD on a seeded random
// round(fraction * |data|) subsample; throws when that rounds to zero.
LinearModel fit_coarse_model(std::span<const Example> data, double fraction, std::uint64_t seed,
                             const CoarseFitOptions& options = {});

// Minimum of policy_prob over sample members in the region; 1 when none is.
// Never below the true infimum over the sampled support.
template <class Record, class Region>
double policy_infimum(const LoggingPolicy& p, Region&& in_region, std::span<const Record> sample) {
  double best = 1.0;
  for (const auto& r : sample) {
    if (in_region(r)) best = std::min(best, policy_prob(p, r.id, r.x));
  }
  return best;
}

// Bisection on c so that the mean reveal probability over `data` is `target`.
// Applies to Uncertainty and Certainty; other variants are returned unchanged.
LoggingPolicy calibrate_policy(LoggingPolicy p, std::span<const Example> data, double target);

// Two-column CSV `instance_id,probability`; an optional header line is
// skipped.
policy::Table read_policy_table(const std::string& path);
policy::Table parse_policy_table(std::string_view text);

}  // namespace idbal
