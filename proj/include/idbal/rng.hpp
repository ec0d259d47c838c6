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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace idbal {

// Named sub-streams. Every consumer of randomness derives its own seed from
// its parent with one of these tags, so adding a consumer never perturbs the
// draws of another one.
enum class Stream : std::uint64_t {
  kSplit = 0x73706c6974,
  kLogging = 0x6c6f67,
  kLabelFlip = 0x666c6970,
  kLearner = 0x6c6561726e,
  kSeparator = 0x736570,
  kFeatures = 0x66656174,
  kCoarseModel = 0x636f61727365,
  kRepeat = 0x726570,
  kTrial = 0x747269616c,
  kFixture = 0x66697874,
  kOnline = 0x6f6e6c696e65,
};

// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream-derivation rule: child = mix64(mix64(parent) ^ tag).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  return mix64(mix64(parent) ^ tag);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream) {
  return derive_seed(parent, static_cast<std::uint64_t>(stream));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream,
                                    std::uint64_t index) {
  return derive_seed(derive_seed(parent, stream), index);
}

std::uint64_t hash_name(std::string_view name);

// Seedable generator with platform-independent output: the engine is
// mt19937_64 (sequence fixed by the standard) and every distribution below is
// implemented here rather than taken from <random>, whose distributions are
// implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);

  double normal();

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace idbal
