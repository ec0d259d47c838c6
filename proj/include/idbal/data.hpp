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

// Data model for learning with logged data: sparse instances, labeled
// examples, logged (x, z, y-if-observed) records, splits, and the simulated
// logging process.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace idbal {

enum class Label : std::uint8_t { kZero = 0, kOne = 1 };

constexpr int to_int(Label y) { return static_cast<int>(y); }
constexpr Label flip(Label y) { return y == Label::kOne ? Label::kZero : Label::kOne; }
constexpr Label label_of(bool positive) { return positive ? Label::kOne : Label::kZero; }

struct Feature {
  std::uint32_t index = 0;  // 1-based
  double value = 0.0;
  friend bool operator==(const Feature&, const Feature&) = default;
};

// Immutable sparse vector. Entries are sorted by index and unique. Storage is
// shared between copies, so records can be copied into estimator samples
// without duplicating feature data.
class FeatureVector {
 public:
  FeatureVector() = default;

  // Validates and sorts. Throws std::invalid_argument on a zero index or a
  // duplicate index.
  static FeatureVector from_entries(std::vector<Feature> entries);
  // Dense coordinates x_1..x_d; zeros are omitted.
  static FeatureVector from_dense(std::span<const double> values);

  std::span<const Feature> entries() const {
    return entries_ ? std::span<const Feature>(*entries_) : std::span<const Feature>();
  }
  std::size_t size() const { return entries_ ? entries_->size() : 0; }
  bool empty() const { return size() == 0; }
  std::uint32_t max_index() const;
  double squared_norm() const;
  // Value at a 1-based index, 0 if absent.
  double at(std::uint32_t index) const;

  friend bool operator==(const FeatureVector& a, const FeatureVector& b);

 private:
  std::shared_ptr<const std::vector<Feature>> entries_;
};

struct Example {
  std::uint64_t id = 0;
  FeatureVector x;
  Label y = Label::kZero;
  friend bool operator==(const Example&, const Example&) = default;
};

// An unlabeled instance.
struct Instance {
  std::uint64_t id = 0;
  FeatureVector x;
};

enum class LabelSource : std::uint8_t { kQueried, kInferred };

// One logged or online record. A label is present exactly when z = 1; the
// factories are the only way to build one, so the invariant holds by
// construction.
class LoggedTriple {
 public:
  static LoggedTriple observed(std::uint64_t id, FeatureVector x, Label y,
                               LabelSource source = LabelSource::kQueried);
  static LoggedTriple hidden(std::uint64_t id, FeatureVector x);

  std::uint64_t id() const { return id_; }
  const FeatureVector& x() const { return x_; }
  bool z() const { return z_; }
  // Throws std::logic_error when z = 0.
  Label label() const;
  LabelSource source() const { return source_; }

  friend bool operator==(const LoggedTriple&, const LoggedTriple&) = default;

 private:
  LoggedTriple(std::uint64_t id, FeatureVector x, bool z, Label y, LabelSource source)
      : id_(id), x_(std::move(x)), z_(z), y_(y), source_(source) {}

  std::uint64_t id_ = 0;
  FeatureVector x_;
  bool z_ = false;
  Label y_ = Label::kZero;
  LabelSource source_ = LabelSource::kQueried;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// `label (index:value)*` per line. Labels in {0,1} or {-1,+1}; -1 maps to 0.
// Example ids are assigned by position (first example has id 0).
std::vector<Example> parse_sparse_dataset(std::string_view text);
std::vector<Example> read_sparse_dataset(const std::string& path);
void write_sparse_dataset(std::ostream& out, std::span<const Example> data);
std::string to_sparse_text(std::span<const Example> data);

struct SyntheticSpec {
  std::size_t count = 6000;
  std::size_t dim = 30;
  double flip_prob = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

// The noiseless separator used by generate_synthetic for this spec; index 0
// is the bias.
std::vector<double> synthetic_separator(const SyntheticSpec& spec);
// Uniform points on [-1,1]^dim labeled by a random linear separator, then
// flipped independently with probability flip_prob.
std::vector<Example> generate_synthetic(const SyntheticSpec& spec);

struct SplitFractions {
  double test = 0.2;
  double logged = 0.5;
};

struct DataSplit {
  std::vector<Example> logged;
  std::vector<Example> online;
  std::vector<Example> test;
  std::uint64_t seed = 0;
};

// Shuffle by seed, then test = floor(N * test_frac),
// logged = floor((N - test) * logged_frac), online = remainder.
DataSplit split_dataset(std::span<const Example> data, SplitFractions fractions,
                        std::uint64_t seed);

// Q(x) for an instance identified by (id, x).
using Propensity = std::function<double(std::uint64_t id, const FeatureVector& x)>;

// z ~ Bernoulli(Q0(x)) independently per example; labels kept only for z = 1.
// Throws std::domain_error when the policy leaves [0, 1].
std::vector<LoggedTriple> apply_logging(std::span<const Example> examples,
                                        const Propensity& policy, std::uint64_t seed);

}  // namespace idbal
