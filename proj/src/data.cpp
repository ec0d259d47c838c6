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

#include "idbal/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "idbal/rng.hpp"

namespace idbal {

FeatureVector FeatureVector::from_entries(std::vector<Feature> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Feature& a, const Feature& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].index == 0) {
      throw std::invalid_argument("feature index must be positive");
    }
    if (i > 0 && entries[i].index == entries[i - 1].index) {
      throw std::invalid_argument("duplicate feature index " +
                                  std::to_string(entries[i].index));
    }
  }
  FeatureVector out;
  if (!entries.empty()) {
    out.entries_ = std::make_shared<const std::vector<Feature>>(std::move(entries));
  }
  return out;
}

FeatureVector FeatureVector::from_dense(std::span<const double> values) {
  std::vector<Feature> entries;
  entries.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) {
      entries.push_back({static_cast<std::uint32_t>(i + 1), values[i]});
    }
  }
  return from_entries(std::move(entries));
}

std::uint32_t FeatureVector::max_index() const {
  return empty() ? 0 : entries_->back().index;
}

double FeatureVector::squared_norm() const {
  double s = 0.0;
  for (const auto& f : entries()) s += f.value * f.value;
  return s;
}

double FeatureVector::at(std::uint32_t index) const {
  const auto e = entries();
  auto it = std::lower_bound(e.begin(), e.end(), index,
                             [](const Feature& f, std::uint32_t i) { return f.index < i; });
  return (it != e.end() && it->index == index) ? it->value : 0.0;
}

// Set semantics: explicit zeros are equivalent to absent entries.
bool operator==(const FeatureVector& a, const FeatureVector& b) {
  if (a.entries_ == b.entries_) return true;
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    if (i < ea.size() && ea[i].value == 0.0) { ++i; continue; }
    if (j < eb.size() && eb[j].value == 0.0) { ++j; continue; }
    if (i == ea.size() || j == eb.size()) return false;
    if (ea[i] != eb[j]) return false;
    ++i;
    ++j;
  }
  return true;
}

LoggedTriple LoggedTriple::observed(std::uint64_t id, FeatureVector x, Label y,
                                    LabelSource source) {
  return LoggedTriple(id, std::move(x), true, y, source);
}

LoggedTriple LoggedTriple::hidden(std::uint64_t id, FeatureVector x) {
  return LoggedTriple(id, std::move(x), false, Label::kZero, LabelSource::kQueried);
}

Label LoggedTriple::label() const {
  if (!z_) throw std::logic_error("label requested for a record with z = 0");
  return y_;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

Label parse_label(std::string_view token, std::size_t line) {
  double v;
  if (!parse_double(token, v)) {
    throw ParseError(line, "non-numeric label '" + std::string(token) + "'");
  }
  if (v == 1.0) return Label::kOne;
  if (v == 0.0 || v == -1.0) return Label::kZero;
  throw ParseError(line, "label must be in {0,1} or {-1,+1}, got '" + std::string(token) + "'");
}

Feature parse_feature(std::string_view token, std::size_t line) {
  const auto colon = token.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError(line, "expected index:value, got '" + std::string(token) + "'");
  }
  const auto index_part = token.substr(0, colon);
  const auto value_part = token.substr(colon + 1);
  std::int64_t index = 0;
  auto [ptr, ec] = std::from_chars(index_part.data(), index_part.data() + index_part.size(), index);
  if (ec != std::errc() || ptr != index_part.data() + index_part.size()) {
    throw ParseError(line, "non-numeric feature index '" + std::string(index_part) + "'");
  }
  if (index <= 0 || index > static_cast<std::int64_t>(UINT32_MAX)) {
    throw ParseError(line, "feature index must be a positive 32-bit integer, got " +
                               std::string(index_part));
  }
  double value;
  if (!parse_double(value_part, value)) {
    throw ParseError(line, "non-numeric feature value '" + std::string(value_part) + "'");
  }
  return {static_cast<std::uint32_t>(index), value};
}

}  // namespace

std::vector<Example> parse_sparse_dataset(std::string_view text) {
  std::vector<Example> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    Example ex;
    ex.id = out.size();
    ex.y = parse_label(tokens[0], line_no);
    std::vector<Feature> features;
    features.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      features.push_back(parse_feature(tokens[t], line_no));
    }
    try {
      ex.x = FeatureVector::from_entries(std::move(features));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> read_sparse_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sparse_dataset(buf.str());
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::string to_sparse_text(std::span<const Example> data) {
  std::string out;
  for (const auto& ex : data) {
    out += ex.y == Label::kOne ? '1' : '0';
    for (const auto& f : ex.x.entries()) {
      out += ' ';
      out += std::to_string(f.index);
      out += ':';
      append_number(out, f.value);
    }
    out += '\n';
  }
  return out;
}

void write_sparse_dataset(std::ostream& out, std::span<const Example> data) {
  out << to_sparse_text(data);
}

void SyntheticSpec::validate() const {
  if (count == 0) throw std::invalid_argument("synthetic count must be positive");
  if (dim == 0) throw std::invalid_argument("synthetic dim must be positive");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw std::invalid_argument("synthetic flip_prob must lie in [0,1]");
  }
}

std::vector<double> synthetic_separator(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, Stream::kSeparator));
  std::vector<double> w(spec.dim + 1, 0.0);
  // Homogeneous separator: w[0] (bias) stays 0 so classes are balanced.
  for (std::size_t j = 1; j <= spec.dim; ++j) w[j] = rng.normal();
  return w;
}

std::vector<Example> generate_synthetic(const SyntheticSpec& spec) {
  const auto w = synthetic_separator(spec);
  Rng features(derive_seed(spec.seed, Stream::kFeatures));
  Rng flips(derive_seed(spec.seed, Stream::kLabelFlip));
  std::vector<Example> out;
  out.reserve(spec.count);
  std::vector<double> dense(spec.dim);
  for (std::size_t i = 0; i < spec.count; ++i) {
    double score = w[0];
    for (std::size_t j = 0; j < spec.dim; ++j) {
      dense[j] = features.uniform(-1.0, 1.0);
      score += w[j + 1] * dense[j];
    }
    Label y = label_of(score >= 0.0);
    if (flips.bernoulli(spec.flip_prob)) y = flip(y);
    out.push_back({i, FeatureVector::from_dense(dense), y});
  }
  return out;
}

DataSplit split_dataset(std::span<const Example> data, SplitFractions fractions,
                        std::uint64_t seed) {
  if (!(fractions.test > 0.0 && fractions.test < 1.0) ||
      !(fractions.logged > 0.0 && fractions.logged < 1.0)) {
    throw std::invalid_argument("split fractions must lie in (0,1)");
  }
  if (data.size() < 3) throw std::invalid_argument("dataset needs at least 3 examples to split");

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, Stream::kSplit));
  rng.shuffle(order);

  const auto n = data.size();
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions.test));
  const auto n_logged =
      static_cast<std::size_t>(std::floor(static_cast<double>(n - n_test) * fractions.logged));

  DataSplit split;
  split.seed = seed;
  split.test.reserve(n_test);
  split.logged.reserve(n_logged);
  split.online.reserve(n - n_test - n_logged);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ex = data[order[i]];
    if (i < n_test) {
      split.test.push_back(ex);
    } else if (i < n_test + n_logged) {
      split.logged.push_back(ex);
    } else {
      split.online.push_back(ex);
    }
  }
  return split;
}

std::vector<LoggedTriple> apply_logging(std::span<const Example> examples,
                                        const Propensity& policy, std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::kLogging));
  std::vector<LoggedTriple> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    const double q = policy(ex.id, ex.x);
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::domain_error("logging policy returned " + std::to_string(q) +
                              " outside [0,1] for instance " + std::to_string(ex.id));
    }
    // Draw unconditionally so the stream position does not depend on q.
    const bool z = rng.uniform() < q;
    out.push_back(z ? LoggedTriple::observed(ex.id, ex.x, ex.y) : LoggedTriple::hidden(ex.id, ex.x));
  }
  return out;
}

}  // namespace idbal
