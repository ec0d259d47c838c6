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

#include "idbal/policies.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "idbal/rng.hpp"

namespace idbal {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string policy_name(const LoggingPolicy& p) {
  return std::visit(overloaded{
                        [](const policy::Identical&) { return std::string("identical"); },
                        [](const policy::UniformGroups&) { return std::string("uniform"); },
                        [](const policy::Uncertainty&) { return std::string("uncertainty"); },
                        [](const policy::Certainty&) { return std::string("certainty"); },
                        [](const policy::Table&) { return std::string("table"); },
                    },
                    p);
}

int uniform_group(const FeatureVector& x, std::uint64_t group_seed) {
  std::uint64_t h = mix64(group_seed ^ 0x67726f7570ULL);
  for (const auto& f : x.entries()) {
    if (f.value == 0.0) continue;
    h = mix64(h ^ f.index);
    h = mix64(h ^ std::bit_cast<std::uint64_t>(f.value + 0.0));  // -0.0 hashes as 0.0
  }
  return static_cast<int>(h % 3);
}

double boundary_distance(const LinearModel& coarse, const FeatureVector& x) {
  double norm2 = 0.0;
  for (std::size_t j = 1; j < coarse.weights.size(); ++j) norm2 += coarse.weights[j] * coarse.weights[j];
  if (norm2 == 0.0) return 0.0;
  return std::abs(coarse.score(x)) / std::sqrt(norm2);
}

double policy_prob(const LoggingPolicy& p, std::uint64_t id, const FeatureVector& x) {
  return std::visit(
      overloaded{
          [](const policy::Identical& q) { return clamp01(q.p); },
          [&](const policy::UniformGroups& q) { return clamp01(q.probs[uniform_group(x, q.group_seed)]); },
          [&](const policy::Uncertainty& q) {
            const double r = boundary_distance(q.coarse, x);
            return clamp01(std::exp(-q.c * r * r));
          },
          [&](const policy::Certainty& q) {
            const double r = boundary_distance(q.coarse, x);
            return clamp01(q.c * r * r);
          },
          [&](const policy::Table& q) {
            auto it = q.probs.find(id);
            if (it == q.probs.end()) {
              throw std::out_of_range("policy table has no entry for instance " + std::to_string(id));
            }
            return clamp01(it->second);
          },
      },
      p);
}

LinearModel fit_coarse_model(std::span<const Example> data, double fraction, std::uint64_t seed,
                             const CoarseFitOptions& options) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("coarse model fraction must lie in (0,1]");
  }
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size())));
  if (count == 0) throw std::invalid_argument("coarse model subsample is empty");

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, Stream::kCoarseModel));
  rng.shuffle(order);

  std::uint32_t dim = 0;
  for (const auto& ex : data) dim = std::max(dim, ex.x.max_index());
  LinearModel model(dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& ex = data[order[i]];
    apply_update(options.rule, model, ex.x, ex.y, 1.0, options.eta);
  }
  return model;
}

namespace {

template <class P>
double mean_prob(const P& pol, std::span<const Example> data) {
  double s = 0.0;
  const LoggingPolicy wrapped = pol;
  for (const auto& ex : data) s += policy_prob(wrapped, ex.id, ex.x);
  return s / static_cast<double>(data.size());
}

// Finds c with mean(c) = target for a mean monotone in c.
template <class P>
P bisect_c(P pol, std::span<const Example> data, double target, bool increasing) {
  auto mean_at = [&](double c) {
    pol.c = c;
    return mean_prob(pol, data);
  };
  auto below_target = [&](double c) {
    const double m = mean_at(c);
    return increasing ? m < target : m > target;
  };
  double lo = 0.0;
  double hi = 1.0;
  int grow = 0;
  while (below_target(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200) {
      throw std::runtime_error("cannot calibrate " + policy_name(LoggingPolicy(pol)) +
                               " policy to mean reveal probability " + std::to_string(target));
    }
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (below_target(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  pol.c = 0.5 * (lo + hi);
  return pol;
}

}  // namespace

LoggingPolicy calibrate_policy(LoggingPolicy p, std::span<const Example> data, double target) {
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("calibration target must lie in (0,1)");
  if (data.empty()) throw std::invalid_argument("cannot calibrate a policy on empty data");
  if (auto* u = std::get_if<policy::Uncertainty>(&p)) return bisect_c(*u, data, target, false);
  if (auto* c = std::get_if<policy::Certainty>(&p)) return bisect_c(*c, data, target, true);
  return p;
}

policy::Table parse_policy_table(std::string_view text) {
  policy::Table table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError(line_no, "expected id,probability");
    const auto id_part = line.substr(0, comma);
    const auto p_part = line.substr(comma + 1);
    std::uint64_t id;
    double prob;
    auto r1 = std::from_chars(id_part.data(), id_part.data() + id_part.size(), id);
    auto r2 = std::from_chars(p_part.data(), p_part.data() + p_part.size(), prob);
    const bool ok = r1.ec == std::errc() && r1.ptr == id_part.data() + id_part.size() &&
                    r2.ec == std::errc() && r2.ptr == p_part.data() + p_part.size();
    if (!ok) {
      if (line_no == 1 && table.probs.empty()) continue;  // header
      throw ParseError(line_no, "malformed policy table row '" + std::string(line) + "'");
    }
    if (!(prob >= 0.0 && prob <= 1.0)) throw ParseError(line_no, "probability outside [0,1]");
    table.probs[id] = prob;
  }
  return table;
}

policy::Table read_policy_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open policy table '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_policy_table(buf.str());
}

}  // namespace idbal
