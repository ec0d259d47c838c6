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

#include "idbal/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "idbal/policies.hpp"
#include "idbal/rng.hpp"

namespace idbal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Label member_label(const DiscreteInstance& inst, std::size_t member, std::size_t i) {
  return inst.cls.predict(member, inst.pool[i].id, inst.pool[i].x);
}

std::vector<double> cumulative_mass(const DiscreteInstance& inst) {
  std::vector<double> cum(inst.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    acc += inst.mass[i];
    cum[i] = acc;
  }
  // The last positive-mass point absorbs rounding.
  for (std::size_t i = inst.size(); i-- > 0;) {
    if (inst.mass[i] > 0.0) {
      for (std::size_t j = i; j < inst.size(); ++j) cum[j] = 1.0;
      break;
    }
  }
  return cum;
}

std::size_t draw_index(const std::vector<double>& cum, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return static_cast<std::size_t>(it - cum.begin());
}

double sample_variance(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct TrialValues {
  std::vector<double> is;
  std::vector<double> mis;
};

// Per-trial IS and MIS estimates of l(member) on shared draws. Each trial
// writes only its own slot.
TrialValues estimator_trials(const DiscreteInstance& inst, std::size_t member,
                             const SamplingSetup& setup, std::size_t trials, std::uint64_t seed,
                             Execution exec) {
  inst.validate();
  TrialValues out{std::vector<double>(trials), std::vector<double>(trials)};
  const Propensity q0 = inst.q0_propensity();
  const Propensity q1 = setup.q1_propensity();
  const auto h = inst.cls.classifier(member);
  const auto n_trials = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static) if (exec == Execution::kParallel)
  for (std::int64_t t = 0; t < n_trials; ++t) {
    Rng rng(derive_seed(seed, Stream::kTrial, static_cast<std::uint64_t>(t)));
    const Draw d = draw_sample(inst, setup, rng);
    out.is[t] = estimate_error(h, make_is_sample(d.logged, d.online, q0, q1));
    out.mis[t] = estimate_error(h, make_mis_sample(d.logged, d.online, q0, q1));
  }
  return out;
}

}  // namespace

void DiscreteInstance::validate() const {
  const std::size_t p = pool.size();
  if (p == 0) throw std::invalid_argument("discrete instance has an empty pool");
  if (mass.size() != p || p1.size() != p || q0.size() != p) {
    throw std::invalid_argument("discrete instance fields disagree in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (pool[i].id != i) throw std::invalid_argument("pool ids must be 0..P-1 in order");
    if (!(mass[i] >= 0.0)) throw std::invalid_argument("negative mass");
    if (!(p1[i] >= 0.0 && p1[i] <= 1.0)) throw std::invalid_argument("label probability outside [0,1]");
    if (!(q0[i] >= 0.0 && q0[i] <= 1.0)) throw std::invalid_argument("propensity outside [0,1]");
    total += mass[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("masses do not sum to 1");
  if (cls.size() == 0) throw std::invalid_argument("discrete instance has an empty class");
}

Propensity DiscreteInstance::q0_propensity() const {
  return [this](std::uint64_t id, const FeatureVector&) { return q0.at(id); };
}

policy::Table DiscreteInstance::q0_policy() const {
  policy::Table t;
  for (std::size_t i = 0; i < pool.size(); ++i) t.probs[pool[i].id] = q0[i];
  return t;
}

Propensity SamplingSetup::q1_propensity() const {
  if (q1.empty()) return [](std::uint64_t, const FeatureVector&) { return 1.0; };
  return [this](std::uint64_t id, const FeatureVector&) { return q1.at(id); };
}

double true_error(const DiscreteInstance& inst, std::size_t member) {
  double err = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const bool one = member_label(inst, member, i) == Label::kOne;
    err += inst.mass[i] * (one ? 1.0 - inst.p1[i] : inst.p1[i]);
  }
  return err;
}

double disagreement_mass(const DiscreteInstance& inst, std::size_t h1, std::size_t h2) {
  double rho = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (member_label(inst, h1, i) != member_label(inst, h2, i)) rho += inst.mass[i];
  }
  return rho;
}

BestMember best_member(const DiscreteInstance& inst) {
  BestMember best{0, kInf};
  for (std::size_t h = 0; h < inst.cls.size(); ++h) {
    const double e = true_error(inst, h);
    if (e < best.error) best = {h, e};
  }
  return best;
}

CandidateSetExact dis_ball(const DiscreteInstance& inst, std::size_t center, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("ball radius must be nonnegative");
  CandidateSetExact ball;
  for (std::size_t h = 0; h < inst.cls.size(); ++h) {
    if (disagreement_mass(inst, center, h) <= r) ball.active.push_back(h);
  }
  return ball;
}

std::vector<std::size_t> dis_region(const DiscreteInstance& inst, const CandidateSetExact& v) {
  std::vector<std::size_t> region;
  if (v.active.empty()) return region;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (!(inst.mass[i] > 0.0)) continue;
    const Label first = member_label(inst, v.active.front(), i);
    for (std::size_t j = 1; j < v.active.size(); ++j) {
      if (member_label(inst, v.active[j], i) != first) {
        region.push_back(i);
        break;
      }
    }
  }
  return region;
}

double region_mass(const DiscreteInstance& inst, std::span<const std::size_t> region) {
  double total = 0.0;
  for (std::size_t i : region) total += inst.mass.at(i);
  return total;
}

std::vector<std::size_t> s_region(const DiscreteInstance& inst, std::span<const std::size_t> region,
                                  double alpha, SRegionVariant variant) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be at least 1");
  std::vector<std::size_t> in;
  for (std::size_t i : region) {
    if (inst.mass.at(i) > 0.0) in.push_back(i);
  }
  std::sort(in.begin(), in.end());
  in.erase(std::unique(in.begin(), in.end()), in.end());
  if (in.empty()) return in;
  const double slack = 1.0 / alpha;

  if (variant == SRegionVariant::kRestricted) {
    double inf = kInf;
    for (std::size_t i : in) inf = std::min(inf, inst.q0[i]);
    std::vector<std::size_t> out;
    for (std::size_t i : in) {
      if (inst.q0[i] <= inf + slack) out.push_back(i);
    }
    return out;
  }

  if (inst.size() > kLiteralPoolLimit) {
    throw std::invalid_argument("literal S(A, alpha) enumerates subsets and needs a pool of at most " +
                                std::to_string(kLiteralPoolLimit) +
                                " instances; use the restricted variant");
  }
  // Every nonempty subset A' of `in`, as a bitmask over positions in `in`.
  // inf over A' is built from A' without its lowest bit; the points of A'
  // under the threshold are A' masked by the prefix (in propensity order)
  // of points with q0 <= inf + slack.
  const std::size_t r = in.size();
  std::vector<std::size_t> by_q(r);
  std::iota(by_q.begin(), by_q.end(), std::size_t{0});
  std::stable_sort(by_q.begin(), by_q.end(),
                   [&](std::size_t a, std::size_t b) { return inst.q0[in[a]] < inst.q0[in[b]]; });
  std::vector<double> sorted_q(r);
  std::vector<std::uint32_t> prefix_mask(r + 1, 0);
  for (std::size_t k = 0; k < r; ++k) {
    sorted_q[k] = inst.q0[in[by_q[k]]];
    prefix_mask[k + 1] = prefix_mask[k] | (std::uint32_t{1} << by_q[k]);
  }
  const std::uint32_t full = (r == 32) ? ~std::uint32_t{0} : ((std::uint32_t{1} << r) - 1);
  std::vector<double> inf_of(std::size_t{1} << r, kInf);
  std::uint32_t union_mask = 0;
  for (std::uint32_t mask = 1; mask <= full && mask != 0; ++mask) {
    const int low = std::countr_zero(mask);
    inf_of[mask] = std::min(inf_of[mask & (mask - 1)], inst.q0[in[low]]);
    const double thr = inf_of[mask] + slack;
    const auto k = static_cast<std::size_t>(std::upper_bound(sorted_q.begin(), sorted_q.end(), thr) -
                                            sorted_q.begin());
    union_mask |= mask & prefix_mask[k];
    if (mask == full) break;
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < r; ++k) {
    if (union_mask & (std::uint32_t{1} << k)) out.push_back(in[k]);
  }
  return out;
}

namespace {

// Radii r > r0 at which the ratio can attain its supremum: r0 standing in
// for r0+, then each distinct rho(h*, h) above r0.
std::vector<double> candidate_radii(const DiscreteInstance& inst, std::size_t hstar, double r0) {
  std::vector<double> out{r0};
  std::vector<double> rhos;
  for (std::size_t h = 0; h < inst.cls.size(); ++h) {
    const double rho = disagreement_mass(inst, hstar, h);
    if (rho > r0) rhos.push_back(rho);
  }
  std::sort(rhos.begin(), rhos.end());
  rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
  out.insert(out.end(), rhos.begin(), rhos.end());
  return out;
}

double ratio(double mass, double r) {
  if (mass == 0.0) return 0.0;
  if (r == 0.0) return kInf;
  return mass / r;
}

void check_r0(const DiscreteInstance& inst, double r0) {
  const double nu = best_member(inst).error;
  if (!(r0 >= 0.0) || r0 < 2.0 * nu - 1e-12) {
    throw std::invalid_argument("r0 must be at least twice the optimal error");
  }
}

}  // namespace

double adjusted_dis_coefficient(const DiscreteInstance& inst, double r0, double alpha,
                                SRegionVariant variant) {
  check_r0(inst, r0);
  const std::size_t hstar = best_member(inst).index;
  double sup = 0.0;
  for (double r : candidate_radii(inst, hstar, r0)) {
    // The ball at r0+ holds exactly the members within r0.
    const auto region = dis_region(inst, dis_ball(inst, hstar, r));
    const auto s = s_region(inst, region, alpha, variant);
    sup = std::max(sup, ratio(region_mass(inst, s), r));
  }
  return sup;
}

double standard_dis_coefficient(const DiscreteInstance& inst, double r0) {
  check_r0(inst, r0);
  const std::size_t hstar = best_member(inst).index;
  const std::size_t p = inst.size();
  const std::size_t nh = inst.cls.size();

  // Pointwise disagreement with h*, and each member's distance to it.
  std::vector<std::vector<bool>> differs(nh, std::vector<bool>(p, false));
  std::vector<double> dist(nh, 0.0);
  for (std::size_t h = 0; h < nh; ++h) {
    for (std::size_t i = 0; i < p; ++i) {
      differs[h][i] = inst.cls.predict(h, inst.pool[i].id, inst.pool[i].x) !=
                      inst.cls.predict(hstar, inst.pool[i].id, inst.pool[i].x);
      if (differs[h][i]) dist[h] += inst.mass[i];
    }
  }
  std::vector<double> radii{r0};
  for (double d : dist) {
    if (d > r0 && std::find(radii.begin(), radii.end(), d) == radii.end()) radii.push_back(d);
  }
  double best = 0.0;
  for (double r : radii) {
    std::vector<bool> covered(p, false);
    for (std::size_t h = 0; h < nh; ++h) {
      if (dist[h] > r) continue;
      for (std::size_t i = 0; i < p; ++i) covered[i] = covered[i] || differs[h][i];
    }
    double m = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (covered[i] && inst.mass[i] > 0.0) m += inst.mass[i];
    }
    double v = 0.0;
    if (m > 0.0) v = r > 0.0 ? m / r : kInf;
    if (v > best) best = v;
  }
  return best;
}

Draw draw_sample(const DiscreteInstance& inst, const SamplingSetup& setup, Rng& rng) {
  const auto cum = cumulative_mass(inst);
  Draw d;
  d.logged.reserve(setup.m);
  d.online.reserve(setup.n);
  d.online_examples.reserve(setup.n);
  for (std::size_t j = 0; j < setup.m; ++j) {
    const std::size_t i = draw_index(cum, rng);
    const Label y = label_of(rng.bernoulli(inst.p1[i]));
    const bool z = rng.bernoulli(inst.q0[i]);
    d.logged.push_back(z ? LoggedTriple::observed(inst.pool[i].id, inst.pool[i].x, y, LabelSource::kQueried)
                         : LoggedTriple::hidden(inst.pool[i].id, inst.pool[i].x));
  }
  for (std::size_t j = 0; j < setup.n; ++j) {
    const std::size_t i = draw_index(cum, rng);
    const Label y = label_of(rng.bernoulli(inst.p1[i]));
    const double q1 = setup.q1.empty() ? 1.0 : setup.q1.at(i);
    const bool z = rng.bernoulli(q1);
    d.online.push_back(z ? LoggedTriple::observed(inst.pool[i].id, inst.pool[i].x, y, LabelSource::kQueried)
                         : LoggedTriple::hidden(inst.pool[i].id, inst.pool[i].x));
    d.online_examples.push_back(Example{inst.pool[i].id, inst.pool[i].x, y});
  }
  return d;
}

McStats mc_unbiasedness(const DiscreteInstance& inst, std::size_t member, const SamplingSetup& setup,
                        std::size_t trials, std::uint64_t seed, Weighting weighting, Execution exec) {
  if (trials < 2) throw std::invalid_argument("need at least two Monte-Carlo trials");
  const auto tv = estimator_trials(inst, member, setup, trials, seed, exec);
  const auto& v = weighting == Weighting::kMultipleImportance ? tv.mis : tv.is;
  McStats s;
  s.trials = trials;
  s.mean = mean_of(v);
  s.variance = sample_variance(v, s.mean);
  s.stderr_ = std::sqrt(s.variance / static_cast<double>(trials));
  s.true_value = true_error(inst, member);
  return s;
}

VarianceComparison variance_compare(const DiscreteInstance& inst, std::size_t member,
                                    const SamplingSetup& setup, std::size_t trials, std::uint64_t seed,
                                    Execution exec) {
  if (trials < 2) throw std::invalid_argument("need at least two Monte-Carlo trials");
  const auto tv = estimator_trials(inst, member, setup, trials, seed, exec);
  VarianceComparison c;
  c.mean_is = mean_of(tv.is);
  c.mean_mis = mean_of(tv.mis);
  c.var_is = sample_variance(tv.is, c.mean_is);
  c.var_mis = sample_variance(tv.mis, c.mean_mis);
  return c;
}

ConcentrationTable concentration_rate(const DiscreteInstance& inst, std::size_t h1, std::size_t h2,
                                      std::span<const std::size_t> effective_sizes,
                                      const SamplingSetup& setup, std::size_t trials,
                                      std::uint64_t seed, Execution exec) {
  inst.validate();
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  for (std::size_t k = 0; k < effective_sizes.size(); ++k) {
    if (effective_sizes[k] < 2) throw std::invalid_argument("effective sizes must be at least 2");
    if (k > 0 && effective_sizes[k] <= effective_sizes[k - 1]) {
      throw std::invalid_argument("effective sizes must be increasing");
    }
  }
  const double truth = true_error(inst, h1) - true_error(inst, h2);
  const Propensity q0 = inst.q0_propensity();
  const Propensity q1 = setup.q1_propensity();
  const auto c1 = inst.cls.classifier(h1);
  const auto c2 = inst.cls.classifier(h2);

  ConcentrationTable table;
  for (std::size_t k = 0; k < effective_sizes.size(); ++k) {
    const std::size_t big_n = effective_sizes[k];
    SamplingSetup s = setup;
    s.m = big_n / 2;
    s.n = big_n - big_n / 2;
    std::vector<double> dev(trials);
    const auto n_trials = static_cast<std::int64_t>(trials);
    const std::uint64_t size_seed = derive_seed(seed, big_n);
#pragma omp parallel for schedule(static) if (exec == Execution::kParallel)
    for (std::int64_t t = 0; t < n_trials; ++t) {
      Rng rng(derive_seed(size_seed, Stream::kTrial, static_cast<std::uint64_t>(t)));
      const Draw d = draw_sample(inst, s, rng);
      const auto sample = make_mis_sample(d.logged, d.online, q0, q1);
      dev[t] = std::abs(estimate_error(c1, sample) - estimate_error(c2, sample) - truth);
    }
    std::sort(dev.begin(), dev.end());
    // Nearest-rank 0.9-quantile.
    const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(trials)));
    table.rows.push_back({big_n, dev[std::max<std::size_t>(rank, 1) - 1]});
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t used = 0;
  bool degenerate = table.rows.size() < 2;
  for (const auto& row : table.rows) {
    if (!(row.quantile > 0.0)) {
      degenerate = true;
      break;
    }
    const double x = std::log(static_cast<double>(row.effective_size));
    const double y = std::log(row.quantile);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (degenerate) {
    table.slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double nn = static_cast<double>(used);
    table.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  }
  return table;
}

TheoryQuantities theory_sequences(const DiscreteInstance& inst, const PartitionPlan& plan,
                                  double delta, double gamma2) {
  inst.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(gamma2 >= 0.0)) throw std::invalid_argument("gamma2 must be nonnegative");
  TheoryQuantities tq;
  tq.gamma2 = gamma2;
  const auto best = best_member(inst);
  tq.nu = best.error;
  tq.h_star_index = best.index;
  const double hsize = static_cast<double>(inst.cls.size());

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (inst.mass[i] > 0.0) support.push_back(i);
  }
  tq.dis_k.push_back(support);

  for (std::size_t k = 1; k <= plan.K; ++k) {
    const double delta_k = delta / (static_cast<double>(k + 1) * static_cast<double>(k + 2));
    const double num = std::log(2.0 * hsize / delta_k);
    const double m_prev = static_cast<double>(plan.m_at(k - 1));
    const double n_prev = static_cast<double>(plan.n_at(k - 1));
    double zeta_k = 0.0;
    for (std::size_t i : tq.dis_k[k - 1]) {
      const double denom = m_prev * inst.q0[i] + n_prev;
      zeta_k = std::max(zeta_k, denom > 0.0 ? num / denom : kInf);
    }
    double eps = 0.0;
    if (gamma2 > 0.0 && zeta_k > 0.0) eps = gamma2 * zeta_k + gamma2 * std::sqrt(zeta_k * tq.nu);
    tq.zeta_k.push_back(zeta_k);
    tq.epsilon_k.push_back(eps);
    const double radius = 2.0 * tq.nu + eps;
    tq.dis_k.push_back(std::isfinite(radius) ? dis_region(inst, dis_ball(inst, tq.h_star_index, radius))
                                             : dis_region(inst, CandidateSetExact::all(inst.cls)));
  }

  if (plan.K >= 1) {
    for (std::size_t i : tq.dis_k[1]) {
      tq.zeta = std::max(tq.zeta, 1.0 / (plan.alpha * inst.q0[i] + 1.0));
    }
  }
  return tq;
}

DiscreteInstance random_fixture(std::uint64_t seed, const FixtureOptions& options) {
  if (options.pool_size == 0 || options.pool_size > 63) {
    throw std::invalid_argument("fixture pool size must lie in 1..63");
  }
  if (options.class_size == 0) throw std::invalid_argument("fixture class size must be positive");
  if (!(options.min_q0 > 0.0 && options.min_q0 <= 1.0)) {
    throw std::invalid_argument("fixture min_q0 must lie in (0,1]");
  }
  Rng rng(derive_seed(seed, Stream::kFixture));
  const std::size_t p = options.pool_size;
  DiscreteInstance inst{{}, {}, {}, FiniteClass({LabelTable{}}), {}};
  for (std::size_t i = 0; i < p; ++i) {
    const double v = static_cast<double>(i + 1);
    inst.pool.push_back(Instance{i, FeatureVector::from_dense(std::span<const double>(&v, 1))});
  }

  // Dirichlet(1) masses.
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double e = -std::log(1.0 - rng.uniform());
    inst.mass.push_back(e);
    total += e;
  }
  for (double& m : inst.mass) m /= total;
  double renorm = 0.0;
  for (std::size_t i = 0; i + 1 < p; ++i) renorm += inst.mass[i];
  inst.mass[p - 1] = std::max(0.0, 1.0 - renorm);

  for (std::size_t i = 0; i < p; ++i) {
    if (options.label_noise > 0.0) {
      inst.p1.push_back(rng.bernoulli(0.5) ? 1.0 - options.label_noise : options.label_noise);
    } else {
      inst.p1.push_back(rng.uniform());
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    inst.q0.push_back(options.min_q0 + (1.0 - options.min_q0) * rng.uniform());
  }
  if (options.force_small_propensity) {
    inst.q0[rng.below(p)] = std::min(options.min_q0, 0.05);
  }

  // Bayes labels, then distinct perturbed copies.
  std::vector<std::uint64_t> rows;
  std::uint64_t bayes = 0;
  for (std::size_t i = 0; i < p; ++i) {
    if (inst.p1[i] > 0.5) bayes |= std::uint64_t{1} << i;
  }
  rows.push_back(bayes);
  const std::uint64_t limit = p == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << p);
  const std::size_t target = static_cast<std::size_t>(std::min<std::uint64_t>(options.class_size, limit));
  std::size_t attempts = 0;
  while (rows.size() < target && attempts < 100000) {
    ++attempts;
    std::uint64_t flips = 0;
    for (std::size_t i = 0; i < p; ++i) {
      if (rng.bernoulli(0.3)) flips |= std::uint64_t{1} << i;
    }
    if (flips == 0) flips = std::uint64_t{1} << rng.below(p);
    const std::uint64_t row = bayes ^ flips;
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
  }
  rng.shuffle(rows);

  std::vector<std::vector<Label>> label_rows;
  for (std::uint64_t row : rows) {
    std::vector<Label> labels(p);
    for (std::size_t i = 0; i < p; ++i) labels[i] = label_of((row >> i) & 1U);
    label_rows.push_back(std::move(labels));
  }
  inst.cls = FiniteClass::from_label_rows(label_rows);
  inst.validate();
  return inst;
}

namespace {

CheckResult make_check(std::string name, double statistic, double threshold, bool passed,
                       std::string detail = {}) {
  return CheckResult{std::move(name), statistic, threshold, passed, std::move(detail)};
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  const std::uint64_t root = options.seed;

  // Estimator checks on random mixed-propensity fixtures.
  {
    std::size_t mis_ok = 0;
    std::size_t is_ok = 0;
    std::size_t var_ok = 0;
    double worst_ratio = 0.0;
    SamplingSetup setup{30, 20, {}};
    for (std::size_t f = 0; f < options.fixtures; ++f) {
      const auto inst = random_fixture(derive_seed(root, Stream::kFixture, f));
      const std::size_t h = f % inst.cls.size();
      const std::uint64_t seed = derive_seed(root, Stream::kTrial, f);
      const auto tv = variance_compare(inst, h, setup, options.trials, seed, options.exec);
      const double truth = true_error(inst, h);
      const double se_mis = std::sqrt(tv.var_mis / static_cast<double>(options.trials));
      const double se_is = std::sqrt(tv.var_is / static_cast<double>(options.trials));
      if (std::abs(tv.mean_mis - truth) <= 4.0 * se_mis) ++mis_ok;
      if (std::abs(tv.mean_is - truth) <= 4.0 * se_is) ++is_ok;
      const double r = tv.var_is > 0.0 ? tv.var_mis / tv.var_is : (tv.var_mis == 0.0 ? 0.0 : kInf);
      worst_ratio = std::max(worst_ratio, r);
      if (tv.var_mis <= 1.05 * tv.var_is) ++var_ok;
    }
    const double need = std::ceil(0.95 * static_cast<double>(options.fixtures));
    results.push_back(make_check("mis_unbiased_fixtures", static_cast<double>(mis_ok), need,
                                 static_cast<double>(mis_ok) >= need));
    results.push_back(make_check("is_unbiased_fixtures", static_cast<double>(is_ok), need,
                                 static_cast<double>(is_ok) >= need));
    results.push_back(make_check("variance_dominance_fixtures", static_cast<double>(var_ok),
                                 static_cast<double>(options.fixtures), var_ok == options.fixtures,
                                 "worst var_mis/var_is " + std::to_string(worst_ratio)));
  }

  // Concentration rate.
  {
    FixtureOptions fo;
    fo.min_q0 = 0.1;
    fo.force_small_propensity = false;
    const auto inst = random_fixture(derive_seed(root, Stream::kFixture, 1000), fo);
    const std::size_t h1 = best_member(inst).index;
    const std::size_t h2 = (h1 + 1) % inst.cls.size();
    const std::vector<std::size_t> sizes{100, 400, 1600, 6400};
    const auto table = concentration_rate(inst, h1, h2, sizes, SamplingSetup{}, 2000,
                                          derive_seed(root, Stream::kTrial, 1000), options.exec);
    results.push_back(make_check("concentration_slope", table.slope, -0.5,
                                 table.slope >= -0.65 && table.slope <= -0.35, "band [-0.65,-0.35]"));
  }

  // Exact-mode candidate safety.
  {
    std::size_t safe = 0;
    bool nested = true;
    for (std::size_t run = 0; run < options.exact_runs; ++run) {
      const std::uint64_t rs = derive_seed(root, Stream::kRepeat, run);
      FixtureOptions fo;
      fo.pool_size = 10;
      fo.class_size = 32;
      const auto inst = random_fixture(rs, fo);
      Rng rng(derive_seed(rs, Stream::kTrial));
      const Draw d = draw_sample(inst, SamplingSetup{190, 63, {}}, rng);
      const LoggingPolicy pol = inst.q0_policy();
      AlgoConfig cfg;
      cfg.mode = Mode::kExact;
      cfg.delta = 0.1;
      const auto r = run_idbal(d.logged, d.online_examples, pol, ExactSpace{&inst.cls, inst.pool}, cfg, rs);
      if (r.candidate_history.back().contains(best_member(inst).index)) ++safe;
      for (std::size_t k = 1; k < r.candidate_history.size(); ++k) {
        nested = nested && r.candidate_history[k].subset_of(r.candidate_history[k - 1]);
      }
    }
    const double need = std::ceil(0.85 * static_cast<double>(options.exact_runs));
    results.push_back(make_check("exact_hstar_retained", static_cast<double>(safe), need,
                                 static_cast<double>(safe) >= need));
    results.push_back(make_check("exact_candidates_nested", nested ? 1.0 : 0.0, 1.0, nested));
  }

  // Disagreement geometry.
  {
    bool literal_is_region = true;
    bool restricted_inside = true;
    bool theta_match = true;
    bool theta_monotone = true;
    bool erm_lower = true;
    for (std::size_t f = 0; f < 10; ++f) {
      const auto inst = random_fixture(derive_seed(root, Stream::kFixture, 2000 + f));
      const auto best = best_member(inst);
      for (std::size_t h = 0; h < inst.cls.size(); ++h) {
        erm_lower = erm_lower && best.error <= true_error(inst, h);
      }
      const auto region = dis_region(inst, CandidateSetExact::all(inst.cls));
      for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
        const auto lit = s_region(inst, region, alpha, SRegionVariant::kLiteral);
        const auto res = s_region(inst, region, alpha, SRegionVariant::kRestricted);
        literal_is_region = literal_is_region && lit == region;
        restricted_inside = restricted_inside && std::includes(lit.begin(), lit.end(), res.begin(), res.end());
      }
      const double r0 = 2.0 * best.error;
      const double adj1 = adjusted_dis_coefficient(inst, r0, 1.0);
      theta_match = theta_match && adj1 == standard_dis_coefficient(inst, r0);
      for (double alpha : {2.0, 4.0, 8.0}) {
        theta_monotone = theta_monotone && adjusted_dis_coefficient(inst, r0, alpha) <= adj1;
      }
    }
    results.push_back(make_check("literal_s_equals_region", literal_is_region, 1, literal_is_region,
                                 "literal definition collapses to the region"));
    results.push_back(make_check("restricted_s_within_literal", restricted_inside, 1, restricted_inside));
    results.push_back(make_check("theta_alpha1_matches_standard", theta_match, 1, theta_match));
    results.push_back(make_check("theta_nonincreasing_in_alpha", theta_monotone, 1, theta_monotone));
    results.push_back(make_check("optimum_lower_bounds_class", erm_lower, 1, erm_lower));
  }
  return results;
}

void write_verification_csv(std::ostream& out, std::span<const CheckResult> rows) {
  out << "check,statistic,threshold,passed,detail\n";
  for (const auto& r : rows) {
    char stat[32];
    char thr[32];
    std::snprintf(stat, sizeof stat, "%.6g", r.statistic);
    std::snprintf(thr, sizeof thr, "%.6g", r.threshold);
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    out << r.name << ',' << stat << ',' << thr << ',' << (r.passed ? "pass" : "fail") << ',' << detail << '\n';
  }
}

}  // namespace idbal
