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

#include "idbal/learners.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "idbal/rng.hpp"

namespace idbal {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPassive: return "passive";
    case Algorithm::kDbalw: return "dbalw";
    case Algorithm::kDbalwm: return "dbalwm";
    case Algorithm::kIdbal: return "idbal";
  }
  return "unknown";
}

std::string to_string(Mode m) { return m == Mode::kExact ? "exact" : "practical"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "passive") return Algorithm::kPassive;
  if (name == "dbalw") return Algorithm::kDbalw;
  if (name == "dbalwm") return Algorithm::kDbalwm;
  if (name == "idbal") return Algorithm::kIdbal;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

Mode parse_mode(std::string_view name) {
  if (name == "exact") return Mode::kExact;
  if (name == "practical") return Mode::kPractical;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

namespace {
__extension__ using Wide = unsigned __int128;
}  // namespace

std::size_t PartitionPlan::logged_offset(std::size_t k) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < k; ++i) off += m_parts[i];
  return off;
}

std::size_t PartitionPlan::online_offset(std::size_t k) const {
  std::size_t off = 0;
  for (std::size_t i = 1; i < k; ++i) off += n_parts[i - 1];
  return off;
}

PartitionPlan plan_partition(std::size_t m, std::size_t n) {
  if (m < 3) throw std::invalid_argument("partition needs at least 3 logged examples");
  if (n < 1) throw std::invalid_argument("partition needs at least 1 online example");
  PartitionPlan plan;
  plan.K = static_cast<std::size_t>(std::bit_width(n));  // ceil(log2(n + 1))
  plan.alpha = 2.0 * static_cast<double>(m) / (3.0 * static_cast<double>(n));
  std::size_t used = 0;
  for (std::size_t k = 1; k <= plan.K; ++k) {
    const std::size_t full = std::size_t{1} << (k - 1);
    const std::size_t part = k == plan.K ? n - used : full;
    plan.n_parts.push_back(part);
    used += part;
  }
  plan.m_parts.assign(plan.K + 1, 0);
  std::size_t logged_used = 0;
  for (std::size_t k = 1; k <= plan.K; ++k) {
    // floor(alpha * n_k) in exact integer arithmetic.
    plan.m_parts[k] = static_cast<std::size_t>((2 * static_cast<Wide>(m) * plan.n_parts[k - 1]) /
                                               (3 * static_cast<Wide>(n)));
    logged_used += plan.m_parts[k];
  }
  if (logged_used > m) throw std::logic_error("partition overflow");
  plan.m_parts[0] = m - logged_used;
  return plan;
}

bool debias_rule(double q0_at_x, double xi, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("debias rule needs alpha > 0");
  return q0_at_x <= xi + 1.0 / alpha;
}

void AlgoConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("algo.delta must lie in (0,1)");
  if (!(C > 0.0)) throw std::invalid_argument("algo.C must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("algo.eta must be positive");
  if (!(bound.gamma0 > 0.0) || !(bound.gamma1 > 0.0)) {
    throw std::invalid_argument("gamma constants must be positive");
  }
}

std::string AlgoConfig::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "mode=" << to_string(mode) << ";delta=" << delta << ";gamma0=" << bound.gamma0
     << ";C=" << C << ";eta=" << eta
     << ";update=" << (update == UpdateRule::kGradient ? "gradient" : "importance_aware")
     << ";infimum_sample=" << infimum_sample;
  return os.str();
}

namespace {

struct Variant {
  Weighting weighting = Weighting::kMultipleImportance;
  bool debias = false;
};

WeightedSample make_segment(std::span<const LoggedTriple> logged, std::span<const LoggedTriple> online,
                            const Propensity& q0, const Propensity& qk, Weighting w) {
  return w == Weighting::kMultipleImportance ? make_mis_sample(logged, online, q0, qk)
                                             : make_is_sample(logged, online, q0, qk);
}

// Same records; inferred labels replaced by the true ones.
WeightedSample with_true_labels(const WeightedSample& s, std::span<const Example> online_truth,
                                std::size_t online_begin) {
  WeightedSample t = s;
  for (std::size_t i = s.m; i < t.records.size(); ++i) {
    auto& rec = t.records[i].triple;
    if (rec.z() && rec.source() == LabelSource::kInferred) {
      const auto& ex = online_truth[online_begin + (i - s.m)];
      rec = LoggedTriple::observed(rec.id(), rec.x(), ex.y, LabelSource::kQueried);
    }
  }
  return t;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

BoundConfig iteration_bound(const AlgoConfig& cfg, std::size_t hypothesis_count, std::size_t k) {
  BoundConfig bc = cfg.bound;
  bc.hypothesis_count = hypothesis_count;
  const double kk = static_cast<double>(k);
  bc.delta = cfg.delta / ((kk + 1.0) * (kk + 2.0)) / 2.0;
  return bc;
}

class ExactEngine {
 public:
  ExactEngine(const ExactSpace& space, const AlgoConfig& cfg)
      : space_(space), cls_(*space.cls), cfg_(cfg), candidates_(CandidateSetExact::all(cls_)) {}

  double initial_xi(const LoggingPolicy& policy) const {
    double xi = 1.0;
    for (const auto& p : space_.pool) xi = std::min(xi, policy_prob(policy, p.id, p.x));
    return xi;
  }

  void fit_and_prune(const WeightedSample& s, std::size_t k, double xi, const PartitionPlan& plan) {
    erm_ = erm_weighted(cls_, s, candidates_);
    const double denom = static_cast<double>(plan.m_at(k)) * xi + static_cast<double>(plan.n_at(k));
    if (denom > 0.0) {
      const auto bc = iteration_bound(cfg_, cls_.size(), k);
      const double sig = sigma({static_cast<double>(plan.m_at(k)), static_cast<double>(plan.n_at(k))}, xi, bc);
      candidates_ = update_candidates(cls_, s, candidates_, disagreement_threshold(cls_, s, sig, bc));
    }
    // denom == 0: no information in the segment, the threshold is infinite and
    // V_{k+1} = V_k.
  }

  bool in_dis(std::uint64_t id, const FeatureVector& x) const {
    return exact_dis_test(cls_, candidates_, id, x);
  }
  Label infer(std::uint64_t id, const FeatureVector& x) const { return cls_.predict(erm_.index, id, x); }

  double next_xi(const LoggingPolicy& policy) const {
    double xi = 1.0;
    for (const auto& p : space_.pool) {
      if (in_dis(p.id, p.x)) xi = std::min(xi, policy_prob(policy, p.id, p.x));
    }
    return xi;
  }

  FinalClassifier finish(const WeightedSample& s) const {
    return erm_weighted(cls_, s, candidates_).index;
  }

  const CandidateSetExact& candidates() const { return candidates_; }

 private:
  const ExactSpace& space_;
  const FiniteClass& cls_;
  const AlgoConfig& cfg_;
  CandidateSetExact candidates_;
  ErmResult erm_;
};

// One OGD pass over the labeled records of a segment. The estimator's weights
// are rescaled by |S| so that the MIS and IS weightings are on the same 1/Q
// scale; the minimiser is unchanged.
void train_pass(LinearModel& model, const WeightedSample& s, const AlgoConfig& cfg) {
  const double size = static_cast<double>(s.m + s.n);
  const double scale = size * s.scale();
  for (const auto& r : s.records) {
    if (!r.triple.z()) continue;
    if (!(r.denominator > 0.0)) detail::throw_zero_denominator(r.triple.id());
    apply_update(cfg.update, model, r.triple.x(), r.triple.label(), scale / r.denominator, cfg.eta);
  }
}

class PracticalEngine {
 public:
  PracticalEngine(const LinearSpace& space, std::span<const LoggedTriple> logged, const AlgoConfig& cfg,
                  std::uint64_t seed)
      : cfg_(cfg), model_(space.dim), erm_(space.dim) {
    if (!space.unlabeled.empty()) {
      sample_ = space.unlabeled;
    } else {
      sample_.reserve(logged.size());
      for (const auto& t : logged) sample_.push_back({t.id(), t.x()});
    }
    if (cfg.infimum_sample > 0 && cfg.infimum_sample < sample_.size()) {
      Rng rng(derive_seed(seed, Stream::kLearner));
      rng.shuffle(sample_);
      sample_.resize(cfg.infimum_sample);
    }
  }

  double initial_xi(const LoggingPolicy& policy) const {
    return policy_infimum(policy, [](const Instance&) { return true; }, std::span<const Instance>(sample_));
  }

  void fit_and_prune(const WeightedSample& s, std::size_t k, double xi, const PartitionPlan& plan) {
    train_pass(model_, s, cfg_);
    erm_ = model_;
    stepsize_ = model_.last_stepsize > 0.0 ? model_.last_stepsize
                                           : ogd_stepsize(model_.trained_steps, cfg_.eta);
    const double mk = static_cast<double>(plan.m_at(k));
    const double nk = static_cast<double>(plan.n_at(k));
    ApproxDisParams p;
    p.stepsize = stepsize_;
    p.C = cfg_.C;
    p.erm_loss = estimate_error(erm_, s);
    p.effective_n = mk * xi + nk;
    p.segment_size = mk + nk;
    threshold_ = p.effective_n > 0.0 ? p.threshold() : kInf;
  }

  bool in_dis(std::uint64_t, const FeatureVector& x) const {
    return approx_dis_test(erm_, x, threshold_, stepsize_);
  }
  Label infer(std::uint64_t, const FeatureVector& x) const { return erm_.predict(x); }

  double next_xi(const LoggingPolicy& policy) const {
    return policy_infimum(policy, [this](const Instance& r) { return in_dis(r.id, r.x); },
                          std::span<const Instance>(sample_));
  }

  FinalClassifier finish(const WeightedSample& s) {
    train_pass(model_, s, cfg_);
    return model_;
  }

 private:
  const AlgoConfig& cfg_;
  std::vector<Instance> sample_;
  LinearModel model_;
  LinearModel erm_;
  double threshold_ = kInf;
  double stepsize_ = 1.0;
};

template <class Engine>
void record_candidates(const Engine& eng, RunResult& r) {
  if constexpr (std::is_same_v<Engine, ExactEngine>) r.candidate_history.push_back(eng.candidates());
}

template <class Engine>
CandidateSetExact current_candidates(const Engine& eng) {
  if constexpr (std::is_same_v<Engine, ExactEngine>) {
    return eng.candidates();
  } else {
    return {};
  }
}

template <class Engine>
RunResult run_disagreement(Engine& eng, std::span<const LoggedTriple> logged,
                           std::span<const Example> online, const LoggingPolicy& policy,
                           const AlgoConfig& cfg, Variant variant, std::uint64_t seed) {
  RunResult r;
  r.seed = seed;
  r.config_fingerprint = cfg.fingerprint();
  const Propensity q0 = as_propensity(policy);
  const Propensity always = [](std::uint64_t, const FeatureVector&) { return 1.0; };

  if (online.empty()) {
    const auto s = make_segment(logged, {}, q0, always, variant.weighting);
    r.xi.push_back(eng.initial_xi(policy));
    record_candidates(eng, r);
    r.final_classifier = eng.finish(s);
    return r;
  }

  const auto plan = plan_partition(logged.size(), online.size());
  if (plan.alpha < 1.0) {
    r.warnings.push_back("alpha = " + std::to_string(plan.alpha) +
                         " < 1: fewer logged than online examples per segment");
  }
  double xi = eng.initial_xi(policy);
  r.xi.push_back(xi);
  record_candidates(eng, r);
  r.decisions.reserve(online.size());

  WeightedSample s = make_segment(logged.subspan(0, plan.m_at(0)), {}, q0, always, variant.weighting);
  std::size_t segment_begin = 0;  // online offset of the records in s

  for (std::size_t k = 0; k < plan.K; ++k) {
    if (cfg.keep_audit) {
      r.audit.push_back({s, with_true_labels(s, online, segment_begin), current_candidates(eng)});
    }
    eng.fit_and_prune(s, k, xi, plan);
    record_candidates(eng, r);

    const double next_xi = eng.next_xi(policy);
    const Propensity qk = [&](std::uint64_t id, const FeatureVector& x) {
      if (!variant.debias) return 1.0;
      return debias_rule(q0(id, x), next_xi, plan.alpha) ? 1.0 : 0.0;
    };

    const std::size_t begin = plan.online_offset(k + 1);
    const std::size_t count = plan.n_at(k + 1);
    std::vector<LoggedTriple> segment;
    segment.reserve(count);
    std::size_t queries = 0;
    for (std::size_t t = begin; t < begin + count; ++t) {
      const auto& ex = online[t];
      if (qk(ex.id, ex.x) == 0.0) {
        segment.push_back(LoggedTriple::hidden(ex.id, ex.x));
        r.decisions.push_back(Decision::kDiscarded);
        ++r.discarded_count;
      } else if (eng.in_dis(ex.id, ex.x)) {
        segment.push_back(LoggedTriple::observed(ex.id, ex.x, ex.y, LabelSource::kQueried));
        r.decisions.push_back(Decision::kQueried);
        ++queries;
      } else {
        segment.push_back(
            LoggedTriple::observed(ex.id, ex.x, eng.infer(ex.id, ex.x), LabelSource::kInferred));
        r.decisions.push_back(Decision::kInferred);
        ++r.inferred_count;
      }
    }
    r.queries_per_iteration.push_back(queries);
    r.query_count += queries;

    s = make_segment(logged.subspan(plan.logged_offset(k + 1), plan.m_at(k + 1)), segment, q0, qk,
                     variant.weighting);
    segment_begin = begin;
    xi = next_xi;
    r.xi.push_back(xi);
  }
  if (cfg.keep_audit) {
    r.audit.push_back({s, with_true_labels(s, online, segment_begin), current_candidates(eng)});
  }
  r.final_classifier = eng.finish(s);
  return r;
}

RunResult dispatch(std::span<const LoggedTriple> logged, std::span<const Example> online,
                   const LoggingPolicy& policy, const HypothesisSpace& space, const AlgoConfig& cfg,
                   Variant variant, std::uint64_t seed) {
  cfg.validate();
  if (const auto* ex = std::get_if<ExactSpace>(&space)) {
    if (cfg.mode != Mode::kExact) throw std::invalid_argument("exact hypothesis space needs algo.mode = exact");
    if (ex->cls == nullptr) throw std::invalid_argument("exact space without a class");
    ExactEngine eng(*ex, cfg);
    return run_disagreement(eng, logged, online, policy, cfg, variant, seed);
  }
  if (cfg.mode != Mode::kPractical) throw std::invalid_argument("linear space needs algo.mode = practical");
  PracticalEngine eng(std::get<LinearSpace>(space), logged, cfg, seed);
  return run_disagreement(eng, logged, online, policy, cfg, variant, seed);
}

}  // namespace

RunResult run_idbal(std::span<const LoggedTriple> logged, std::span<const Example> online,
                    const LoggingPolicy& policy, const HypothesisSpace& space, const AlgoConfig& cfg,
                    std::uint64_t seed) {
  return dispatch(logged, online, policy, space, cfg, {Weighting::kMultipleImportance, true}, seed);
}

RunResult run_dbalwm(std::span<const LoggedTriple> logged, std::span<const Example> online,
                     const LoggingPolicy& policy, const HypothesisSpace& space, const AlgoConfig& cfg,
                     std::uint64_t seed) {
  return dispatch(logged, online, policy, space, cfg, {Weighting::kMultipleImportance, false}, seed);
}

RunResult run_dbalw(std::span<const LoggedTriple> logged, std::span<const Example> online,
                    const LoggingPolicy& policy, const HypothesisSpace& space, const AlgoConfig& cfg,
                    std::uint64_t seed) {
  return dispatch(logged, online, policy, space, cfg, {Weighting::kImportance, false}, seed);
}

RunResult run_passive(std::span<const LoggedTriple> logged, std::span<const Example> online,
                      const LoggingPolicy& policy, const HypothesisSpace& space, const AlgoConfig& cfg,
                      std::uint64_t seed) {
  cfg.validate();
  RunResult r;
  r.seed = seed;
  r.config_fingerprint = cfg.fingerprint();
  const Propensity q0 = as_propensity(policy);
  const Propensity always = [](std::uint64_t, const FeatureVector&) { return 1.0; };

  std::vector<LoggedTriple> queried;
  queried.reserve(online.size());
  for (const auto& ex : online) {
    queried.push_back(LoggedTriple::observed(ex.id, ex.x, ex.y, LabelSource::kQueried));
  }
  r.decisions.assign(online.size(), Decision::kQueried);
  r.query_count = online.size();
  r.queries_per_iteration.push_back(online.size());

  if (const auto* ex = std::get_if<ExactSpace>(&space)) {
    if (cfg.mode != Mode::kExact) throw std::invalid_argument("exact hypothesis space needs algo.mode = exact");
    const auto s = make_is_sample(logged, queried, q0, always);
    r.final_classifier = erm_weighted(*ex->cls, s, CandidateSetExact::all(*ex->cls)).index;
    return r;
  }
  if (cfg.mode != Mode::kPractical) throw std::invalid_argument("linear space needs algo.mode = practical");
  LinearModel model(std::get<LinearSpace>(space).dim);
  // Logged pass with weights z/Q0, then the online stream with weight 1.
  train_pass(model, make_is_sample(logged, {}, q0, always), cfg);
  train_pass(model, make_is_sample({}, queried, q0, always), cfg);
  r.final_classifier = std::move(model);
  return r;
}

RunResult run_algorithm(Algorithm algo, std::span<const LoggedTriple> logged,
                        std::span<const Example> online, const LoggingPolicy& policy,
                        const HypothesisSpace& space, const AlgoConfig& cfg, std::uint64_t seed) {
  switch (algo) {
    case Algorithm::kPassive: return run_passive(logged, online, policy, space, cfg, seed);
    case Algorithm::kDbalw: return run_dbalw(logged, online, policy, space, cfg, seed);
    case Algorithm::kDbalwm: return run_dbalwm(logged, online, policy, space, cfg, seed);
    case Algorithm::kIdbal: return run_idbal(logged, online, policy, space, cfg, seed);
  }
  throw std::invalid_argument("unknown algorithm");
}

Label predict(const RunResult& r, const HypothesisSpace& space, std::uint64_t id,
              const FeatureVector& x) {
  if (const auto* idx = std::get_if<std::size_t>(&r.final_classifier)) {
    const auto* ex = std::get_if<ExactSpace>(&space);
    if (ex == nullptr || ex->cls == nullptr) throw std::invalid_argument("member index needs an exact space");
    return ex->cls->predict(*idx, id, x);
  }
  return std::get<LinearModel>(r.final_classifier).predict(x);
}

double test_error(const RunResult& r, const HypothesisSpace& space, std::span<const Example> test,
                  Execution exec) {
  if (const auto* model = std::get_if<LinearModel>(&r.final_classifier)) {
    return zero_one_error(*model, test, exec);
  }
  if (test.empty()) return 0.0;
  std::size_t errors = 0;
  for (const auto& ex : test) errors += predict(r, space, ex.id, ex.x) != ex.y ? 1 : 0;
  return static_cast<double>(errors) / static_cast<double>(test.size());
}

RunResult run_with_horizons(Algorithm algo, std::span<const LoggedTriple> logged,
                            std::span<const Example> online, std::span<const Example> test,
                            const LoggingPolicy& policy, const HypothesisSpace& space,
                            const AlgoConfig& cfg, std::span<const std::size_t> horizons,
                            std::uint64_t seed) {
  if (horizons.empty()) throw std::invalid_argument("no horizons given");
  RunResult last;
  std::vector<TracePoint> trace;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto h = horizons[i];
    if (h > online.size()) throw std::invalid_argument("horizon exceeds the online stream");
    if (i > 0 && h <= prev) throw std::invalid_argument("horizons must be strictly increasing");
    prev = h;
    last = run_algorithm(algo, logged, online.first(h), policy, space, cfg, seed);
    trace.push_back({h, last.query_count, test_error(last, space, test)});
  }
  last.trace = std::move(trace);
  return last;
}

}  // namespace idbal
