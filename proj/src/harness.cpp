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

#include "idbal/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "idbal/rng.hpp"

namespace idbal {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
  return out;
}

std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_real(key, item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string join_reals(std::span<const double> v) {
  std::vector<std::string> items;
  for (double x : v) items.push_back(format_number(x));
  return join(items);
}

std::string dataset_name(const std::string& entry) {
  if (entry == "synthetic") return entry;
  return std::filesystem::path(entry).stem().string();
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> power_grid(double base, int first, int last, int step) {
  if (step <= 0 || last < first) throw std::invalid_argument("bad power grid range");
  std::vector<double> out;
  for (int k = first; k <= last; k += step) out.push_back(base * std::ldexp(1.0, k));
  return out;
}

ExperimentConfig::ExperimentConfig()
    : c_grid(power_grid(0.01, 0, 18, 2)), eta_grid(power_grid(0.0001, 0, 18, 2)) {}

ExperimentConfig ExperimentConfig::quick() {
  ExperimentConfig cfg;
  cfg.datasets = {"synthetic", "data/breast_cancer.txt", "data/digits.txt"};
  cfg.repeats = 5;
  cfg.c_grid = power_grid(0.01, 0, 18, 6);
  cfg.eta_grid = power_grid(0.0001, 0, 18, 6);
  return cfg;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k{
      "datasets",        "synthetic.count",
      "synthetic.dim",   "synthetic.flip_prob",
      "synthetic.seed",  "split.test_fraction",
      "split.logged_fraction",
      "policy.name",     "policy.p",
      "policy.probs",    "policy.c",
      "policy.calibration_target",
      "policy.group_seed",
      "policy.coarse_fraction",
      "policy.table",    "algorithms",
      "repeats",         "horizon_base",
      "horizon_growth",  "grid.C",
      "grid.eta",        "seed",
      "delta",           "update",
      "infimum_sample",  "max_online",
      "threads",         "output_dir",
  };
  return k;
}

const std::vector<std::string>& ExperimentConfig::alias_keys() {
  static const std::vector<std::string> k{"algo.name", "algo.mode", "algo.delta", "algo.C", "algo.eta"};
  return k;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  // Learner-level spellings of the sweep keys.
  if (key == "algo.name") return set("algorithms", value);
  if (key == "algo.C") return set("grid.C", value);
  if (key == "algo.eta") return set("grid.eta", value);
  if (key == "algo.delta") return set("delta", value);
  if (key == "algo.mode") {
    if (value != "practical") throw std::invalid_argument("the experiment harness runs algo.mode = practical only");
    return;
  }
  if (key == "datasets") {
    datasets = split_list(value);
  } else if (key == "synthetic.count") {
    synthetic.count = parse_uint(key, value);
  } else if (key == "synthetic.dim") {
    synthetic.dim = parse_uint(key, value);
  } else if (key == "synthetic.flip_prob") {
    synthetic.flip_prob = parse_real(key, value);
  } else if (key == "synthetic.seed") {
    synthetic.seed = parse_uint(key, value);
  } else if (key == "split.test_fraction") {
    split.test = parse_real(key, value);
  } else if (key == "split.logged_fraction") {
    split.logged = parse_real(key, value);
  } else if (key == "policy.name") {
    policy_name = value;
  } else if (key == "policy.p") {
    policy_p = parse_real(key, value);
  } else if (key == "policy.probs") {
    const auto v = parse_reals(key, value);
    if (v.size() != 3) throw std::invalid_argument("policy.probs expects three probabilities");
    policy_probs = {v[0], v[1], v[2]};
  } else if (key == "policy.c") {
    if (value.empty() || value == "auto") {
      policy_c.reset();
    } else {
      policy_c = parse_real(key, value);
    }
  } else if (key == "policy.calibration_target") {
    calibration_target = parse_real(key, value);
  } else if (key == "policy.group_seed") {
    if (value.empty() || value == "auto") {
      group_seed.reset();
    } else {
      group_seed = parse_uint(key, value);
    }
  } else if (key == "policy.coarse_fraction") {
    coarse_fraction = parse_real(key, value);
  } else if (key == "policy.table") {
    policy_table = value;
  } else if (key == "algorithms") {
    algorithms.clear();
    for (const auto& a : split_list(value)) algorithms.push_back(parse_algorithm(a));
  } else if (key == "repeats") {
    repeats = parse_uint(key, value);
  } else if (key == "horizon_base") {
    horizon_base = parse_uint(key, value);
  } else if (key == "horizon_growth") {
    horizon_growth = parse_uint(key, value);
  } else if (key == "grid.C") {
    c_grid = parse_reals(key, value);
  } else if (key == "grid.eta") {
    eta_grid = parse_reals(key, value);
  } else if (key == "seed") {
    seed = parse_uint(key, value);
  } else if (key == "delta") {
    delta = parse_real(key, value);
  } else if (key == "update") {
    if (value == "gradient") {
      update = UpdateRule::kGradient;
    } else if (value == "importance_aware") {
      update = UpdateRule::kImportanceAware;
    } else {
      throw std::invalid_argument("update must be 'gradient' or 'importance_aware'");
    }
  } else if (key == "infimum_sample") {
    infimum_sample = parse_uint(key, value);
  } else if (key == "max_online") {
    max_online = parse_uint(key, value);
  } else if (key == "threads") {
    threads = parse_uint(key, value);
  } else if (key == "output_dir") {
    output_dir = value;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["datasets"] = join(datasets);
  m["synthetic.count"] = std::to_string(synthetic.count);
  m["synthetic.dim"] = std::to_string(synthetic.dim);
  m["synthetic.flip_prob"] = format_number(synthetic.flip_prob);
  m["synthetic.seed"] = std::to_string(synthetic.seed);
  m["split.test_fraction"] = format_number(split.test);
  m["split.logged_fraction"] = format_number(split.logged);
  m["policy.name"] = policy_name;
  m["policy.p"] = format_number(policy_p);
  m["policy.probs"] = join_reals(policy_probs);
  m["policy.c"] = policy_c ? format_number(*policy_c) : "auto";
  m["policy.calibration_target"] = format_number(calibration_target);
  m["policy.group_seed"] = group_seed ? std::to_string(*group_seed) : "auto";
  m["policy.coarse_fraction"] = format_number(coarse_fraction);
  m["policy.table"] = policy_table;
  std::vector<std::string> algos;
  for (auto a : algorithms) algos.push_back(to_string(a));
  m["algorithms"] = join(algos);
  m["repeats"] = std::to_string(repeats);
  m["horizon_base"] = std::to_string(horizon_base);
  m["horizon_growth"] = std::to_string(horizon_growth);
  m["grid.C"] = join_reals(c_grid);
  m["grid.eta"] = join_reals(eta_grid);
  m["seed"] = std::to_string(seed);
  m["delta"] = format_number(delta);
  m["update"] = update == UpdateRule::kGradient ? "gradient" : "importance_aware";
  m["infimum_sample"] = std::to_string(infimum_sample);
  m["max_online"] = std::to_string(max_online);
  m["threads"] = std::to_string(threads);
  m["output_dir"] = output_dir;
  return m;
}

void ExperimentConfig::validate() const {
  if (datasets.empty()) throw std::invalid_argument("no datasets configured");
  if (algorithms.empty()) throw std::invalid_argument("no algorithms configured");
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (c_grid.empty() || eta_grid.empty()) throw std::invalid_argument("parameter grids must be nonempty");
  for (double c : c_grid) {
    if (!(c > 0.0)) throw std::invalid_argument("grid.C values must be positive");
  }
  for (double e : eta_grid) {
    if (!(e > 0.0)) throw std::invalid_argument("grid.eta values must be positive");
  }
  if (horizon_base < 1) throw std::invalid_argument("horizon_base must be positive");
  if (horizon_growth < 2) throw std::invalid_argument("horizon_growth must be at least 2");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  static const std::vector<std::string> names{"identical", "uniform", "uncertainty", "certainty", "table"};
  if (std::find(names.begin(), names.end(), policy_name) == names.end()) {
    throw std::invalid_argument("unknown policy '" + policy_name + "'");
  }
  if (policy_name == "table" && policy_table.empty()) {
    throw std::invalid_argument("policy.table must name a CSV file for the table policy");
  }
  if (!(coarse_fraction > 0.0 && coarse_fraction <= 1.0)) {
    throw std::invalid_argument("policy.coarse_fraction must lie in (0,1]");
  }
  if (!(calibration_target > 0.0 && calibration_target < 1.0)) {
    throw std::invalid_argument("policy.calibration_target must lie in (0,1)");
  }
  for (const auto& d : datasets) {
    if (d == "synthetic") synthetic.validate();
  }
}

ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    try {
      base.set(key, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), std::move(base));
}

std::string resolve_output_dir(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "results";
}

std::vector<std::size_t> horizons_for(std::size_t online_size, std::size_t base, std::size_t growth) {
  if (base == 0 || growth < 2) throw std::invalid_argument("bad horizon schedule");
  std::vector<std::size_t> out;
  for (std::size_t a = base; a <= online_size; a *= growth) {
    out.push_back(a);
    if (a > online_size / growth) break;
  }
  return out;
}

std::vector<LoadedDataset> load_datasets(const ExperimentConfig& cfg) {
  std::vector<LoadedDataset> out;
  for (const auto& entry : cfg.datasets) {
    if (entry != "synthetic" && !std::filesystem::exists(entry)) {
      throw std::runtime_error("dataset '" + entry + "' not found");
    }
  }
  for (const auto& entry : cfg.datasets) {
    LoadedDataset d;
    d.name = dataset_name(entry);
    d.examples = entry == "synthetic" ? generate_synthetic(cfg.synthetic) : read_sparse_dataset(entry);
    out.push_back(std::move(d));
  }
  return out;
}

LoggingPolicy build_policy(const ExperimentConfig& cfg, std::span<const Example> training,
                           std::span<const Example> logged_examples, std::uint64_t repeat_seed) {
  const std::string& name = cfg.policy_name;
  if (name == "identical") return policy::Identical{cfg.policy_p};
  if (name == "uniform") {
    return policy::UniformGroups{cfg.policy_probs,
                                 cfg.group_seed.value_or(derive_seed(repeat_seed, Stream::kLogging, 1))};
  }
  if (name == "table") return read_policy_table(cfg.policy_table);
  CoarseFitOptions fit;
  fit.rule = cfg.update;
  const LinearModel coarse = fit_coarse_model(training, cfg.coarse_fraction, repeat_seed, fit);
  LoggingPolicy p;
  if (name == "uncertainty") {
    p = policy::Uncertainty{cfg.policy_c.value_or(1.0), coarse};
  } else if (name == "certainty") {
    p = policy::Certainty{cfg.policy_c.value_or(1.0), coarse};
  } else {
    throw std::invalid_argument("unknown policy '" + name + "'");
  }
  if (!cfg.policy_c) p = calibrate_policy(std::move(p), logged_examples, cfg.calibration_target);
  return p;
}

RepeatData prepare_repeat(const ExperimentConfig& cfg, const LoadedDataset& data, std::size_t repeat) {
  RepeatData rd;
  rd.seed = derive_seed(derive_seed(cfg.seed, hash_name(data.name)), Stream::kRepeat, repeat);
  rd.split = split_dataset(data.examples, cfg.split, derive_seed(rd.seed, Stream::kSplit));
  std::vector<Example> training = rd.split.logged;
  training.insert(training.end(), rd.split.online.begin(), rd.split.online.end());
  rd.policy = build_policy(cfg, training, rd.split.logged, rd.seed);
  rd.logged = apply_logging(rd.split.logged, as_propensity(rd.policy), derive_seed(rd.seed, Stream::kLogging));
  rd.online = rd.split.online;
  if (cfg.max_online > 0 && rd.online.size() > cfg.max_online) rd.online.resize(cfg.max_online);
  return rd;
}

std::vector<CurvePoint> sorted_by_queries(std::span<const CurvePoint> curve) {
  std::vector<CurvePoint> out(curve.begin(), curve.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.n_bar < b.n_bar; });
  return out;
}

double auc(std::span<const CurvePoint> curve) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double width = curve[i + 1].n_bar - curve[i].n_bar;
    if (!(width >= 0.0)) throw std::invalid_argument("curve points are not sorted by query count");
    total += 0.5 * (curve[i].e_bar + curve[i + 1].e_bar) * width;
  }
  return total;
}

BestAuc best_auc(std::span<const SweepCurve> curves, const std::string& dataset, Algorithm algorithm) {
  std::optional<BestAuc> best;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    if (c.dataset != dataset || c.algorithm != algorithm) continue;
    const bool better =
        !best || c.auc < best->value ||
        (c.auc == best->value &&
         std::tie(c.param.C, c.param.eta) < std::tie(best->param.C, best->param.eta));
    if (better) best = BestAuc{i, c.param, c.auc};
  }
  if (!best) throw std::invalid_argument("no completed parameter point for " + dataset + "/" + to_string(algorithm));
  return *best;
}

std::vector<SweepCurve> aggregate_runs(std::span<const RunRecord> runs) {
  using Key = std::tuple<std::string, Algorithm, std::size_t>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) {
    Key k{r.dataset, r.algorithm, r.param_index};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(&r);
  }
  std::vector<SweepCurve> curves;
  for (const auto& k : order) {
    const auto& members = groups[k];
    SweepCurve c;
    c.dataset = std::get<0>(k);
    c.algorithm = std::get<1>(k);
    c.param_index = std::get<2>(k);
    c.param = members.front()->param;
    const std::size_t horizons = members.front()->trace.size();
    for (const auto* r : members) {
      if (r->trace.size() != horizons) throw std::invalid_argument("repeats disagree on the horizon count");
    }
    for (std::size_t i = 0; i < horizons; ++i) {
      double q = 0.0;
      double e = 0.0;
      for (const auto* r : members) {
        q += static_cast<double>(r->trace[i].queries);
        e += r->trace[i].test_error;
      }
      const double reps = static_cast<double>(members.size());
      c.points.push_back(CurvePoint{q / reps, e / reps, i});
    }
    c.auc = auc(sorted_by_queries(c.points));
    curves.push_back(std::move(c));
  }
  return curves;
}

ProtocolResult run_protocol(const ExperimentConfig& cfg, Execution exec) {
  cfg.validate();
  const auto data = load_datasets(cfg);
  return run_protocol(cfg, data, exec);
}

ProtocolResult run_protocol(const ExperimentConfig& cfg, std::span<const LoadedDataset> data,
                            Execution exec) {
  cfg.validate();
  if (cfg.threads > 0) set_threads(static_cast<int>(cfg.threads));

  std::vector<ParamPoint> grid;
  for (double c : cfg.c_grid) {
    for (double eta : cfg.eta_grid) grid.push_back({c, eta});
  }
  const std::size_t n_data = data.size();
  const std::size_t n_rep = cfg.repeats;
  const std::size_t n_alg = cfg.algorithms.size();
  const std::size_t n_par = grid.size();

  // Shared per-(dataset, repeat) data.
  std::vector<RepeatData> repeats(n_data * n_rep);
  const auto n_prep = static_cast<std::int64_t>(repeats.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::kParallel)
  for (std::int64_t i = 0; i < n_prep; ++i) {
    const auto d = static_cast<std::size_t>(i) / n_rep;
    const auto r = static_cast<std::size_t>(i) % n_rep;
    repeats[i] = prepare_repeat(cfg, data[d], r);
  }

  std::vector<std::vector<std::size_t>> horizons(n_data);
  std::vector<std::size_t> dims(n_data, 0);
  for (std::size_t d = 0; d < n_data; ++d) {
    horizons[d] = horizons_for(repeats[d * n_rep].online.size(), cfg.horizon_base, cfg.horizon_growth);
    if (horizons[d].empty()) {
      throw std::invalid_argument("dataset '" + data[d].name + "' has fewer online examples than horizon_base");
    }
    for (const auto& ex : data[d].examples) dims[d] = std::max<std::size_t>(dims[d], ex.x.max_index());
  }

  ProtocolResult result;
  result.runs.resize(n_data * n_alg * n_par * n_rep);
  const auto n_tasks = static_cast<std::int64_t>(result.runs.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::kParallel)
  for (std::int64_t t = 0; t < n_tasks; ++t) {
    auto rest = static_cast<std::size_t>(t);
    const std::size_t r = rest % n_rep;
    rest /= n_rep;
    const std::size_t p = rest % n_par;
    rest /= n_par;
    const std::size_t a = rest % n_alg;
    const std::size_t d = rest / n_alg;

    const RepeatData& rd = repeats[d * n_rep + r];
    const Algorithm algo = cfg.algorithms[a];
    AlgoConfig ac;
    ac.mode = Mode::kPractical;
    ac.delta = cfg.delta;
    ac.C = grid[p].C;
    ac.eta = grid[p].eta;
    ac.update = cfg.update;
    ac.infimum_sample = cfg.infimum_sample;
    const std::uint64_t run_seed =
        derive_seed(derive_seed(rd.seed, Stream::kLearner, static_cast<std::uint64_t>(algo)), p);
    const HypothesisSpace space = LinearSpace{dims[d], {}};
    auto run = run_with_horizons(algo, rd.logged, rd.online, rd.split.test, rd.policy, space, ac,
                                 horizons[d], run_seed);
    RunRecord& rec = result.runs[t];
    rec.dataset = data[d].name;
    rec.algorithm = algo;
    rec.param_index = p;
    rec.param = grid[p];
    rec.repeat = r;
    rec.trace = std::move(run.trace);
  }
  result.curves = aggregate_runs(result.runs);
  return result;
}

std::map<std::tuple<std::string, Algorithm, std::size_t>, double> per_repeat_best_auc(
    std::span<const RunRecord> runs) {
  std::map<std::tuple<std::string, Algorithm, std::size_t>, double> best;
  for (const auto& r : runs) {
    std::vector<CurvePoint> pts;
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      pts.push_back({static_cast<double>(r.trace[i].queries), r.trace[i].test_error, i});
    }
    const double v = auc(sorted_by_queries(pts));
    auto [it, inserted] = best.try_emplace({r.dataset, r.algorithm, r.repeat}, v);
    if (!inserted) it->second = std::min(it->second, v);
  }
  return best;
}

std::vector<PairedOrdering> paired_ordering(std::span<const RunRecord> runs) {
  const auto best = per_repeat_best_auc(runs);
  std::vector<std::string> datasets;
  std::vector<Algorithm> algos;
  std::size_t max_repeat = 0;
  for (const auto& r : runs) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    if (std::find(algos.begin(), algos.end(), r.algorithm) == algos.end()) algos.push_back(r.algorithm);
    max_repeat = std::max(max_repeat, r.repeat + 1);
  }
  std::vector<PairedOrdering> out;
  for (const auto& d : datasets) {
    for (auto a : algos) {
      for (auto b : algos) {
        if (a == b) continue;
        PairedOrdering po{d, a, b, 0, 0};
        for (std::size_t k = 0; k < max_repeat; ++k) {
          const auto ia = best.find({d, a, k});
          const auto ib = best.find({d, b, k});
          if (ia == best.end() || ib == best.end()) continue;
          ++po.repeats;
          if (ia->second < ib->second) ++po.wins;
        }
        out.push_back(po);
      }
    }
  }
  return out;
}

void write_curve_csv(std::ostream& out, std::span<const RunRecord> runs) {
  out << "dataset,algorithm,C,eta,repeat,horizon,queries,test_error\n";
  for (const auto& r : runs) {
    for (const auto& tp : r.trace) {
      out << r.dataset << ',' << to_string(r.algorithm) << ',' << format_number(r.param.C) << ','
          << format_number(r.param.eta) << ',' << r.repeat << ',' << tp.horizon << ',' << tp.queries
          << ',' << format_number(tp.test_error) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const SweepCurve> curves) {
  out << "dataset,algorithm,best_auc,best_C,best_eta\n";
  std::vector<std::pair<std::string, Algorithm>> seen;
  for (const auto& c : curves) {
    const std::pair<std::string, Algorithm> key{c.dataset, c.algorithm};
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    const auto b = best_auc(curves, c.dataset, c.algorithm);
    out << c.dataset << ',' << to_string(c.algorithm) << ',' << format_number(b.value) << ','
        << format_number(b.param.C) << ',' << format_number(b.param.eta) << '\n';
  }
}

void write_paired_csv(std::ostream& out, std::span<const PairedOrdering> rows) {
  out << "dataset,algorithm_a,algorithm_b,wins,repeats,fraction\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << to_string(r.a) << ',' << to_string(r.b) << ',' << r.wins << ',' << r.repeats
        << ',' << format_number(r.fraction()) << '\n';
  }
}

std::vector<RunRecord> parse_curve_csv(std::string_view text) {
  std::vector<RunRecord> runs;
  std::map<std::tuple<std::string, Algorithm, double, double, std::size_t>, std::size_t> index;
  std::map<std::pair<double, double>, std::size_t> param_ids;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "dataset,algorithm,C,eta,repeat,horizon,queries,test_error") {
        throw ParseError(line_no, "unexpected curve CSV header");
      }
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() != 8) throw ParseError(line_no, "expected 8 fields");
    try {
      const Algorithm algo = parse_algorithm(f[1]);
      const double c = parse_real("C", f[2]);
      const double eta = parse_real("eta", f[3]);
      const std::size_t rep = parse_uint("repeat", f[4]);
      auto [pit, pnew] = param_ids.try_emplace({c, eta}, param_ids.size());
      (void)pnew;
      auto [it, inserted] = index.try_emplace({f[0], algo, c, eta, rep}, runs.size());
      if (inserted) {
        RunRecord r;
        r.dataset = f[0];
        r.algorithm = algo;
        r.param = {c, eta};
        r.param_index = pit->second;
        r.repeat = rep;
        runs.push_back(std::move(r));
      }
      runs[it->second].trace.push_back(
          TracePoint{parse_uint("horizon", f[5]), parse_uint("queries", f[6]), parse_real("test_error", f[7])});
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return runs;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

void write_reports(const std::string& dir, std::span<const RunRecord> runs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  std::ostringstream curve;
  write_curve_csv(curve, runs);
  // Summaries come from the rounded curve file so that `report` on it
  // reproduces them exactly.
  const auto rounded = parse_curve_csv(curve.str());
  const auto curves = aggregate_runs(rounded);
  std::ostringstream summary;
  write_summary_csv(summary, curves);
  std::ostringstream paired;
  write_paired_csv(paired, paired_ordering(rounded));
  const std::filesystem::path base(dir);
  write_file(base / "curves.csv", curve.str());
  write_file(base / "summary.csv", summary.str());
  write_file(base / "paired.csv", paired.str());
}

}  // namespace idbal
