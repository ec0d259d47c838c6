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

// Serial vs OpenMP timings for the parallel kernels. Both paths produce
// identical results; only wall time differs.

#include <benchmark/benchmark.h>

#include <vector>

#include "idbal/data.hpp"
#include "idbal/harness.hpp"
#include "idbal/hypotheses.hpp"
#include "idbal/oracle.hpp"

namespace {

using idbal::Execution;

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_McUnbiasedness(benchmark::State& state) {
  const auto inst = idbal::random_fixture(7);
  idbal::SamplingSetup setup;
  setup.m = 30;
  setup.n = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(idbal::mc_unbiasedness(inst, 0, setup, 20000, 11,
                                                    idbal::Weighting::kMultipleImportance, mode(state)));
  }
}
BENCHMARK(BM_McUnbiasedness)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ZeroOneError(benchmark::State& state) {
  idbal::SyntheticSpec spec;
  spec.count = 200000;
  const auto data = idbal::generate_synthetic(spec);
  const idbal::LinearModel model(idbal::synthetic_separator(spec));
  for (auto _ : state) benchmark::DoNotOptimize(idbal::zero_one_error(model, data, mode(state)));
}
BENCHMARK(BM_ZeroOneError)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_RunProtocol(benchmark::State& state) {
  auto cfg = idbal::ExperimentConfig::quick();
  cfg.datasets = {"synthetic"};
  cfg.synthetic.count = 1500;
  cfg.repeats = 2;
  cfg.max_online = 320;
  const auto data = idbal::load_datasets(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(idbal::run_protocol(cfg, data, mode(state)));
}
BENCHMARK(BM_RunProtocol)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
