// Copyright 2026 The tokenshot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "tokenshot/episodic_eval.hpp"
#include "tokenshot/importance.hpp"
#include "tokenshot/similarity.hpp"
#include "tokenshot/synthetic.hpp"

namespace tokenshot {
namespace {

// 5-way 5-shot episode with 15 queries per class on a side x side grid.
Episode MakeEpisode(int side, int dim) {
  static constexpr int kClasses = 5;
  const TokenDataset data = RandomTokenDataset(kClasses, 20, {side, side}, dim, 1);
  EvalConfig cfg;
  return SampleEpisode(data, cfg, 0);
}

void BM_Predict(benchmark::State& state) {
  const Episode e = MakeEpisode(static_cast<int>(state.range(0)), 64);
  const std::vector<double> v(static_cast<std::size_t>(e.num_support_tokens()), 0.0);
  ClassifierConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Predict(e, v, cfg));
  state.counters["L"] = e.tokens_per_image();
}
BENCHMARK(BM_Predict)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_SupportGradient(benchmark::State& state) {
  const Episode e = MakeEpisode(static_cast<int>(state.range(0)), 64);
  const SupportObjective obj(
      e, BuildMask(5, 5, e.tokens_per_image(), e.grid(), 5), 1.0 / 8.0);
  const std::vector<double> v(static_cast<std::size_t>(obj.num_weights()), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(obj.Evaluate(v));
}
BENCHMARK(BM_SupportGradient)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_InnerLoop(benchmark::State& state) {
  const Episode e = MakeEpisode(static_cast<int>(state.range(0)), 64);
  ClassifierConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(OptimizeImportance(e, cfg));
}
BENCHMARK(BM_InnerLoop)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tokenshot

BENCHMARK_MAIN();
