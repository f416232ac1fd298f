// Copyright 2026 The wavetrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "wavetrain/augment.hpp"
#include "wavetrain/model.hpp"
#include "wavetrain/parallel.hpp"
#include "wavetrain/rng.hpp"
#include "wavetrain/trainer.hpp"

using namespace wavetrain;

namespace {

struct Fixture {
  Architecture arch;
  WeightVector w;
  Matrix x;
  std::vector<int> y;

  explicit Fixture(std::size_t rows) : arch(), w(init_weights(arch, 1)), x(rows, arch.input_dim), y(rows) {
    Rng rng(2);
    for (double& v : x.data) v = rng.uniform(-0.5, 0.5);
    for (int& v : y) v = static_cast<int>(rng.uniform_index(2));
  }
};

void BM_LossAndGradSerial(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::loss_and_grad(f.w, f.x, f.y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LossAndGradParallel(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(f.w, f.x, f.y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardSerial(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::forward(f.w, f.x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardParallel(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.w, f.x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_AverageWeights(benchmark::State& state) {
  const Architecture arch;
  std::vector<WeightVector> thetas;
  for (int n = 0; n < state.range(0); ++n) thetas.push_back(init_weights(arch, static_cast<std::uint64_t>(n)));
  for (auto _ : state) benchmark::DoNotOptimize(average_weights(thetas));
}

void BM_HedJitter(benchmark::State& state) {
  Rng rng(3);
  RgbImage img(32, 32);
  for (double& v : img.data) v = rng.uniform(0.05, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(hed_jitter(img, 0.05, rng));
}

}  // namespace

BENCHMARK(BM_LossAndGradSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossAndGradParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSerial)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardParallel)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AverageWeights)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HedJitter)->Unit(benchmark::kMicrosecond);

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
