// Copyright 2026 The SkimNet Authors
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

#include <random>

#include "skimnet/models/student.hpp"
#include "skimnet/numerics/graph.hpp"
#include "skimnet/numerics/ops.hpp"
#include "skimnet/rng.hpp"

namespace {

using namespace skimnet;
using numerics::Tensor;

Tensor random_tensor(Rng& rng, numerics::Shape shape) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

void BM_AffineApply(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  numerics::Graph g(false);
  const numerics::Var x = g.constant(random_tensor(rng, {rows, width}));
  const numerics::Var w = g.constant(random_tensor(rng, {width, width}));
  const numerics::Var b = g.constant(random_tensor(rng, {width}));
  for (auto _ : state) benchmark::DoNotOptimize(numerics::affine_apply(x, w, b).value().data());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows * width * width));
}
BENCHMARK(BM_AffineApply)->Args({1, 384})->Args({64, 384})->Args({64, 64});

void BM_Softmax(benchmark::State& state) {
  Rng rng(2);
  const Tensor x = random_tensor(rng, {static_cast<std::size_t>(state.range(0))});
  for (auto _ : state) benchmark::DoNotOptimize(numerics::softmax(x).data());
}
BENCHMARK(BM_Softmax)->Arg(10)->Arg(64);

// One training step of the student on a mini-batch: forward, loss, backward.
void BM_StudentForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const models::ModelDims dims;
  models::Student student(dims, models::Modality::kImageAudio, 3);
  Rng rng(3);
  const Tensor image = random_tensor(rng, {batch, dims.image_dim});
  const Tensor audio = random_tensor(rng, {batch, dims.audio_dim});
  for (auto _ : state) {
    numerics::Graph g;
    models::Binder bind(g, true);
    const auto vars = student.forward(bind, g.constant(image), g.constant(audio));
    g.backward(numerics::sum_all(vars.logits));
    student.params().zero_grad();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_StudentForwardBackward)->Arg(1)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
