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

#include <cmath>
#include <memory>
#include <numbers>

#include "skimnet/evalbench/evalbench.hpp"
#include "skimnet/skim/skim.hpp"
#include "skimnet/synth/audio.hpp"
#include "skimnet/synth/dataset.hpp"

namespace {

using namespace skimnet;

void BM_GenerateVideo(benchmark::State& state) {
  const synth::DatasetConfig cfg;
  const synth::Prototypes protos = synth::make_prototypes(cfg);
  std::uint64_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate_video(cfg, protos, 0, index++));
}
BENCHMARK(BM_GenerateVideo);

void BM_Spectrogram(benchmark::State& state) {
  synth::PcmAudio audio;
  audio.sample_rate = static_cast<int>(state.range(0));
  audio.samples.resize(static_cast<std::size_t>(audio.sample_rate));
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    audio.samples[i] = static_cast<std::int16_t>(
        std::lround(10000.0 * std::sin(2.0 * std::numbers::pi * 440.0 * static_cast<double>(i) / audio.sample_rate)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(synth::wav_to_spectrogram(audio).values.data());
}
BENCHMARK(BM_Spectrogram)->Arg(16000)->Arg(44100);

// Per-video inference of each strategy at the default dims, untrained weights.
class StrategyFixture : public benchmark::Fixture {
 public:
  void SetUp(const benchmark::State&) override {
    if (student_) return;
    synth::DatasetConfig cfg;
    video_ = synth::generate_video(cfg, synth::make_prototypes(cfg), 1, 0);
    student_ = std::make_unique<models::Student>(dims_, models::Modality::kImageAudio, 5);
    skimmer_ = std::make_unique<models::Skimmer>(dims_, *student_, 5);
    lstm_ = std::make_unique<evalbench::LstmBaseline>(dims_, 5);
  }

 protected:
  models::ModelDims dims_;
  synth::SyntheticVideo video_;
  std::unique_ptr<models::Student> student_;
  std::unique_ptr<models::Skimmer> skimmer_;
  std::unique_ptr<evalbench::LstmBaseline> lstm_;
};

BENCHMARK_DEFINE_F(StrategyFixture, RunStrategy)(benchmark::State& state) {
  const auto strategy = static_cast<evalbench::Strategy>(state.range(0));
  skim::InferenceBudget budget;
  budget.subsample_factor = static_cast<std::size_t>(state.range(1));
  const evalbench::ModelSet models{student_.get(), skimmer_.get(), lstm_.get(), nullptr};
  for (auto _ : state) benchmark::DoNotOptimize(evalbench::run_strategy(strategy, video_, models, budget).probs.data());
  state.SetLabel(std::string(evalbench::strategy_name(strategy)));
}
BENCHMARK_REGISTER_F(StrategyFixture, RunStrategy)
    ->Args({static_cast<int>(evalbench::Strategy::kDense), 1})
    ->Args({static_cast<int>(evalbench::Strategy::kUniform), 1})
    ->Args({static_cast<int>(evalbench::Strategy::kLstm), 1})
    ->Args({static_cast<int>(evalbench::Strategy::kOurs), 1})
    ->Args({static_cast<int>(evalbench::Strategy::kOurs), 5});

}  // namespace

BENCHMARK_MAIN();
