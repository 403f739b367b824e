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

#include "skimnet/numerics/cost.hpp"

namespace skimnet::numerics {

namespace {
thread_local CostMeter* active_meter = nullptr;
thread_local Component active_component = Component::kOther;
}  // namespace

std::string_view component_name(Component c) {
  switch (c) {
    case Component::kEncoders: return "encoders";
    case Component::kFusion: return "fusion";
    case Component::kClassifier: return "classifier";
    case Component::kLstm: return "lstm";
    case Component::kQueryKeyGate: return "query_key_gate";
    case Component::kAttention: return "attention";
    case Component::kInterpolation: return "interpolation";
    case Component::kTeacher: return "teacher";
    case Component::kOther: return "other";
  }
  return "other";
}

std::uint64_t CostLedger::total_macs() const noexcept {
  std::uint64_t t = 0;
  for (auto v : macs) t += v;
  return t;
}

std::uint64_t CostLedger::total_bias_adds() const noexcept {
  std::uint64_t t = 0;
  for (auto v : bias_adds) t += v;
  return t;
}

void CostLedger::add(Component c, std::uint64_t mac_count, std::uint64_t bias_count) noexcept {
  macs[static_cast<std::size_t>(c)] += mac_count;
  bias_adds[static_cast<std::size_t>(c)] += bias_count;
}

CostLedger& CostLedger::operator+=(const CostLedger& other) noexcept {
  for (std::size_t i = 0; i < kNumComponents; ++i) {
    macs[i] += other.macs[i];
    bias_adds[i] += other.bias_adds[i];
  }
  return *this;
}

CostMeter::CostMeter() : previous_(active_meter) { active_meter = this; }

CostMeter::~CostMeter() { active_meter = previous_; }

CostScope::CostScope(Component c) noexcept : previous_(active_component) { active_component = c; }

CostScope::~CostScope() { active_component = previous_; }

void charge(std::uint64_t macs, std::uint64_t bias_adds) noexcept {
  if (active_meter) active_meter->ledger_.add(active_component, macs, bias_adds);
}

}  // namespace skimnet::numerics
