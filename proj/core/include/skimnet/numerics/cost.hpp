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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace skimnet::numerics {

/// Buckets for multiply-accumulate accounting.
enum class Component : std::size_t {
  kEncoders = 0,
  kFusion,
  kClassifier,
  kLstm,
  kQueryKeyGate,
  kAttention,  // attention scoring, soft indexing and gate mixing
  kInterpolation,
  kTeacher,
  kOther,
};

inline constexpr std::size_t kNumComponents = 9;

std::string_view component_name(Component c);

/// Exact multiply-accumulate counts per component. Bias additions are kept
/// separately and do not enter total_macs().
struct CostLedger {
  std::array<std::uint64_t, kNumComponents> macs{};
  std::array<std::uint64_t, kNumComponents> bias_adds{};

  std::uint64_t total_macs() const noexcept;
  std::uint64_t total_bias_adds() const noexcept;
  std::uint64_t operator[](Component c) const noexcept {
    return macs[static_cast<std::size_t>(c)];
  }
  void add(Component c, std::uint64_t mac_count, std::uint64_t bias_count = 0) noexcept;

  CostLedger& operator+=(const CostLedger& other) noexcept;
  friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

/// Installs a thread-local MAC counter for its lifetime. Every instrumented
/// kernel executed on this thread charges the active meter. Meters nest; the
/// innermost one receives the charges.
class CostMeter {
 public:
  CostMeter();
  ~CostMeter();
  CostMeter(const CostMeter&) = delete;
  CostMeter& operator=(const CostMeter&) = delete;

  const CostLedger& ledger() const noexcept { return ledger_; }
  void reset() noexcept { ledger_ = {}; }

 private:
  friend void charge(std::uint64_t, std::uint64_t) noexcept;
  CostLedger ledger_;
  CostMeter* previous_;
};

/// Sets the component that subsequent charges are booked against.
class CostScope {
 public:
  explicit CostScope(Component c) noexcept;
  ~CostScope();
  CostScope(const CostScope&) = delete;
  CostScope& operator=(const CostScope&) = delete;

 private:
  Component previous_;
};

/// Books MACs against the current component of the active meter, if any.
void charge(std::uint64_t macs, std::uint64_t bias_adds = 0) noexcept;

}  // namespace skimnet::numerics
