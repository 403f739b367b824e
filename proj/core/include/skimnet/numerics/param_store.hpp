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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "skimnet/numerics/tensor.hpp"

namespace skimnet::numerics {

/// A trainable tensor and its gradient buffer (same shape).
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Named parameter collection. Param addresses are stable for the lifetime of
/// the store, so graphs and optimizers may hold Param pointers.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);

  Param& add(std::string name, Tensor value);
  Param& get(std::string_view name);
  const Param& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<std::string> names() const;
  std::vector<Param*> params();
  /// Params whose names start with prefix, in name order.
  std::vector<Param*> params_with_prefix(std::string_view prefix);
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t num_values() const;

  void zero_grad();

  /// FNV-1a hash of names, shapes and value bytes.
  std::uint64_t fingerprint() const;
  std::uint64_t fingerprint(std::string_view prefix) const;

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::map<std::string, std::unique_ptr<Param>, std::less<>> params_;
};

// "SKNP" container: magic, u32 version, u64 entry count, then per entry
// u32 name length + UTF-8 name, u32 rank + u64 dims, little-endian f64 data.
inline constexpr std::uint32_t kParamStoreVersion = 1;

void write_params(std::ostream& out, const ParamStore& store);
ParamStore read_params(std::istream& in);
void save_params(const ParamStore& store, const std::filesystem::path& path);
ParamStore load_params(const std::filesystem::path& path);

}  // namespace skimnet::numerics
