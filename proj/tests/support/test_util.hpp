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

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "skimnet/numerics/tensor.hpp"
#include "skimnet/rng.hpp"

namespace skimnet::testing {

inline numerics::Tensor random_tensor(Rng& rng, numerics::Shape shape, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  numerics::Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

inline numerics::Tensor random_distribution(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  numerics::Tensor t({n});
  double s = 0.0;
  for (double& v : t.values()) s += (v = u(rng));
  for (double& v : t.values()) v /= s;
  return t;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("skimnet_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace skimnet::testing
