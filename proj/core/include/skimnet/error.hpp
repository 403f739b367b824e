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

#include <stdexcept>
#include <string>
#include <string_view>

namespace skimnet {

/// Coarse error classes. The CLI maps each one to a distinct exit code and a
/// machine-readable category string.
enum class ErrorCategory {
  kDimension,
  kNumeric,
  kConfig,
  kMissingFile,
  kDimensionConflict,
  kInput,
  kValidation,
  kIo,
  kEvaluation,
};

std::string_view category_name(ErrorCategory category);
int category_exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message)
      : Error(ErrorCategory::kDimension, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorCategory::kNumeric, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCategory::kConfig, message) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& message)
      : Error(ErrorCategory::kInput, message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorCategory::kValidation, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCategory::kIo, message) {}
};

}  // namespace skimnet
