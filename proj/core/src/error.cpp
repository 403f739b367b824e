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

#include "skimnet/error.hpp"

namespace skimnet {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kDimension: return "dimension_error";
    case ErrorCategory::kNumeric: return "numeric_error";
    case ErrorCategory::kConfig: return "config_error";
    case ErrorCategory::kMissingFile: return "missing_file";
    case ErrorCategory::kDimensionConflict: return "dimension_conflict";
    case ErrorCategory::kInput: return "input_error";
    case ErrorCategory::kValidation: return "validation_error";
    case ErrorCategory::kIo: return "io_error";
    case ErrorCategory::kEvaluation: return "evaluation_error";
  }
  return "unknown_error";
}

int category_exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return 2;
    case ErrorCategory::kMissingFile: return 3;
    case ErrorCategory::kDimensionConflict: return 4;
    case ErrorCategory::kNumeric: return 5;
    case ErrorCategory::kInput: return 6;
    case ErrorCategory::kDimension: return 7;
    case ErrorCategory::kValidation: return 8;
    case ErrorCategory::kIo: return 9;
    case ErrorCategory::kEvaluation: return 10;
  }
  return 1;
}

}  // namespace skimnet
