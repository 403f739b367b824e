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
#include <optional>
#include <string>

#include "skimnet/models/dims.hpp"
#include "skimnet/models/skimmer.hpp"
#include "skimnet/models/student.hpp"
#include "skimnet/models/teacher.hpp"

namespace skimnet::models {

// A checkpoint is a ParamStore container (<stem>.sknp) plus a JSON sidecar
// (<stem>.json) with {"kind", "dims", ...}.

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

void save_teacher(const Teacher& teacher, const std::filesystem::path& path);
void save_student(const Student& student, const std::filesystem::path& path);
void save_skimmer(const Skimmer& skimmer, const std::filesystem::path& path);

/// When `expected` is given, differing architecture is a dimension_conflict error.
Teacher load_teacher(const std::filesystem::path& path, const std::optional<ModelDims>& expected = {});
Student load_student(const std::filesystem::path& path, const std::optional<ModelDims>& expected = {});
/// The student must be the one the skimmer was trained with (same Psi).
Skimmer load_skimmer(const std::filesystem::path& path, const Student& student);

}  // namespace skimnet::models
