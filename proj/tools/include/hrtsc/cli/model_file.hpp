// Copyright 2026 The hrtsc Authors
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

#ifndef HRTSC_CLI_MODEL_FILE_HPP
#define HRTSC_CLI_MODEL_FILE_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hrtsc/tsc.hpp"

namespace hrtsc::cli {

inline constexpr int kModelFormatVersion = 1;

enum class ModelKind { kHmm, kTsc };

std::string_view to_string(ModelKind kind);

/// What a model file holds. An `hmm` file carries only the base model and
/// loads as a TscModel in fallback, so both kinds predict through one path.
struct ModelFile {
  ModelKind kind = ModelKind::kTsc;
  TscModel model;
};

/// Raised for malformed or unsupported model files.
class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json hmm_to_json(const HmmModel& model);
HmmModel hmm_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelFile& file);
ModelFile from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace hrtsc::cli

#endif  // HRTSC_CLI_MODEL_FILE_HPP
