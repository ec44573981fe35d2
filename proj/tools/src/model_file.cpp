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

#include "hrtsc/cli/model_file.hpp"

#include <fstream>
#include <ios>

namespace hrtsc::cli {

using nlohmann::json;

namespace {

// Row-major flat array of a square matrix.
json flat(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Matrix square_from_flat(const json& j, Index n, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n * n) {
    throw ModelFormatError(std::string(what) + ": expected " + std::to_string(n * n) + " values");
  }
  Matrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) m(r, c) = j.at(static_cast<std::size_t>(r * n + c)).get<double>();
  }
  return m;
}

Vector vector_from(const json& j, Index n, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n) {
    throw ModelFormatError(std::string(what) + ": expected " + std::to_string(n) + " values");
  }
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::kHmm ? "hmm" : "tsc"; }

json hmm_to_json(const HmmModel& model) {
  json means = json::array();
  json covs = json::array();
  for (const auto& g : model.emissions) {
    means.push_back(std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size()));
    covs.push_back(flat(g.cov));
  }
  json j;
  j["num_states"] = model.num_states();
  j["dim"] = model.dim();
  j["priors"] = std::vector<double>(model.priors.data(), model.priors.data() + model.priors.size());
  j["transitions"] = flat(model.transitions);
  j["means"] = std::move(means);
  j["covariances"] = std::move(covs);
  j["split"] = {{"human", model.split.human}, {"robot", model.split.robot}};
  return j;
}

HmmModel hmm_from_json(const json& j) {
  try {
    const auto s = j.at("num_states").get<Index>();
    const auto d = j.at("dim").get<Index>();
    if (s < 1 || d < 1) throw ModelFormatError("num_states and dim must be positive");
    HmmModel m;
    m.priors = vector_from(j.at("priors"), s, "priors");
    m.transitions = square_from_flat(j.at("transitions"), s, "transitions");
    const auto& means = j.at("means");
    const auto& covs = j.at("covariances");
    if (!means.is_array() || !covs.is_array() || static_cast<Index>(means.size()) != s ||
        static_cast<Index>(covs.size()) != s) {
      throw ModelFormatError("means/covariances: expected one entry per state");
    }
    for (Index i = 0; i < s; ++i) {
      const auto k = static_cast<std::size_t>(i);
      m.emissions.push_back({vector_from(means[k], d, "mean"),
                             square_from_flat(covs[k], d, "covariance")});
    }
    m.split.human = j.at("split").at("human").get<IndexList>();
    m.split.robot = j.at("split").at("robot").get<IndexList>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed HMM: ") + e.what());
  }
}

json to_json(const ModelFile& file) {
  const TscModel& m = file.model;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["model_kind"] = std::string(to_string(file.kind));
  j["base"] = hmm_to_json(m.base);
  if (file.kind == ModelKind::kTsc) {
    j["transition"] = m.transition ? hmm_to_json(*m.transition) : json(nullptr);
    j["window"] = m.window;
    j["mode"] = std::string(to_string(m.mode));
    j["fallback"] = m.fallback;
    j["transition_samples"] = m.transition_samples;
  }
  return j;
}

ModelFile from_json(const json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFormatError("unsupported model format_version " + std::to_string(version) +
                             " (this build reads version " +
                             std::to_string(kModelFormatVersion) + ")");
    }
    ModelFile out;
    const auto kind = j.at("model_kind").get<std::string>();
    out.model.base = hmm_from_json(j.at("base"));
    if (kind == "hmm") {
      out.kind = ModelKind::kHmm;
      out.model.fallback = true;
      return out;
    }
    if (kind != "tsc") throw ModelFormatError("unknown model_kind '" + kind + "'");
    out.kind = ModelKind::kTsc;
    out.model.window = j.at("window").get<Index>();
    if (out.model.window < 0) throw ModelFormatError("window must be non-negative");
    out.model.mode = parse_combine_mode(j.at("mode").get<std::string>());
    out.model.fallback = j.at("fallback").get<bool>();
    out.model.transition_samples = j.value("transition_samples", Index{0});
    const auto& tr = j.at("transition");
    if (!out.model.fallback) {
      if (tr.is_null()) throw ModelFormatError("non-fallback model without transition states");
      out.model.transition = hmm_from_json(tr);
      if (out.model.transition->dim() != out.model.base.dim()) {
        throw ModelFormatError("transition and base models differ in dimension");
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
  out << to_json(file).dump(1) << '\n';
  if (!out) throw std::ios_base::failure("write to '" + path.string() + "' failed");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path.string() + "' for reading");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ModelFormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

}  // namespace hrtsc::cli
