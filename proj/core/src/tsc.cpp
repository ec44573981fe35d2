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

#include "hrtsc/tsc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hrtsc/errors.hpp"

namespace hrtsc {
namespace {

std::vector<GaussianDensity> human_densities(const HmmModel& m) {
  std::vector<GaussianDensity> out;
  out.reserve(m.emissions.size());
  for (const auto& g : m.emissions) out.emplace_back(marginalize(g, m.split.human));
  return out;
}

std::vector<GaussianConditioner> human_conditioners(const HmmModel& m) {
  std::vector<GaussianConditioner> out;
  out.reserve(m.emissions.size());
  for (const auto& g : m.emissions) out.emplace_back(g, m.split.human);
  return out;
}

double log_sum_exp(const Vector& a) {
  const double m = a.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((a.array() - m).exp().sum());
}

void check_human_obs(const HmmModel& base, const Sequence& human_obs) {
  if (human_obs.cols() != static_cast<Index>(base.split.human.size())) {
    throw DimensionError("human observation has " + std::to_string(human_obs.cols()) +
                         " columns, model expects " + std::to_string(base.split.human.size()));
  }
}

}  // namespace

std::string_view to_string(CombineMode mode) {
  return mode == CombineMode::kGate ? "gate" : "blend";
}

CombineMode parse_combine_mode(std::string_view name) {
  if (name == "gate") return CombineMode::kGate;
  if (name == "blend") return CombineMode::kBlend;
  throw std::invalid_argument("unknown combination mode '" + std::string(name) + "'");
}

std::vector<bool> dilate(const std::vector<bool>& mask, Index window) {
  if (window < 0) throw std::invalid_argument("window must be non-negative");
  const auto n = static_cast<Index>(mask.size());
  std::vector<bool> out(mask.size(), false);
  for (Index t = 0; t < n; ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    const Index lo = std::max<Index>(0, t - window);
    const Index hi = std::min<Index>(n - 1, t + window);
    for (Index k = lo; k <= hi; ++k) out[static_cast<std::size_t>(k)] = true;
  }
  return out;
}

SegmentLabels segment(const HmmModel& base, const Sequence& frames, Index window) {
  if (frames.cols() != base.dim()) {
    throw DimensionError("sequence has " + std::to_string(frames.cols()) +
                         " columns, model has dimension " + std::to_string(base.dim()));
  }
  SegmentLabels out;
  out.joint = viterbi_labels(base, frames, iota_indices(base.dim()));
  out.human = viterbi_labels(base, frames, base.split.human);
  out.mismatch.resize(out.joint.size());
  for (std::size_t t = 0; t < out.joint.size(); ++t) out.mismatch[t] = out.joint[t] != out.human[t];
  out.transition = dilate(out.mismatch, window);
  return out;
}

TransitionStates detect_transition_states(const HmmModel& base, std::span<const Sequence> demos,
                                          Index window) {
  base.validate();
  TransitionStates out;
  Index count = 0;
  for (const auto& frames : demos) {
    out.segments.push_back(segment(base, frames, window));
    out.masks.push_back(out.segments.back().transition);
    count += std::count(out.masks.back().begin(), out.masks.back().end(), true);
  }
  out.samples.resize(count, base.dim());
  Index row = 0;
  for (std::size_t d = 0; d < demos.size(); ++d) {
    for (std::size_t t = 0; t < out.masks[d].size(); ++t) {
      if (out.masks[d][t]) out.samples.row(row++) = demos[d].row(static_cast<Index>(t));
    }
  }
  return out;
}

std::vector<std::pair<Index, Index>> masked_runs(const std::vector<bool>& mask) {
  std::vector<std::pair<Index, Index>> runs;
  const auto n = static_cast<Index>(mask.size());
  for (Index t = 0; t < n;) {
    if (!mask[static_cast<std::size_t>(t)]) {
      ++t;
      continue;
    }
    Index end = t;
    while (end < n && mask[static_cast<std::size_t>(end)]) ++end;
    runs.emplace_back(t, end - t);
    t = end;
  }
  return runs;
}

TscModel fit_tsc(const HmmModel& base, std::span<const Sequence> demos, const TscOptions& opts) {
  if (opts.transition_states < 1) throw std::invalid_argument("transition_states must be >= 1");
  if (opts.window < 0) throw std::invalid_argument("window must be non-negative");

  TscModel model;
  model.base = base;
  model.window = opts.window;
  model.mode = opts.mode;
  model.fallback = true;

  const TransitionStates ts = detect_transition_states(base, demos, opts.window);
  model.transition_samples = ts.samples.rows();
  if (ts.samples.rows() < opts.transition_states * (base.dim() + 1)) return model;

  // EM sees every masked run as its own sequence. Initialization bins each
  // demonstration's masked frames in time order, so bin k collects the k-th
  // transition event of every demonstration.
  std::vector<Sequence> runs;
  std::vector<Sequence> per_demo;
  for (std::size_t d = 0; d < demos.size(); ++d) {
    Index masked = 0;
    for (const auto& [start, len] : masked_runs(ts.masks[d])) {
      runs.push_back(demos[d].middleRows(start, len));
      masked += len;
    }
    if (masked < opts.transition_states) continue;
    Sequence frames(masked, base.dim());
    Index row = 0;
    for (std::size_t t = 0; t < ts.masks[d].size(); ++t) {
      if (ts.masks[d][t]) frames.row(row++) = demos[d].row(static_cast<Index>(t));
    }
    per_demo.push_back(std::move(frames));
  }
  if (per_demo.empty()) return model;

  const HmmModel init =
      init_temporal_bins(per_demo, opts.transition_states, opts.reg_eps, base.split);
  BaumWelchResult trained =
      baum_welch(init, runs, {.max_iter = opts.max_iter, .tol = opts.tol, .reg_eps = opts.reg_eps});
  model.transition = std::move(trained.model);
  model.transition_loglik = std::move(trained.loglik_history);
  model.fallback = false;
  return model;
}

PredictionTrace predict_traced(const TscModel& model, const Sequence& human_obs) {
  const HmmModel& base = model.base;
  check_human_obs(base, human_obs);
  const Index T = human_obs.rows();
  const Index S = base.num_states();

  PredictionTrace out;
  out.robot = gmr_predict(base, human_obs);
  out.gated.assign(static_cast<std::size_t>(T), false);
  const ForwardResult fwd = forward(base, human_obs, base.split.human);

  if (model.fallback || !model.transition) {
    out.responsibilities = fwd.h;
    return out;
  }

  const HmmModel& trans = *model.transition;
  const Index St = trans.num_states();
  if (trans.split.human != base.split.human || trans.split.robot != base.split.robot) {
    throw DimensionError("transition model split differs from base model split");
  }
  out.responsibilities = Matrix::Zero(T, S + St);
  out.responsibilities.leftCols(S) = fwd.h;

  const auto base_dens = human_densities(base);
  const auto trans_dens = human_densities(trans);
  const auto base_cond = human_conditioners(base);
  const auto trans_cond = human_conditioners(trans);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  Vector log_base(S);
  Vector log_trans(St);
  for (Index t = 0; t < T; ++t) {
    const Vector x = human_obs.row(t).transpose();
    for (Index i = 0; i < S; ++i) {
      const double h = fwd.h(t, i);
      log_base(i) = (h > 0.0 ? std::log(h) : kNegInf) +
                    base_dens[static_cast<std::size_t>(i)].log_density(x);
    }
    for (Index k = 0; k < St; ++k) {
      log_trans(k) = trans_dens[static_cast<std::size_t>(k)].log_density(x);
    }

    Vector w;
    if (model.mode == CombineMode::kGate) {
      if (!(log_trans.maxCoeff() > log_sum_exp(log_base))) continue;
      w = Vector::Zero(S + St);
      w.tail(St) = (log_trans.array() - log_sum_exp(log_trans)).exp();
      out.gated[static_cast<std::size_t>(t)] = true;
    } else {
      Vector all(S + St);
      all.head(S) = log_base;
      all.tail(St) = log_trans.array() - std::log(static_cast<double>(St));
      w = (all.array() - log_sum_exp(all)).exp();
    }
    out.responsibilities.row(t) = w.transpose();
    Vector y = Vector::Zero(out.robot.cols());
    for (Index i = 0; i < S; ++i) {
      if (w(i) > 0.0) y += w(i) * base_cond[static_cast<std::size_t>(i)].conditional_mean(x);
    }
    for (Index k = 0; k < St; ++k) {
      if (w(S + k) > 0.0) {
        y += w(S + k) * trans_cond[static_cast<std::size_t>(k)].conditional_mean(x);
      }
    }
    out.robot.row(t) = y.transpose();
  }
  return out;
}

Matrix predict(const TscModel& model, const Sequence& human_obs) {
  return predict_traced(model, human_obs).robot;
}

}  // namespace hrtsc
