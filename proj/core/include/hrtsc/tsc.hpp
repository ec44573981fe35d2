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

#ifndef HRTSC_TSC_HPP
#define HRTSC_TSC_HPP

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hrtsc/hmm.hpp"

namespace hrtsc {

/// How the transition model takes part in prediction.
enum class CombineMode {
  /// Per frame, use the transition states when their best human-marginal
  /// likelihood beats the base mixture likelihood, else the base GMR.
  kGate,
  /// One GMR over base and transition states, jointly renormalized.
  kBlend,
};

std::string_view to_string(CombineMode mode);
CombineMode parse_combine_mode(std::string_view name);

/// Per-frame segmentation of one sequence under a base model.
struct SegmentLabels {
  std::vector<int> joint;         // argmax over the joint forward pass
  std::vector<int> human;         // argmax over the human-only forward pass
  std::vector<bool> mismatch;     // joint[t] != human[t]
  std::vector<bool> transition;   // mismatch dilated by the window
};

SegmentLabels segment(const HmmModel& base, const Sequence& frames, Index window);

/// Marks every frame within `window` frames of a true entry, clipped to the
/// sequence.
std::vector<bool> dilate(const std::vector<bool>& mask, Index window);

struct TransitionStates {
  Matrix samples;                       // pooled masked frames, one per row
  std::vector<std::vector<bool>> masks; // per sequence
  std::vector<SegmentLabels> segments;  // per sequence
};

TransitionStates detect_transition_states(const HmmModel& base, std::span<const Sequence> demos,
                                          Index window);

/// Maximal runs of consecutive true entries in `mask`, as (start, length).
std::vector<std::pair<Index, Index>> masked_runs(const std::vector<bool>& mask);

struct TscOptions {
  Index transition_states = 3;
  Index window = 2;
  double reg_eps = 1e-2;
  int max_iter = 40;
  double tol = 1e-4;
  CombineMode mode = CombineMode::kGate;
};

/// Base HMM plus a second HMM trained on the frames where human-only and
/// joint segmentation disagree.
struct TscModel {
  HmmModel base;
  std::optional<HmmModel> transition;  // empty when fallback
  Index window = 2;
  CombineMode mode = CombineMode::kGate;
  bool fallback = true;
  /// Diagnostics from fitting.
  Index transition_samples = 0;
  std::vector<double> transition_loglik;
};

/// Transition HMM is skipped (fallback) when fewer than
/// transition_states * (D + 1) frames are flagged.
TscModel fit_tsc(const HmmModel& base, std::span<const Sequence> demos, const TscOptions& opts);

/// Robot dimensions predicted from human observations (T x |robot|).
Matrix predict(const TscModel& model, const Sequence& human_obs);

struct PredictionTrace {
  Matrix robot;                 // T x |robot|
  std::vector<bool> gated;      // frames that used the transition states
  Matrix responsibilities;      // T x (S + S_t) weights actually applied
};

/// `predict` with the per-frame weights exposed.
PredictionTrace predict_traced(const TscModel& model, const Sequence& human_obs);

}  // namespace hrtsc

#endif  // HRTSC_TSC_HPP
