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

#ifndef HRTSC_HMM_HPP
#define HRTSC_HMM_HPP

#include <optional>
#include <span>
#include <vector>

#include "hrtsc/gaussian.hpp"

namespace hrtsc {

/// Which feature columns belong to the observed agent (human) and which to
/// the predicted agent (robot). `robot` may be empty for models that are
/// never used for regression.
struct DimensionSplit {
  IndexList human;
  IndexList robot;

  /// Throws DimensionError unless the two lists are sorted, disjoint and
  /// together cover 0..dim-1.
  void validate(Index dim) const;

  /// Split restricted to `dims` with indices renumbered to positions in `dims`.
  DimensionSplit restrict_to(std::span<const Index> dims) const;

  static DimensionSplit all_human(Index dim) { return {iota_indices(dim), {}}; }
};

/// One observation sequence: rows are frames, columns are feature dimensions.
using Sequence = Matrix;

/// Gaussian-emission hidden Markov model.
struct HmmModel {
  Vector priors;        // S
  Matrix transitions;   // S x S, row-stochastic, (from, to)
  std::vector<GaussianState> emissions;
  DimensionSplit split;

  Index num_states() const { return priors.size(); }
  Index dim() const { return emissions.empty() ? 0 : emissions.front().dim(); }

  /// Checks shapes, the simplex constraints (1e-9) and the split.
  void validate() const;
};

/// Output of the scaled forward recursion.
struct ForwardResult {
  Matrix h;          // T x S, h(t, i) = P(state i at t | o_1..o_t)
  Matrix log_alpha;  // T x S, log of the unnormalized forward variable
  double log_likelihood = 0.0;
};

/// Model initialized by cutting every sequence into S contiguous bins of
/// near-equal length (the first T % S bins are one frame longer) and fitting
/// each emission to its pooled bin. Priors and transition rows start uniform.
HmmModel init_temporal_bins(std::span<const Sequence> demos, Index num_states, double reg_eps,
                            DimensionSplit split);
/// As above with every column treated as observed.
HmmModel init_temporal_bins(std::span<const Sequence> demos, Index num_states, double reg_eps);

/// Lengths of the temporal bins used by init_temporal_bins.
std::vector<Index> temporal_bin_lengths(Index length, Index num_states);

/// Normalized forward recursion over the marginal model on `dims`.
/// `obs` either has model.dim() columns (the `dims` columns are used) or
/// exactly dims.size() columns (already restricted).
ForwardResult forward(const HmmModel& model, const Sequence& obs, std::span<const Index> dims);
ForwardResult forward(const HmmModel& model, const Sequence& obs);

struct BaumWelchOptions {
  int max_iter = 40;
  double tol = 1e-4;
  double reg_eps = 1e-2;
};

struct BaumWelchResult {
  HmmModel model;
  /// Total log-likelihood of the batch, one entry per accepted model: the
  /// initial model first, then the model after each accepted EM iteration.
  std::vector<double> loglik_history;
  int iterations = 0;
  bool converged = false;
  /// Number of times a state with vanishing responsibility had its emission
  /// reset to the global regularized covariance.
  int rescued_states = 0;
  /// Log-likelihood of an EM step that was rejected for lowering the
  /// likelihood; set only when that happened, in which case `model` is the
  /// last accepted one.
  std::optional<double> rejected_loglik;
};

/// Expectation-maximization over a batch of sequences, all weighted equally.
BaumWelchResult baum_welch(const HmmModel& init, std::span<const Sequence> demos,
                           const BaumWelchOptions& opts = {});

/// Same priors and transitions, emissions marginalized onto `dims`.
HmmModel marginal_model(const HmmModel& model, std::span<const Index> dims);

/// Per-frame GMR prediction of the robot dimensions from the human ones.
/// `human_obs` has split.human.size() columns; returns T x split.robot.size().
Matrix gmr_predict(const HmmModel& model, const Sequence& human_obs);

/// Filtered segmentation: argmax_i h(t, i) of the forward pass per frame,
/// lowest index on ties.
std::vector<int> viterbi_labels(const HmmModel& model, const Sequence& obs,
                                    std::span<const Index> dims);
std::vector<int> argmax_rows(const Matrix& h);

}  // namespace hrtsc

#endif  // HRTSC_HMM_HPP
