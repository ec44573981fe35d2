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

#ifndef HRTSC_EVAL_HPP
#define HRTSC_EVAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrtsc/data.hpp"
#include "hrtsc/tsc.hpp"

namespace hrtsc {

struct ExperimentConfig {
  Index base_states = 4;
  Index tsc_states = 3;
  double reg_eps = 1e-2;
  int max_iter = 40;
  double tol = 1e-4;
  std::size_t batch_size = 15;
  std::size_t n_seeds = 100;
  Index window = 2;
  CombineMode mode = CombineMode::kGate;
  /// Worker threads for run_experiment; 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws std::invalid_argument on non-positive counts or tolerances.
  void validate() const;
};

/// Mean squared error over frames and the three robot position dimensions,
/// with coordinates converted to centimeters first. Both arguments are T x 3
/// in meters.
double mse_cm(const Matrix& predicted_pos, const Matrix& truth_pos);
/// Same metric on two full feature sequences.
double mse(const FeatureSequence& pred, const FeatureSequence& truth);

struct RunResult {
  std::uint64_t seed = 0;
  double hmm_mse = 0.0;
  double tsc_mse = 0.0;
  bool fallback = false;
  double seconds = 0.0;
};

/// Trains on a seeded batch and scores both predictors on the held-out
/// demonstrations. Throws TrainingError (message carries the seed).
RunResult run_single(const Dataset& ds, const ExperimentConfig& cfg, std::uint64_t seed);

struct InteractionReport {
  std::string interaction;
  double hmm_mse_mean = 0.0;
  double hmm_mse_std = 0.0;
  double tsc_mse_mean = 0.0;
  double tsc_mse_std = 0.0;
  std::size_t n_runs = 0;
  std::size_t n_failed = 0;
  std::size_t n_fallback = 0;
  double seconds_per_run = 0.0;
  std::vector<RunResult> runs;
  std::vector<std::string> failures;
};

struct ExperimentReport {
  std::vector<InteractionReport> interactions;
};

/// Seeds 0..n_seeds-1; failed seeds are counted and left out of the moments.
InteractionReport run_experiment(const Dataset& ds, const ExperimentConfig& cfg);

/// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

/// One decimal, halves rounded away from zero.
std::string format_one_decimal(double value);

/// Aligned plain-text table, one row per interaction.
std::string render_table(const ExperimentReport& report);
/// `interaction,predictor,mse_mean,mse_std,n_runs`; values at full precision.
std::string render_csv(const ExperimentReport& report);

}  // namespace hrtsc

#endif  // HRTSC_EVAL_HPP
