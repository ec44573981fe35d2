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

#include "hrtsc/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>
#include <thread>

#include "hrtsc/errors.hpp"

namespace hrtsc {
namespace {

constexpr double kMetersToCm = 100.0;

std::string full_precision(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (base_states < 1) throw std::invalid_argument("base_states must be >= 1");
  if (tsc_states < 1) throw std::invalid_argument("tsc_states must be >= 1");
  if (!(reg_eps >= 0.0)) throw std::invalid_argument("reg_eps must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
  if (window < 0) throw std::invalid_argument("window must be >= 0");
}

double mse_cm(const Matrix& predicted_pos, const Matrix& truth_pos) {
  if (predicted_pos.rows() != truth_pos.rows() || predicted_pos.cols() != truth_pos.cols()) {
    throw DimensionError("mse: prediction is " + std::to_string(predicted_pos.rows()) + "x" +
                         std::to_string(predicted_pos.cols()) + ", ground truth is " +
                         std::to_string(truth_pos.rows()) + "x" + std::to_string(truth_pos.cols()));
  }
  if (truth_pos.cols() != 3) throw DimensionError("mse: expected 3 position columns");
  if (truth_pos.size() == 0) throw DimensionError("mse: empty trajectory");
  return ((predicted_pos - truth_pos) * kMetersToCm).squaredNorm() /
         static_cast<double>(truth_pos.size());
}

double mse(const FeatureSequence& pred, const FeatureSequence& truth) {
  if (pred.frames.cols() != kFeatureDim || truth.frames.cols() != kFeatureDim) {
    throw DimensionError("mse: both sequences must use the 12-column feature layout");
  }
  return mse_cm(pred.robot_positions(), truth.robot_positions());
}

RunResult run_single(const Dataset& ds, const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.seed = seed;
  try {
    const BatchSplit split = sample_batch(ds, cfg.batch_size, seed);
    if (split.test.demos.empty()) {
      throw DimensionError("no held-out demonstrations: dataset has " +
                           std::to_string(ds.demos.size()) + " demos, batch size is " +
                           std::to_string(cfg.batch_size));
    }
    const std::vector<Sequence> train = build_feature_frames(split.train);
    const HmmModel init =
        init_temporal_bins(train, cfg.base_states, cfg.reg_eps, feature_split());
    const BaumWelchResult bw =
        baum_welch(init, train, {.max_iter = cfg.max_iter, .tol = cfg.tol, .reg_eps = cfg.reg_eps});
    const TscModel tsc = fit_tsc(bw.model, train,
                                 {.transition_states = cfg.tsc_states,
                                  .window = cfg.window,
                                  .reg_eps = cfg.reg_eps,
                                  .max_iter = cfg.max_iter,
                                  .tol = cfg.tol,
                                  .mode = cfg.mode});
    res.fallback = tsc.fallback;

    double hmm_sum = 0.0;
    double tsc_sum = 0.0;
    for (const auto& demo : split.test.demos) {
      const FeatureSequence fs = build_features(demo);
      const Matrix human = fs.human();
      const Matrix truth = fs.robot_positions();
      hmm_sum += mse_cm(gmr_predict(bw.model, human).leftCols(3), truth);
      tsc_sum += mse_cm(predict(tsc, human).leftCols(3), truth);
    }
    const auto n = static_cast<double>(split.test.demos.size());
    res.hmm_mse = hmm_sum / n;
    res.tsc_mse = tsc_sum / n;
  } catch (const TrainingError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrainingError("seed " + std::to_string(seed) + ": " + e.what());
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

InteractionReport run_experiment(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_seeds;
  std::vector<std::optional<RunResult>> results(n);
  std::vector<std::string> errors(n);

  unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  auto work = [&](unsigned w) {
    for (std::size_t s = w; s < n; s += workers) {
      try {
        results[s] = run_single(ds, cfg, s);
      } catch (const std::exception& e) {
        errors[s] = e.what();
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, work, w));
    for (auto& j : jobs) j.get();
  }

  InteractionReport rep;
  rep.interaction = ds.name;
  std::vector<double> hmm;
  std::vector<double> tsc;
  double seconds = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!results[s]) {
      rep.failures.push_back(errors[s]);
      continue;
    }
    rep.runs.push_back(*results[s]);
    hmm.push_back(results[s]->hmm_mse);
    tsc.push_back(results[s]->tsc_mse);
    seconds += results[s]->seconds;
    if (results[s]->fallback) ++rep.n_fallback;
  }
  rep.n_runs = rep.runs.size();
  rep.n_failed = rep.failures.size();
  if (rep.n_runs == 0) {
    throw TrainingError("every seed failed; first error: " + rep.failures.front());
  }
  std::tie(rep.hmm_mse_mean, rep.hmm_mse_std) = mean_std(hmm);
  std::tie(rep.tsc_mse_mean, rep.tsc_mse_std) = mean_std(tsc);
  rep.seconds_per_run = seconds / static_cast<double>(rep.n_runs);
  return rep;
}

std::string format_one_decimal(double value) {
  double r = std::round(value * 10.0) / 10.0;
  if (r == 0.0) r = 0.0;  // no "-0.0"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", r);
  return buf;
}

std::string render_table(const ExperimentReport& report) {
  std::size_t name_w = 6;  // "Action"
  for (const auto& r : report.interactions) name_w = std::max(name_w, r.interaction.size());
  std::vector<std::string> hmm_cells;
  std::vector<std::string> tsc_cells;
  std::size_t hmm_w = 3;
  std::size_t tsc_w = 7;
  for (const auto& r : report.interactions) {
    hmm_cells.push_back(format_one_decimal(r.hmm_mse_mean) + " +- " +
                        format_one_decimal(r.hmm_mse_std));
    tsc_cells.push_back(format_one_decimal(r.tsc_mse_mean) + " +- " +
                        format_one_decimal(r.tsc_mse_std));
    hmm_w = std::max(hmm_w, hmm_cells.back().size());
    tsc_w = std::max(tsc_w, tsc_cells.back().size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  std::ostringstream out;
  out << pad("Action", name_w) << " | " << pad("HMM", hmm_w) << " | " << pad("TSC-HMM", tsc_w)
      << " | runs\n";
  out << std::string(name_w, '-') << "-+-" << std::string(hmm_w, '-') << "-+-"
      << std::string(tsc_w, '-') << "-+-----\n";
  for (std::size_t i = 0; i < report.interactions.size(); ++i) {
    const auto& r = report.interactions[i];
    out << pad(r.interaction, name_w) << " | " << pad(hmm_cells[i], hmm_w) << " | "
        << pad(tsc_cells[i], tsc_w) << " | " << r.n_runs;
    if (r.n_failed > 0) out << " (" << r.n_failed << " failed)";
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "interaction,predictor,mse_mean,mse_std,n_runs\n";
  for (const auto& r : report.interactions) {
    out << r.interaction << ",HMM," << full_precision(r.hmm_mse_mean) << ','
        << full_precision(r.hmm_mse_std) << ',' << r.n_runs << '\n';
    out << r.interaction << ",TSC-HMM," << full_precision(r.tsc_mse_mean) << ','
        << full_precision(r.tsc_mse_std) << ',' << r.n_runs << '\n';
  }
  return out.str();
}

}  // namespace hrtsc
