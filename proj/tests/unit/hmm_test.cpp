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

#include "hrtsc/hmm.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hrtsc/errors.hpp"
#include "models.hpp"
#include "oracles.hpp"

namespace hrtsc {
namespace {

using namespace fixture;

TEST(TemporalBins, Lengths) {
  EXPECT_EQ(temporal_bin_lengths(8, 4), (std::vector<Index>{2, 2, 2, 2}));
  EXPECT_EQ(temporal_bin_lengths(10, 4), (std::vector<Index>{3, 3, 2, 2}));
  EXPECT_EQ(temporal_bin_lengths(5, 1), (std::vector<Index>{5}));
  EXPECT_THROW(temporal_bin_lengths(3, 4), DimensionError);
}

TEST(TemporalBins, EmissionMeansAverageTheirBins) {
  Sequence s(8, 2);
  for (Index t = 0; t < 8; ++t) s.row(t) << static_cast<double>(t), static_cast<double>(t * t);
  const std::vector<Sequence> demos{s};
  const HmmModel m = init_temporal_bins(demos, 4, 1e-2);
  ASSERT_EQ(m.num_states(), 4);
  EXPECT_NEAR(m.emissions[0].mean(0), 0.5, 1e-15);
  EXPECT_NEAR(m.emissions[0].mean(1), 0.5, 1e-15);
  EXPECT_NEAR(m.emissions[3].mean(0), 6.5, 1e-15);
  // Two samples 0 and 1: sample variance 0.5, plus eps.
  EXPECT_NEAR(m.emissions[0].cov(0, 0), 0.5 + 1e-2, 1e-15);
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(m.priors(i), 0.25, 1e-15);
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(m.transitions(i, j), 0.25, 1e-15);
  }
}

TEST(TemporalBins, RecoverPiecewiseConstantPhases) {
  const double levels[3] = {-1.0, 2.0, 0.5};
  const double sigma = 0.05;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Sequence> demos;
  for (Index len : {30, 45}) {
    Sequence s(len, 2);
    const auto bins = temporal_bin_lengths(len, 3);
    Index t = 0;
    for (int p = 0; p < 3; ++p) {
      for (Index k = 0; k < bins[static_cast<std::size_t>(p)]; ++k, ++t) {
        s.row(t) << levels[p] + noise(rng), -levels[p] + noise(rng);
      }
    }
    demos.push_back(s);
  }
  const HmmModel m = init_temporal_bins(demos, 3, 1e-3);
  for (int p = 0; p < 3; ++p) {
    EXPECT_NEAR(m.emissions[static_cast<std::size_t>(p)].mean(0), levels[p], sigma);
    EXPECT_NEAR(m.emissions[static_cast<std::size_t>(p)].mean(1), -levels[p], sigma);
  }
}

TEST(TemporalBins, Errors) {
  const std::vector<Sequence> none;
  EXPECT_THROW(init_temporal_bins(none, 2, 1e-2), DimensionError);
  const std::vector<Sequence> short_demo{Sequence::Zero(3, 1)};
  EXPECT_THROW(init_temporal_bins(short_demo, 4, 1e-2), DimensionError);
  const std::vector<Sequence> mixed{Sequence::Zero(5, 1), Sequence::Zero(5, 2)};
  EXPECT_THROW(init_temporal_bins(mixed, 2, 1e-2), DimensionError);
}

TEST(Forward, SingleStateIsCertain) {
  HmmModel m;
  m.priors = Vector::Ones(1);
  m.transitions = Matrix::Ones(1, 1);
  m.emissions = {scalar(0.0, 1.0)};
  m.split = DimensionSplit::all_human(1);
  const auto r = forward(m, column({0.3, -2.0, 5.0}));
  for (Index t = 0; t < 3; ++t) EXPECT_EQ(r.h(t, 0), 1.0);
}

TEST(Forward, HandEvaluatedFirstStep) {
  const auto r = forward(hand_model(), column({0.0}));
  EXPECT_NEAR(std::exp(r.log_alpha(0, 0)), 0.5 * 0.398942280401433, 1e-6);
  EXPECT_NEAR(std::exp(r.log_alpha(0, 1)), 0.5 * 0.004431848411938, 1e-6);
  EXPECT_NEAR(r.h(0, 0), 0.98902, 1e-5);
  EXPECT_NEAR(r.h(0, 1), 0.01098, 1e-5);
}

TEST(Forward, SecondStepMatchesPathEnumeration) {
  const HmmModel m = hand_model();
  const Sequence obs = column({0.0, 3.0});
  const auto r = forward(m, obs);
  const Matrix lb = log_emissions(m, obs);
  const Vector h = oracle::path_sum_filter(m.priors, m.transitions, lb, 1);
  EXPECT_NEAR(r.h(1, 0), h(0), 1e-12);
  EXPECT_NEAR(r.h(1, 1), h(1), 1e-12);
  // 30-digit hand recursion.
  EXPECT_NEAR(r.h(1, 0), 0.0834143828665463870642999253955491, 1e-12);
  EXPECT_NEAR(r.log_likelihood, -4.65121666278812262578127405364, 1e-12);
}

TEST(Forward, LikelihoodMatchesPathSumOnRandomModels) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const Index s = 1 + trial % 3;
    const Index len = 1 + trial % 7;
    const HmmModel m = random_model(s, 2, rng);
    const Sequence obs = sample(m, len, rng);
    const auto r = forward(m, obs);
    const Matrix lb = log_emissions(m, obs);
    EXPECT_NEAR(r.log_likelihood, oracle::path_sum_loglik(m.priors, m.transitions, lb), 1e-8);
    const Vector h = oracle::path_sum_filter(m.priors, m.transitions, lb, len - 1);
    for (Index i = 0; i < s; ++i) EXPECT_NEAR(r.h(len - 1, i), h(i), 1e-9);
  }
}

TEST(Forward, RowsAreNormalized) {
  std::mt19937_64 rng(7);
  const HmmModel m = random_model(4, 5, rng);
  const Sequence obs = sample(m, 200, rng);
  const auto r = forward(m, obs);
  for (Index t = 0; t < obs.rows(); ++t) {
    EXPECT_NEAR(r.h.row(t).sum(), 1.0, 1e-9);
    EXPECT_GE(r.h.row(t).minCoeff(), 0.0);
    EXPECT_LE(r.h.row(t).maxCoeff(), 1.0);
  }
}

TEST(Forward, LongSequencesDoNotUnderflow) {
  std::mt19937_64 rng(1);
  const HmmModel m = random_model(3, 4, rng);
  const auto r = forward(m, sample(m, 5000, rng));
  EXPECT_TRUE(std::isfinite(r.log_likelihood));
  EXPECT_TRUE(r.log_alpha.allFinite());
}

TEST(Forward, Errors) {
  const HmmModel m = hand_model();
  EXPECT_THROW(forward(m, Sequence(0, 1)), DimensionError);
  EXPECT_THROW(forward(m, Sequence::Zero(3, 2)), DimensionError);
  EXPECT_THROW(forward(m, Sequence::Zero(3, 1), IndexList{1}), DimensionError);
  EXPECT_THROW(forward(m, column({0.0, std::numeric_limits<double>::infinity()})),
               NumericalError);
}

TEST(MarginalModel, AllDimsIsIdentity) {
  std::mt19937_64 rng(21);
  const HmmModel m = random_model(3, 4, rng);
  const HmmModel same = marginal_model(m, iota_indices(4));
  EXPECT_EQ(same.priors, m.priors);
  EXPECT_EQ(same.transitions, m.transitions);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(same.emissions[i].mean, m.emissions[i].mean);
    EXPECT_EQ(same.emissions[i].cov, m.emissions[i].cov);
  }
}

TEST(MarginalModel, HumanDimsMarginalizeEveryState) {
  std::mt19937_64 rng(22);
  const HmmModel m = random_model(3, 6, rng);
  const HmmModel h = marginal_model(m, m.split.human);
  ASSERT_EQ(h.dim(), 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto g = marginalize(m.emissions[i], m.split.human);
    EXPECT_EQ(h.emissions[i].mean, g.mean);
    EXPECT_EQ(h.emissions[i].cov, g.cov);
  }
  EXPECT_EQ(h.split.human, iota_indices(3));
  EXPECT_TRUE(h.split.robot.empty());
  EXPECT_THROW(marginal_model(m, IndexList{7}), DimensionError);
}

TEST(MarginalModel, ForwardEquivalence) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const HmmModel m = random_model(2 + trial % 3, 6, rng);
    const Sequence obs = sample(m, 40, rng);
    const auto joint_restricted = forward(m, obs, m.split.human);
    Sequence human(obs.rows(), 3);
    for (Index k = 0; k < 3; ++k) human.col(k) = obs.col(m.split.human[static_cast<std::size_t>(k)]);
    const auto marginal = forward(marginal_model(m, m.split.human), human);
    EXPECT_LT((joint_restricted.h - marginal.h).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(joint_restricted.log_likelihood, marginal.log_likelihood, 1e-10);
  }
}

TEST(BaumWelch, OneIterationOnOwnSamplesDoesNotDecrease) {
  std::mt19937_64 rng(31);
  const HmmModel m = random_model(3, 2, rng);
  std::vector<Sequence> demos;
  for (int k = 0; k < 10; ++k) demos.push_back(sample(m, 50, rng));
  const auto r = baum_welch(m, demos, {1, 0.0, 0.0});
  ASSERT_EQ(r.loglik_history.size(), 2u);
  EXPECT_GE(r.loglik_history[1], r.loglik_history[0] - 1e-8);
}

TEST(BaumWelch, HistoryIsMonotoneAndModelStaysStochastic) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    const HmmModel truth = random_model(3, 3, rng);
    std::vector<Sequence> demos;
    for (int k = 0; k < 8; ++k) demos.push_back(sample(truth, 60, rng));
    const auto r = baum_welch(init_temporal_bins(demos, 3, 1e-2), demos);
    for (std::size_t k = 1; k < r.loglik_history.size(); ++k) {
      EXPECT_GE(r.loglik_history[k], r.loglik_history[k - 1] - 1e-8);
    }
    EXPECT_LE(r.iterations, 40);
    EXPECT_NEAR(r.model.priors.sum(), 1.0, 1e-9);
    for (Index i = 0; i < 3; ++i) EXPECT_NEAR(r.model.transitions.row(i).sum(), 1.0, 1e-9);
    EXPECT_GE(r.model.transitions.minCoeff(), 0.0);
  }
}

TEST(BaumWelch, RecoversTwoStateMeans) {
  // Every sequence starts in state 0. From a stationary start the temporal
  // bins see the same mixture and EM sits at the symmetric saddle.
  HmmModel truth;
  truth.priors = Vector::Unit(2, 0);
  truth.transitions.resize(2, 2);
  truth.transitions << 0.95, 0.05, 0.05, 0.95;
  truth.emissions = {scalar(0.0, 1.0), scalar(5.0, 1.0)};
  truth.split = DimensionSplit::all_human(1);
  std::mt19937_64 rng(3);
  std::vector<Sequence> demos;
  for (int k = 0; k < 200; ++k) demos.push_back(sample(truth, 50, rng));
  const auto r = baum_welch(init_temporal_bins(demos, 2, 1e-2), demos);
  const double a = r.model.emissions[0].mean(0);
  const double b = r.model.emissions[1].mean(0);
  EXPECT_NEAR(std::min(a, b), 0.0, 0.2);
  EXPECT_NEAR(std::max(a, b), 5.0, 0.2);
}

TEST(BaumWelch, StarvedStateGetsTheGlobalCovariance) {
  HmmModel m = hand_model();
  m.emissions[1] = scalar(1e3, 1.0);
  const std::vector<Sequence> demos{column({0.1, -0.4, 0.3, 0.9}), column({-1.0, 0.2, 0.5})};
  const auto r = baum_welch(m, demos, {1, 0.0, 1e-2});
  EXPECT_GE(r.rescued_states, 1);
  // Population covariance of all seven frames plus eps.
  const double xs[] = {0.1, -0.4, 0.3, 0.9, -1.0, 0.2, 0.5};
  double mean = 0.0;
  for (double x : xs) mean += x / 7.0;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean) / 7.0;
  EXPECT_NEAR(r.model.emissions[1].cov(0, 0), var + 1e-2, 1e-12);
}

TEST(BaumWelch, Errors) {
  const HmmModel m = hand_model();
  const std::vector<Sequence> none;
  EXPECT_THROW(baum_welch(m, none), DimensionError);
  const std::vector<Sequence> wrong{Sequence::Zero(4, 2)};
  EXPECT_THROW(baum_welch(m, wrong), DimensionError);
  const std::vector<Sequence> ok{column({0.0, 1.0})};
  EXPECT_THROW(baum_welch(m, ok, {0, 1e-4, 1e-2}), DimensionError);
}

TEST(GmrPredict, IndependentSingleStateGivesRobotMean) {
  HmmModel m;
  m.priors = Vector::Ones(1);
  m.transitions = Matrix::Ones(1, 1);
  Matrix cov = Matrix::Identity(3, 3);
  cov(0, 1) = cov(1, 0) = 0.3;
  Vector mean(3);
  mean << 1.0, 2.0, -4.0;
  m.emissions = {{mean, cov}};
  m.split = {{0, 1}, {2}};
  Sequence human(5, 2);
  human.setRandom();
  const Matrix out = gmr_predict(m, human);
  ASSERT_EQ(out.rows(), 5);
  ASSERT_EQ(out.cols(), 1);
  for (Index t = 0; t < 5; ++t) EXPECT_EQ(out(t, 0), -4.0);
}

TEST(GmrPredict, BivariateConditionalMean) {
  HmmModel m;
  m.priors = Vector::Ones(1);
  m.transitions = Matrix::Ones(1, 1);
  Matrix cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  m.emissions = {{Vector::Zero(2), cov}};
  m.split = {{0}, {1}};
  EXPECT_NEAR(gmr_predict(m, column({1.0}))(0, 0), 0.5, 1e-15);
}

TEST(GmrPredict, SnapsToTheActiveState) {
  HmmModel m;
  m.priors = Vector::Constant(2, 0.5);
  m.transitions.resize(2, 2);
  m.transitions << 0.9, 0.1, 0.1, 0.9;
  Matrix cov(2, 2);
  cov << 0.1, 0.05, 0.05, 0.2;
  Vector a(2), b(2);
  a << 0.0, 1.0;
  b << 10.0, -3.0;
  m.emissions = {{a, cov}, {b, cov}};
  m.split = {{0}, {1}};
  const Sequence human = column({0.1, 0.2, 9.8, 10.1, 10.0});
  const Matrix out = gmr_predict(m, human);
  const auto r = forward(m, human, m.split.human);
  int checked = 0;
  for (Index t = 0; t < human.rows(); ++t) {
    for (std::size_t i = 0; i < 2; ++i) {
      if (r.h(t, static_cast<Index>(i)) > 0.999) {
        const auto c = condition(m.emissions[i], m.split.human, human.row(t).transpose());
        EXPECT_NEAR(out(t, 0), c.mean(0), 1e-3);
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 5);
}

TEST(GmrPredict, UncorrelatedRobotDimsBlendStateMeans) {
  HmmModel m;
  m.priors = Vector::Constant(2, 0.5);
  m.transitions.resize(2, 2);
  m.transitions << 0.8, 0.2, 0.2, 0.8;
  Matrix cov = Matrix::Identity(3, 3);
  cov(0, 1) = cov(1, 0) = 0.4;
  Vector a(3), b(3);
  a << 0.0, 0.0, 2.0;
  b << 0.0, 0.0, -6.0;
  m.emissions = {{a, cov}, {b, cov}};
  m.split = {{0, 1}, {2}};
  // Identical human marginals keep the responsibilities at (0.5, 0.5).
  Sequence x1(4, 2), x2(4, 2);
  x1.setConstant(0.3);
  x2.setConstant(-7.0);
  const Matrix o1 = gmr_predict(m, x1);
  const Matrix o2 = gmr_predict(m, x2);
  for (Index t = 0; t < 4; ++t) {
    EXPECT_NEAR(o1(t, 0), -2.0, 1e-12);
    EXPECT_NEAR(o2(t, 0), -2.0, 1e-12);
  }
}

TEST(GmrPredict, RejectsWrongWidth) {
  HmmModel m = hand_model();
  EXPECT_THROW(gmr_predict(m, column({0.0})), DimensionError);  // no robot dims
  m.emissions = {{Vector::Zero(2), Matrix::Identity(2, 2)}, {Vector::Ones(2), Matrix::Identity(2, 2)}};
  m.split = {{0}, {1}};
  EXPECT_THROW(gmr_predict(m, Sequence::Zero(3, 2)), DimensionError);
}

TEST(Labels, SingleStateIsAllZero) {
  HmmModel m;
  m.priors = Vector::Ones(1);
  m.transitions = Matrix::Ones(1, 1);
  m.emissions = {scalar(0.0, 1.0)};
  m.split = DimensionSplit::all_human(1);
  const auto labels = viterbi_labels(m, column({1.0, 2.0, 3.0}), IndexList{0});
  EXPECT_EQ(labels, (std::vector<int>{0, 0, 0}));
}

TEST(Labels, StepSignalSwitchesOnce) {
  const HmmModel m = hand_model();
  Sequence step(20, 1);
  for (Index t = 0; t < 20; ++t) step(t, 0) = t < 9 ? 0.0 : 3.0;
  const auto labels = viterbi_labels(m, step, IndexList{0});
  int switches = 0;
  for (std::size_t t = 1; t < labels.size(); ++t) switches += labels[t] != labels[t - 1];
  EXPECT_EQ(switches, 1);
  EXPECT_EQ(labels.front(), 0);
  EXPECT_EQ(labels.back(), 1);
}

TEST(Labels, ArgmaxIgnoresScaleAndPrefersLowestIndex) {
  Matrix h(3, 3);
  h << 0.2, 0.5, 0.3, 0.4, 0.4, 0.2, 0.1, 0.1, 0.8;
  const auto base = argmax_rows(h);
  EXPECT_EQ(base, (std::vector<int>{1, 0, 2}));
  Matrix scaled = h;
  scaled.row(0) *= 1e-200;
  scaled.row(2) *= 7.5;
  EXPECT_EQ(argmax_rows(scaled), base);
}

}  // namespace
}  // namespace hrtsc
