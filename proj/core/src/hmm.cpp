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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hrtsc/errors.hpp"

namespace hrtsc {
namespace {

constexpr double kSimplexTol = 1e-9;
constexpr double kMinResponsibility = 1e-12;

void check_simplex(const Eigen::Ref<const Vector>& p, const std::string& what) {
  if ((p.array() < 0.0).any() || !p.allFinite()) {
    throw DimensionError(what + " has negative or non-finite entries");
  }
  if (std::abs(p.sum() - 1.0) > kSimplexTol) {
    throw DimensionError(what + " does not sum to 1");
  }
}

// Observation columns for `dims`, accepting either full-width or
// pre-restricted input.
Sequence restrict_columns(const Sequence& obs, Index model_dim, std::span<const Index> dims) {
  const auto n = static_cast<Index>(dims.size());
  if (obs.cols() == n) return obs;
  if (obs.cols() != model_dim) {
    throw DimensionError("observation has " + std::to_string(obs.cols()) +
                         " columns, expected " + std::to_string(model_dim) + " or " +
                         std::to_string(n));
  }
  Sequence out(obs.rows(), n);
  for (Index k = 0; k < n; ++k) out.col(k) = obs.col(dims[static_cast<std::size_t>(k)]);
  return out;
}

Matrix log_emissions(const std::vector<GaussianDensity>& densities, const Sequence& obs) {
  Matrix log_b(obs.rows(), static_cast<Index>(densities.size()));
  for (Index t = 0; t < obs.rows(); ++t) {
    const Vector x = obs.row(t).transpose();
    for (std::size_t i = 0; i < densities.size(); ++i) {
      log_b(t, static_cast<Index>(i)) = densities[i].log_density(x);
    }
  }
  return log_b;
}

std::vector<GaussianDensity> densities_of(const std::vector<GaussianState>& emissions) {
  std::vector<GaussianDensity> out;
  out.reserve(emissions.size());
  for (const auto& g : emissions) out.emplace_back(g);
  return out;
}

ForwardResult forward_from_log_emissions(const Vector& priors, const Matrix& transitions,
                                         const Matrix& log_b) {
  const Index T = log_b.rows();
  const Index S = log_b.cols();
  ForwardResult res;
  res.h.resize(T, S);
  res.log_alpha.resize(T, S);
  Vector pred = priors;
  Vector a(S);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (Index t = 0; t < T; ++t) {
    if (t > 0) pred = transitions.transpose() * res.h.row(t - 1).transpose();
    double m = kNegInf;
    for (Index i = 0; i < S; ++i) {
      a(i) = pred(i) > 0.0 ? std::log(pred(i)) + log_b(t, i) : kNegInf;
      m = std::max(m, a(i));
    }
    if (!std::isfinite(m)) {
      throw NumericalError("forward: every state has zero likelihood at frame " +
                           std::to_string(t));
    }
    const double c = m + std::log((a.array() - m).exp().sum());
    res.log_likelihood += c;
    for (Index i = 0; i < S; ++i) {
      const double log_h = a(i) - c;
      res.h(t, i) = std::exp(log_h);
      res.log_alpha(t, i) = log_h + res.log_likelihood;
    }
  }
  return res;
}

struct SequencePosterior {
  Matrix gamma;  // T x S
};

struct EStep {
  double log_likelihood = 0.0;
  std::vector<SequencePosterior> posteriors;
  Matrix xi_sum;  // S x S expected transition counts
};

EStep e_step(const HmmModel& model, std::span<const Sequence> demos) {
  const Index S = model.num_states();
  const auto densities = densities_of(model.emissions);
  EStep out;
  out.xi_sum = Matrix::Zero(S, S);
  out.posteriors.reserve(demos.size());
  for (const auto& obs : demos) {
    const Matrix log_b = log_emissions(densities, obs);
    const ForwardResult fwd = forward_from_log_emissions(model.priors, model.transitions, log_b);
    out.log_likelihood += fwd.log_likelihood;

    const Index T = obs.rows();
    Matrix beta(T, S);
    beta.row(T - 1).setOnes();
    Vector b_next(S);
    for (Index t = T - 2; t >= 0; --t) {
      const double m = log_b.row(t + 1).maxCoeff();
      b_next = (log_b.row(t + 1).array() - m).exp().transpose();
      const Vector v = b_next.cwiseProduct(beta.row(t + 1).transpose());
      Vector bt = model.transitions * v;
      const double norm = bt.sum();
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw NumericalError("backward: degenerate recursion at frame " + std::to_string(t));
      }
      beta.row(t) = (bt / norm).transpose();

      // xi_t(i, j) ~ h_t(i) T_ij b_j(t+1) beta_{t+1}(j)
      Matrix xi = fwd.h.row(t).transpose() * v.transpose();
      xi.array() *= model.transitions.array();
      const double xs = xi.sum();
      if (xs > 0.0) out.xi_sum += xi / xs;
    }

    SequencePosterior post;
    post.gamma = fwd.h.cwiseProduct(beta);
    for (Index t = 0; t < T; ++t) {
      const double s = post.gamma.row(t).sum();
      if (!(s > 0.0)) {
        throw NumericalError("posterior vanished at frame " + std::to_string(t));
      }
      post.gamma.row(t) /= s;
    }
    out.posteriors.push_back(std::move(post));
  }
  return out;
}

GaussianState pooled_gaussian(std::span<const Sequence> demos, double reg_eps) {
  const Index D = demos.front().cols();
  Vector sum = Vector::Zero(D);
  Index n = 0;
  for (const auto& s : demos) {
    sum += s.colwise().sum().transpose();
    n += s.rows();
  }
  const Vector mean = sum / static_cast<double>(n);
  Matrix cov = Matrix::Zero(D, D);
  for (const auto& s : demos) {
    const Matrix c = s.rowwise() - mean.transpose();
    cov.noalias() += c.transpose() * c;
  }
  cov /= static_cast<double>(n);
  return {mean, regularize(cov, reg_eps)};
}

HmmModel m_step(const HmmModel& prev, const EStep& e, std::span<const Sequence> demos,
                const GaussianState& global, double reg_eps, int& rescued) {
  const Index S = prev.num_states();
  const Index D = prev.dim();
  HmmModel next = prev;

  next.priors.setZero();
  for (const auto& p : e.posteriors) next.priors += p.gamma.row(0).transpose();
  next.priors /= next.priors.sum();

  for (Index i = 0; i < S; ++i) {
    const double row = e.xi_sum.row(i).sum();
    if (row > 0.0) next.transitions.row(i) = e.xi_sum.row(i) / row;
  }

  for (Index i = 0; i < S; ++i) {
    double weight = 0.0;
    Vector wsum = Vector::Zero(D);
    for (std::size_t k = 0; k < demos.size(); ++k) {
      const auto g = e.posteriors[k].gamma.col(i);
      weight += g.sum();
      wsum.noalias() += demos[k].transpose() * g;
    }
    auto& em = next.emissions[static_cast<std::size_t>(i)];
    if (weight < kMinResponsibility) {
      em.cov = global.cov;
      ++rescued;
      continue;
    }
    em.mean = wsum / weight;
    Matrix cov = Matrix::Zero(D, D);
    for (std::size_t k = 0; k < demos.size(); ++k) {
      const Matrix c = demos[k].rowwise() - em.mean.transpose();
      cov.noalias() += c.transpose() * e.posteriors[k].gamma.col(i).asDiagonal() * c;
    }
    cov /= weight;
    cov = 0.5 * (cov + cov.transpose()).eval();
    em.cov = regularize(cov, reg_eps);
  }
  return next;
}

void check_batch(std::span<const Sequence> demos, Index dim) {
  if (demos.empty()) throw DimensionError("empty sequence list");
  for (const auto& s : demos) {
    if (s.cols() != dim) {
      throw DimensionError("sequence has " + std::to_string(s.cols()) +
                           " columns, model has dimension " + std::to_string(dim));
    }
    if (s.rows() == 0) throw DimensionError("empty sequence");
  }
}

}  // namespace

void DimensionSplit::validate(Index dim) const {
  auto sorted = [](const IndexList& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
  };
  if (!sorted(human) || !sorted(robot)) {
    throw DimensionError("dimension split lists must be strictly increasing");
  }
  if (static_cast<Index>(human.size() + robot.size()) != dim) {
    throw DimensionError("dimension split does not cover all " + std::to_string(dim) +
                         " dimensions");
  }
  std::vector<int> seen(static_cast<std::size_t>(dim), 0);
  for (const auto* list : {&human, &robot}) {
    for (Index i : *list) {
      if (i < 0 || i >= dim || seen[static_cast<std::size_t>(i)]++) {
        throw DimensionError("dimension split lists overlap or are out of range");
      }
    }
  }
}

DimensionSplit DimensionSplit::restrict_to(std::span<const Index> dims) const {
  DimensionSplit out;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const Index d = dims[k];
    if (std::binary_search(human.begin(), human.end(), d)) {
      out.human.push_back(static_cast<Index>(k));
    } else if (std::binary_search(robot.begin(), robot.end(), d)) {
      out.robot.push_back(static_cast<Index>(k));
    }
  }
  return out;
}

void HmmModel::validate() const {
  const Index S = num_states();
  if (S < 1) throw DimensionError("model has no states");
  if (transitions.rows() != S || transitions.cols() != S) {
    throw DimensionError("transition matrix must be S x S");
  }
  if (static_cast<Index>(emissions.size()) != S) {
    throw DimensionError("emission count does not match state count");
  }
  check_simplex(priors, "priors");
  for (Index i = 0; i < S; ++i) {
    check_simplex(transitions.row(i).transpose(), "transition row " + std::to_string(i));
  }
  const Index D = dim();
  for (const auto& g : emissions) {
    if (g.dim() != D || g.cov.rows() != D || g.cov.cols() != D) {
      throw DimensionError("emission dimensions disagree");
    }
  }
  split.validate(D);
}

std::vector<Index> temporal_bin_lengths(Index length, Index num_states) {
  if (num_states < 1) throw DimensionError("number of states must be at least 1");
  if (length < num_states) {
    throw DimensionError("sequence of length " + std::to_string(length) +
                         " is shorter than the number of states " + std::to_string(num_states));
  }
  std::vector<Index> out(static_cast<std::size_t>(num_states), length / num_states);
  for (Index k = 0; k < length % num_states; ++k) ++out[static_cast<std::size_t>(k)];
  return out;
}

HmmModel init_temporal_bins(std::span<const Sequence> demos, Index num_states, double reg_eps,
                            DimensionSplit split) {
  if (demos.empty()) throw DimensionError("init_temporal_bins: empty demonstration list");
  if (num_states < 1) throw DimensionError("number of states must be at least 1");
  const Index D = demos.front().cols();
  check_batch(demos, D);
  split.validate(D);

  std::vector<std::vector<Index>> bins_per_demo;
  std::vector<Index> counts(static_cast<std::size_t>(num_states), 0);
  for (const auto& s : demos) {
    bins_per_demo.push_back(temporal_bin_lengths(s.rows(), num_states));
    for (Index k = 0; k < num_states; ++k) {
      counts[static_cast<std::size_t>(k)] += bins_per_demo.back()[static_cast<std::size_t>(k)];
    }
  }

  HmmModel model;
  model.priors = Vector::Constant(num_states, 1.0 / static_cast<double>(num_states));
  model.transitions = Matrix::Constant(num_states, num_states, 1.0 / static_cast<double>(num_states));
  model.split = std::move(split);

  for (Index k = 0; k < num_states; ++k) {
    const Index n = counts[static_cast<std::size_t>(k)];
    Matrix pooled(n, D);
    Index row = 0;
    for (std::size_t d = 0; d < demos.size(); ++d) {
      Index start = 0;
      for (Index j = 0; j < k; ++j) start += bins_per_demo[d][static_cast<std::size_t>(j)];
      const Index len = bins_per_demo[d][static_cast<std::size_t>(k)];
      pooled.middleRows(row, len) = demos[d].middleRows(start, len);
      row += len;
    }
    GaussianState g;
    g.mean = pooled.colwise().mean().transpose();
    const Matrix c = pooled.rowwise() - g.mean.transpose();
    Matrix cov = Matrix::Zero(D, D);
    if (n > 1) cov = (c.transpose() * c) / static_cast<double>(n - 1);
    g.cov = regularize(cov, reg_eps);
    model.emissions.push_back(std::move(g));
  }
  return model;
}

HmmModel init_temporal_bins(std::span<const Sequence> demos, Index num_states, double reg_eps) {
  if (demos.empty()) throw DimensionError("init_temporal_bins: empty demonstration list");
  return init_temporal_bins(demos, num_states, reg_eps,
                            DimensionSplit::all_human(demos.front().cols()));
}

ForwardResult forward(const HmmModel& model, const Sequence& obs, std::span<const Index> dims) {
  check_indices(dims, model.dim());
  if (obs.rows() == 0) throw DimensionError("forward: empty observation sequence");
  const Sequence restricted = restrict_columns(obs, model.dim(), dims);
  std::vector<GaussianDensity> densities;
  densities.reserve(model.emissions.size());
  for (const auto& g : model.emissions) densities.emplace_back(marginalize(g, dims));
  return forward_from_log_emissions(model.priors, model.transitions,
                                    log_emissions(densities, restricted));
}

ForwardResult forward(const HmmModel& model, const Sequence& obs) {
  const IndexList all = iota_indices(model.dim());
  return forward(model, obs, all);
}

BaumWelchResult baum_welch(const HmmModel& init, std::span<const Sequence> demos,
                           const BaumWelchOptions& opts) {
  if (opts.max_iter < 1) throw DimensionError("max_iter must be at least 1");
  init.validate();
  check_batch(demos, init.dim());

  BaumWelchResult res;
  res.model = init;
  const GaussianState global = pooled_gaussian(demos, opts.reg_eps);

  EStep e = e_step(res.model, demos);
  res.loglik_history.push_back(e.log_likelihood);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    HmmModel next = m_step(res.model, e, demos, global, opts.reg_eps, res.rescued_states);
    EStep next_e = e_step(next, demos);
    const double prev = res.loglik_history.back();
    // The eps*I term makes the M-step a penalized update rather than the exact
    // maximizer, so a step can lose likelihood once EM is near a fixed point.
    // Such a step is dropped and the previous model kept.
    if (next_e.log_likelihood < prev) {
      res.rejected_loglik = next_e.log_likelihood;
      res.converged = true;
      break;
    }
    res.model = std::move(next);
    e = std::move(next_e);
    res.loglik_history.push_back(e.log_likelihood);
    res.iterations = iter;
    if (e.log_likelihood - prev < opts.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

HmmModel marginal_model(const HmmModel& model, std::span<const Index> dims) {
  check_indices(dims, model.dim());
  HmmModel out;
  out.priors = model.priors;
  out.transitions = model.transitions;
  out.emissions.reserve(model.emissions.size());
  for (const auto& g : model.emissions) out.emissions.push_back(marginalize(g, dims));
  out.split = model.split.restrict_to(dims);
  return out;
}

Matrix gmr_predict(const HmmModel& model, const Sequence& human_obs) {
  const auto& human = model.split.human;
  const auto& robot = model.split.robot;
  if (robot.empty()) throw DimensionError("gmr_predict: model has no robot dimensions");
  if (human_obs.cols() != static_cast<Index>(human.size())) {
    throw DimensionError("gmr_predict: human observation has " +
                         std::to_string(human_obs.cols()) + " columns, expected " +
                         std::to_string(human.size()));
  }
  const ForwardResult fwd = forward(model, human_obs, human);
  std::vector<GaussianConditioner> cond;
  cond.reserve(model.emissions.size());
  for (const auto& g : model.emissions) cond.emplace_back(g, human);

  Matrix out = Matrix::Zero(human_obs.rows(), static_cast<Index>(robot.size()));
  for (Index t = 0; t < human_obs.rows(); ++t) {
    const Vector x = human_obs.row(t).transpose();
    for (std::size_t i = 0; i < cond.size(); ++i) {
      out.row(t) += fwd.h(t, static_cast<Index>(i)) * cond[i].conditional_mean(x).transpose();
    }
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& h) {
  std::vector<int> labels(static_cast<std::size_t>(h.rows()));
  for (Index t = 0; t < h.rows(); ++t) {
    Index best = 0;
    for (Index i = 1; i < h.cols(); ++i) {
      if (h(t, i) > h(t, best)) best = i;
    }
    labels[static_cast<std::size_t>(t)] = static_cast<int>(best);
  }
  return labels;
}

std::vector<int> viterbi_labels(const HmmModel& model, const Sequence& obs,
                                std::span<const Index> dims) {
  return argmax_rows(forward(model, obs, dims).h);
}

}  // namespace hrtsc
