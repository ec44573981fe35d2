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

#include "hrtsc/gaussian.hpp"

#include <cmath>
#include <string>

#include "hrtsc/errors.hpp"

namespace hrtsc {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;  // ln(2 pi)

Eigen::LLT<Matrix> factorize(const Matrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success || !llt.matrixLLT().allFinite()) {
    throw NumericalError(std::string(what) +
                         ": Cholesky factorization failed, covariance is not positive definite "
                         "(increase the regularization)");
  }
  return llt;
}

const Matrix& checked_cov(const GaussianState& g) {
  if (g.cov.rows() != g.dim() || g.cov.cols() != g.dim()) {
    throw DimensionError("covariance shape does not match mean length");
  }
  return g.cov;
}

}  // namespace

IndexList iota_indices(Index n) {
  IndexList idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

void check_indices(std::span<const Index> idx, Index dim) {
  if (idx.empty()) throw DimensionError("index list is empty");
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= dim) {
      throw DimensionError("index " + std::to_string(idx[k]) + " out of range for dimension " +
                           std::to_string(dim));
    }
    if (k > 0 && idx[k] <= idx[k - 1]) {
      throw DimensionError("index list must be strictly increasing (duplicate or unsorted index " +
                           std::to_string(idx[k]) + ")");
    }
  }
}

IndexList complement_indices(std::span<const Index> idx, Index dim) {
  IndexList out;
  std::size_t k = 0;
  for (Index i = 0; i < dim; ++i) {
    if (k < idx.size() && idx[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

Matrix select(const Matrix& m, std::span<const Index> rows, std::span<const Index> cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Index>(r), static_cast<Index>(c)) = m(rows[r], cols[c]);
  return out;
}

Vector select(const Vector& v, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Index>(k)) = v(idx[k]);
  return out;
}

double log_density(const Vector& x, const GaussianState& g) {
  return GaussianDensity(g).log_density(x);
}

GaussianState marginalize(const GaussianState& g, std::span<const Index> idx) {
  check_indices(idx, g.dim());
  return {select(g.mean, idx), select(g.cov, idx, idx)};
}

GaussianState condition(const GaussianState& g, std::span<const Index> obs_idx,
                        const Vector& obs_val) {
  check_indices(obs_idx, g.dim());
  if (obs_val.size() != static_cast<Index>(obs_idx.size())) {
    throw DimensionError("observed value length does not match observed index count");
  }
  GaussianConditioner cond(g, obs_idx);
  return {cond.conditional_mean(obs_val), cond.conditional_cov()};
}

Matrix regularize(const Matrix& cov, double eps) {
  Matrix out = cov;
  out.diagonal().array() += eps;
  return out;
}

GaussianDensity::GaussianDensity(const GaussianState& g)
    : mean_(g.mean), llt_(factorize(checked_cov(g), "log_density")) {
  const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(dim()) * kLogTwoPi + log_det);
}

double GaussianDensity::log_density(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) +
                         ", Gaussian has dimension " + std::to_string(dim()));
  }
  const Vector z = llt_.matrixL().solve(x - mean_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

GaussianConditioner::GaussianConditioner(const GaussianState& g, std::span<const Index> obs_idx) {
  check_indices(obs_idx, g.dim());
  const IndexList free_idx = complement_indices(obs_idx, g.dim());
  mean_obs_ = select(g.mean, obs_idx);
  mean_free_ = select(g.mean, free_idx);
  const Matrix s_oo = select(g.cov, obs_idx, obs_idx);
  const Matrix s_of = select(g.cov, obs_idx, free_idx);
  const Matrix s_ff = select(g.cov, free_idx, free_idx);

  const auto llt = factorize(s_oo, "condition (observed block)");
  // gain^T = Sigma_oo^{-1} Sigma_of
  gain_ = llt.solve(s_of).transpose();
  cond_cov_ = s_ff - gain_ * s_of;
  cond_cov_ = 0.5 * (cond_cov_ + cond_cov_.transpose()).eval();
}

Vector GaussianConditioner::conditional_mean(const Eigen::Ref<const Vector>& obs) const {
  return mean_free_ + gain_ * (obs - mean_obs_);
}

}  // namespace hrtsc
