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

#ifndef HRTSC_GAUSSIAN_HPP
#define HRTSC_GAUSSIAN_HPP

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace hrtsc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Mean and covariance of one multivariate normal.
struct GaussianState {
  Vector mean;
  Matrix cov;

  Index dim() const { return mean.size(); }
};

/// 0, 1, ..., n-1.
IndexList iota_indices(Index n);

/// Throws DimensionError unless `idx` is non-empty, strictly increasing and
/// every entry is below `dim`.
void check_indices(std::span<const Index> idx, Index dim);

/// Indices in [0, dim) not present in `idx` (which must be sorted).
IndexList complement_indices(std::span<const Index> idx, Index dim);

/// Rows/columns of `m` (or entries of `v`) picked by index lists.
Matrix select(const Matrix& m, std::span<const Index> rows, std::span<const Index> cols);
Vector select(const Vector& v, std::span<const Index> idx);

/// ln N(x; g.mean, g.cov). Throws NumericalError when the covariance does not
/// admit a Cholesky factorization.
double log_density(const Vector& x, const GaussianState& g);

GaussianState marginalize(const GaussianState& g, std::span<const Index> idx);

/// Distribution of the dimensions not in `obs_idx` given that the dimensions
/// in `obs_idx` take the values `obs_val`.
GaussianState condition(const GaussianState& g, std::span<const Index> obs_idx,
                        const Vector& obs_val);

/// cov + eps * I.
Matrix regularize(const Matrix& cov, double eps);

/// A Gaussian with its Cholesky factor cached, for evaluating many points.
class GaussianDensity {
 public:
  explicit GaussianDensity(const GaussianState& g);

  double log_density(const Eigen::Ref<const Vector>& x) const;
  Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Eigen::LLT<Matrix> llt_;
  double log_norm_ = 0.0;  // -0.5 * (D ln 2pi + ln det)
};

/// Precomputed affine map obs -> E[free | obs] for a fixed split of a
/// Gaussian: mean_free + gain * (obs - mean_obs).
class GaussianConditioner {
 public:
  GaussianConditioner(const GaussianState& g, std::span<const Index> obs_idx);

  Vector conditional_mean(const Eigen::Ref<const Vector>& obs) const;
  const Matrix& conditional_cov() const { return cond_cov_; }
  const Matrix& gain() const { return gain_; }

 private:
  Vector mean_obs_;
  Vector mean_free_;
  Matrix gain_;  // Sigma_fo * Sigma_oo^{-1}
  Matrix cond_cov_;
};

}  // namespace hrtsc

#endif  // HRTSC_GAUSSIAN_HPP
