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

// Reference computations for tests. Everything here is written directly from
// the definitions with plain loops, so it shares no code path with the
// library it checks.

#ifndef HRTSC_TESTS_ORACLES_HPP
#define HRTSC_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Determinant and solve by Gaussian elimination with partial pivoting, in
// long double.
struct Elimination {
  long double log_abs_det = 0.0L;
  std::vector<long double> solution;
};

inline Elimination eliminate(const Mat& a, const Vec& b) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<std::vector<long double>> m(n, std::vector<long double>(n + 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) m[r][c] = a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    m[r][n] = b(static_cast<Eigen::Index>(r));
  }
  Elimination out;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    }
    if (m[piv][col] == 0.0L) throw std::runtime_error("singular matrix");
    std::swap(m[piv], m[col]);
    out.log_abs_det += std::log(std::fabs(m[col][col]));
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  out.solution.assign(n, 0.0L);
  for (std::size_t k = n; k-- > 0;) {
    long double s = m[k][n];
    for (std::size_t c = k + 1; c < n; ++c) s -= m[k][c] * out.solution[c];
    out.solution[k] = s / m[k][k];
  }
  return out;
}

inline double log_normal(const Vec& x, const Vec& mean, const Mat& cov) {
  const Vec d = x - mean;
  const Elimination e = eliminate(cov, d);
  long double quad = 0.0L;
  for (Eigen::Index i = 0; i < d.size(); ++i) quad += d(i) * e.solution[static_cast<std::size_t>(i)];
  const long double log2pi = std::log(2.0L * std::numbers::pi_v<long double>);
  return static_cast<double>(-0.5L * (static_cast<long double>(d.size()) * log2pi + e.log_abs_det + quad));
}

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  long double s = 0.0L;
  for (double x : v) s += std::exp(static_cast<long double>(x - m));
  return m + static_cast<double>(std::log(s));
}

// log p(path, obs) for every one of the S^T state paths; `log_emission` is
// T x S. Paths are enumerated in odometer order.
template <typename Visit>
void for_each_path(const Vec& priors, const Mat& transitions, const Mat& log_emission,
                   Visit&& visit) {
  const auto t_len = static_cast<std::size_t>(log_emission.rows());
  const auto s = static_cast<int>(priors.size());
  std::vector<int> path(t_len, 0);
  while (true) {
    double lp = std::log(priors(path[0])) + log_emission(0, path[0]);
    for (std::size_t t = 1; t < t_len; ++t) {
      lp += std::log(transitions(path[t - 1], path[t])) +
            log_emission(static_cast<Eigen::Index>(t), path[t]);
    }
    visit(path, lp);
    std::size_t k = t_len;
    while (k > 0) {
      --k;
      if (++path[k] < s) break;
      path[k] = 0;
      if (k == 0) return;
    }
  }
}

inline double path_sum_loglik(const Vec& priors, const Mat& transitions, const Mat& log_emission) {
  std::vector<double> terms;
  for_each_path(priors, transitions, log_emission,
                [&](const std::vector<int>&, double lp) { terms.push_back(lp); });
  return log_sum_exp(terms);
}

// P(state at frame `t` = i | obs[0..t]) by summing prefix paths.
inline Vec path_sum_filter(const Vec& priors, const Mat& transitions, const Mat& log_emission,
                           Eigen::Index t) {
  const Mat prefix = log_emission.topRows(t + 1);
  const auto s = priors.size();
  std::vector<std::vector<double>> by_state(static_cast<std::size_t>(s));
  for_each_path(priors, transitions, prefix, [&](const std::vector<int>& path, double lp) {
    by_state[static_cast<std::size_t>(path.back())].push_back(lp);
  });
  std::vector<double> all;
  Vec h(s);
  for (Eigen::Index i = 0; i < s; ++i) h(i) = log_sum_exp(by_state[static_cast<std::size_t>(i)]);
  for (Eigen::Index i = 0; i < s; ++i) all.push_back(h(i));
  const double z = log_sum_exp(all);
  for (Eigen::Index i = 0; i < s; ++i) h(i) = std::exp(h(i) - z);
  return h;
}

// Mean squared error in centimetres over frames and the three position
// columns, accumulated element by element.
inline double mse_cm(const Mat& a, const Mat& b) {
  long double acc = 0.0L;
  std::size_t n = 0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      const long double d = 100.0L * (static_cast<long double>(a(r, c)) - b(r, c));
      acc += d * d;
      ++n;
    }
  }
  return static_cast<double>(acc / static_cast<long double>(n));
}

inline Mat random_spd(Eigen::Index n, std::mt19937_64& rng, double floor = 0.1) {
  std::normal_distribution<double> nd;
  Mat a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = nd(rng);
  }
  Mat s = a * a.transpose() / static_cast<double>(n);
  s.diagonal().array() += floor;
  return s;
}

inline Vec random_vec(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

// Random row-stochastic vector with entries bounded away from zero.
inline Vec random_simplex(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v / v.sum();
}

}  // namespace oracle

#endif  // HRTSC_TESTS_ORACLES_HPP
