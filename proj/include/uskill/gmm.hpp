// Copyright 2026 The uskill Authors
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

#ifndef USKILL_GMM_HPP_
#define USKILL_GMM_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "uskill/types.hpp"

namespace uskill {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// One full-covariance Gaussian with cached Cholesky factor and log-det.
class GaussianComponent {
 public:
  GaussianComponent() = default;
  GaussianComponent(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) {
    set(std::move(mean), cov);
  }

  void set(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
      throw std::invalid_argument("GaussianComponent: dimension mismatch");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
      throw std::invalid_argument("GaussianComponent: covariance not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument(
          "GaussianComponent: covariance not positive definite");
    }
    mean_ = std::move(mean);
    cov_ = cov;
    chol_ = llt.matrixL();
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
  }

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::MatrixXd& cholesky_lower() const { return chol_; }
  double log_det() const { return log_det_; }

  /// Peak log density, attained at the mean.
  double peak_log_density() const {
    return -0.5 * (log_det_ + dim() * kLog2Pi);
  }

  double mahalanobis(const Eigen::VectorXd& d) const {
    return std::sqrt(squared_mahalanobis(d));
  }

  double squared_mahalanobis(const Eigen::VectorXd& d) const {
    if (d.size() != mean_.size()) {
      throw std::invalid_argument("mahalanobis: dimension mismatch");
    }
    Eigen::VectorXd y = chol_.triangularView<Eigen::Lower>().solve(d - mean_);
    return y.squaredNorm();
  }

  double log_density(const Eigen::VectorXd& d) const {
    return -0.5 * (squared_mahalanobis(d) + log_det_ + dim() * kLog2Pi);
  }

  /// Log densities of the columns of X, vectorized over points.
  Eigen::VectorXd log_density_cols(const Eigen::MatrixXd& X) const {
    if (X.rows() != mean_.size()) {
      throw std::invalid_argument("log_density_cols: dimension mismatch");
    }
    Eigen::MatrixXd Y =
        chol_.triangularView<Eigen::Lower>().solve(X.colwise() - mean_);
    const double c = -0.5 * (log_det_ + dim() * kLog2Pi);
    return (-0.5 * Y.colwise().squaredNorm().array() + c).transpose();
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;  // lower triangular, cov = L L^T
  double log_det_ = 0.0;
};

/// K weighted full-covariance Gaussians over latent nodes, with a fixed
/// input/output split of the dimensions for downstream regression.
struct GmmModel {
  Eigen::VectorXd weights;  // K, positive, sums to 1
  std::vector<GaussianComponent> components;
  int input_dim = kFeatureDim;
  int output_dim = kControlDim;

  int K() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : components[0].dim(); }

  void validate() const {
    if (components.empty() || weights.size() != K()) {
      throw std::invalid_argument("GmmModel: empty or weight-count mismatch");
    }
    if ((weights.array() <= 0.0).any()) {
      throw std::invalid_argument("GmmModel: non-positive weight");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("GmmModel: weights do not sum to 1");
    }
    for (const auto& c : components) {
      if (c.dim() != dim()) {
        throw std::invalid_argument("GmmModel: mixed component dimensions");
      }
    }
    if (input_dim + output_dim != dim()) {
      throw std::invalid_argument("GmmModel: dim split does not match dim");
    }
  }
};

inline double component_log_density(const GmmModel& m, int k,
                                    const Eigen::VectorXd& d) {
  if (k < 0 || k >= m.K()) {
    throw std::out_of_range("component_log_density: component index");
  }
  return m.components[k].log_density(d);
}

inline double mahalanobis(const GmmModel& m, int k, const Eigen::VectorXd& d) {
  if (k < 0 || k >= m.K()) {
    throw std::out_of_range("mahalanobis: component index");
  }
  return m.components[k].mahalanobis(d);
}

/// log sum_k pi_k N(d | mu_k, Sigma_k) via log-sum-exp.
inline double log_density(const GmmModel& m, const Eigen::VectorXd& d) {
  if (d.size() != m.dim()) {
    throw std::invalid_argument("log_density: dimension mismatch");
  }
  Eigen::VectorXd terms(m.K());
  for (int k = 0; k < m.K(); ++k) {
    terms[k] = std::log(m.weights[k]) + m.components[k].log_density(d);
  }
  const double mx = terms.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((terms.array() - mx).exp().sum());
}

struct EmConfig {
  int max_iter = 300;
  double tol = 1e-6;   // absolute log-likelihood improvement
  double reg = 1e-6;   // added to covariance diagonals each M-step
  unsigned seed = 0;
};

struct EmTrace {
  std::vector<double> log_likelihood;  // one entry per EM iteration
  int iterations = 0;
};

namespace detail {

/// k-means++ seeding: returns K column indices into X (dim x N).
inline std::vector<int> kmeanspp_seeds(const Eigen::MatrixXd& X, int K,
                                       std::mt19937_64& rng) {
  const int n = static_cast<int>(X.cols());
  std::vector<int> seeds;
  seeds.reserve(K);
  std::uniform_int_distribution<int> first(0, n - 1);
  seeds.push_back(first(rng));
  Eigen::VectorXd d2 =
      (X.colwise() - X.col(seeds[0])).colwise().squaredNorm().transpose();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (static_cast<int>(seeds.size()) < K) {
    const double total = d2.sum();
    int pick;
    if (total <= 0.0) {
      pick = first(rng);  // all points coincide with chosen centers
    } else {
      double r = unif(rng) * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        r -= d2[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    seeds.push_back(pick);
    Eigen::VectorXd nd =
        (X.colwise() - X.col(pick)).colwise().squaredNorm().transpose();
    d2 = d2.cwiseMin(nd);
  }
  return seeds;
}

}  // namespace detail

/// Fits a K-component full-covariance GMM to the columns of X by EM.
/// Initialization: k-means++ centers, global sample covariance, uniform
/// weights. Covariances get reg * I added after every M-step.
inline GmmModel fit_em_matrix(const Eigen::MatrixXd& X, int K,
                              const EmConfig& cfg, EmTrace* trace = nullptr,
                              int input_dim = -1, int output_dim = -1) {
  const int dim = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  if (K < 1 || n < K) {
    throw std::invalid_argument("fit_em: need K >= 1 and N >= K");
  }
  if (!X.allFinite()) {
    throw std::invalid_argument("fit_em: non-finite data");
  }
  if (input_dim < 0) input_dim = dim;
  if (output_dim < 0) output_dim = dim - input_dim;

  std::mt19937_64 rng(cfg.seed);
  GmmModel model;
  model.input_dim = input_dim;
  model.output_dim = output_dim;
  model.weights = Eigen::VectorXd::Constant(K, 1.0 / K);

  const Eigen::VectorXd global_mean = X.rowwise().mean();
  Eigen::MatrixXd centered = X.colwise() - global_mean;
  Eigen::MatrixXd global_cov =
      (centered * centered.transpose()) / static_cast<double>(n);
  global_cov.diagonal().array() += cfg.reg;

  const auto seeds = detail::kmeanspp_seeds(X, K, rng);
  model.components.resize(K);
  for (int k = 0; k < K; ++k) {
    model.components[k].set(X.col(seeds[k]), global_cov);
  }

  Eigen::MatrixXd log_resp(n, K);
  double prev_ll = -std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    // E-step
    for (int k = 0; k < K; ++k) {
      log_resp.col(k) = model.components[k].log_density_cols(X).array() +
                        std::log(model.weights[k]);
    }
    Eigen::VectorXd row_max = log_resp.rowwise().maxCoeff();
    Eigen::VectorXd lse =
        ((log_resp.colwise() - row_max).array().exp().rowwise().sum().log() +
         row_max.array())
            .matrix();
    const double ll = lse.sum();
    if (trace) trace->log_likelihood.push_back(ll);
    Eigen::MatrixXd resp = (log_resp.colwise() - lse).array().exp();

    // M-step
    Eigen::VectorXd nk = resp.colwise().sum();
    nk = nk.cwiseMax(1e-300);
    model.weights = nk / static_cast<double>(n);
    model.weights /= model.weights.sum();
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd mu = (X * resp.col(k)) / nk[k];
      Eigen::MatrixXd C = X.colwise() - mu;
      Eigen::MatrixXd cov =
          (C * resp.col(k).asDiagonal() * C.transpose()) / nk[k];
      cov = 0.5 * (cov + cov.transpose());
      cov.diagonal().array() += cfg.reg;
      model.components[k].set(std::move(mu), cov);
    }

    if (ll - prev_ll < cfg.tol && iter > 0) {
      ++iter;
      break;
    }
    prev_ll = ll;
  }
  if (trace) trace->iterations = iter;
  model.validate();
  return model;
}

inline Eigen::MatrixXd nodes_to_matrix(const std::vector<LatentNode>& nodes) {
  Eigen::MatrixXd X(kNodeDim, nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    X.col(i) = nodes[i].flatten();
  }
  return X;
}

inline GmmModel fit_em(const std::vector<LatentNode>& nodes, int K,
                       const EmConfig& cfg, EmTrace* trace = nullptr) {
  return fit_em_matrix(nodes_to_matrix(nodes), K, cfg, trace, kFeatureDim,
                       kControlDim);
}

}  // namespace uskill

#endif  // USKILL_GMM_HPP_
