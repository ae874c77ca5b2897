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

#include "uskill/gmm.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace uskill {
namespace {

Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  return A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd random_vec(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = g(rng);
  return v;
}

GmmModel random_model(int K, int d, std::mt19937_64& rng) {
  GmmModel m;
  m.input_dim = d;
  m.output_dim = 0;
  m.weights = Eigen::VectorXd::Zero(K);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int k = 0; k < K; ++k) {
    m.weights[k] = u(rng);
    m.components.emplace_back(random_vec(d, rng, 3.0), random_spd(d, rng));
  }
  m.weights /= m.weights.sum();
  return m;
}

TEST(GaussianComponent, RejectsAsymmetricAndIndefinite) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, 0.4, 1.0;  // asymmetric
  EXPECT_THROW(GaussianComponent(Eigen::Vector2d::Zero(), bad),
               std::invalid_argument);
  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  EXPECT_THROW(GaussianComponent(Eigen::Vector2d::Zero(), indef),
               std::invalid_argument);
}

TEST(GaussianComponent, LogDetMatchesFactor) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd cov = random_spd(8, rng);
    GaussianComponent c(Eigen::VectorXd::Zero(8), cov);
    const Eigen::MatrixXd& L = c.cholesky_lower();
    EXPECT_NEAR(c.log_det(), std::log((L * L.transpose()).determinant()),
                1e-8);
    EXPECT_NEAR((L * L.transpose() - cov).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  }
}

TEST(Mahalanobis, IdentityCases) {
  const int d = 5;
  GaussianComponent c(Eigen::VectorXd::Zero(d),
                      Eigen::MatrixXd::Identity(d, d));
  EXPECT_DOUBLE_EQ(c.mahalanobis(Eigen::VectorXd::Zero(d)), 0.0);
  Eigen::VectorXd e = Eigen::VectorXd::Unit(d, 2);
  EXPECT_NEAR(c.mahalanobis(e), 1.0, 1e-12);
}

TEST(Mahalanobis, MatchesDenseInverseOracle) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 12;
    const Eigen::MatrixXd cov = random_spd(d, rng);
    const Eigen::VectorXd mu = random_vec(d, rng);
    GaussianComponent c(mu, cov);
    const Eigen::VectorXd x = random_vec(d, rng, 2.0);
    const double direct = (x - mu).dot(cov.inverse() * (x - mu));
    EXPECT_NEAR(c.squared_mahalanobis(x), direct, 1e-8);
  }
}

TEST(Mahalanobis, TriangleInequalityInSigmaMetric) {
  std::mt19937_64 rng(6);
  const int d = 6;
  const Eigen::MatrixXd cov = random_spd(d, rng);
  GaussianComponent zero(Eigen::VectorXd::Zero(d), cov);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd a = random_vec(d, rng, 2.0);
    const Eigen::VectorXd b = random_vec(d, rng, 2.0);
    // ||a - b||_S <= ||a||_S + ||b||_S  with  ||x||_S = maha from 0
    GaussianComponent at_a(a, cov);
    EXPECT_LE(at_a.mahalanobis(b),
              zero.mahalanobis(a) + zero.mahalanobis(b) + 1e-9);
  }
}

TEST(LogDensity, PeakOfStandardGaussian) {
  // K=1, Sigma = I_50, d = mu: log density is -25 log(2 pi)
  GmmModel m;
  m.input_dim = kNodeDim;
  m.output_dim = 0;
  m.weights = Eigen::VectorXd::Ones(1);
  m.components.emplace_back(Eigen::VectorXd::Zero(kNodeDim),
                            Eigen::MatrixXd::Identity(kNodeDim, kNodeDim));
  EXPECT_NEAR(log_density(m, Eigen::VectorXd::Zero(kNodeDim)),
              -25.0 * std::log(2.0 * M_PI), 1e-12);
}

TEST(LogDensity, MatchesNaiveSummation) {
  std::mt19937_64 rng(8);
  const GmmModel m = random_model(4, 7, rng);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd x = random_vec(7, rng, 3.0);
    double naive = 0.0;
    for (int k = 0; k < m.K(); ++k) {
      naive += m.weights[k] * std::exp(m.components[k].log_density(x));
    }
    EXPECT_NEAR(log_density(m, x), std::log(naive), 1e-9);
  }
}

TEST(LogDensity, LowerBoundedByBestComponent) {
  std::mt19937_64 rng(9);
  const GmmModel m = random_model(5, 4, rng);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd x = random_vec(4, rng, 4.0);
    double best = -1e300;
    for (int k = 0; k < m.K(); ++k) {
      best = std::max(best, std::log(m.weights[k]) +
                                m.components[k].log_density(x));
    }
    EXPECT_GE(log_density(m, x), best - 1e-12);
  }
}

TEST(LogDensity, InvariantUnderComponentPermutation) {
  std::mt19937_64 rng(10);
  GmmModel m = random_model(5, 4, rng);
  GmmModel p = m;
  std::reverse(p.components.begin(), p.components.end());
  p.weights = m.weights.reverse();
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd x = random_vec(4, rng, 3.0);
    EXPECT_NEAR(log_density(m, x), log_density(p, x), 1e-12);
  }
}

TEST(ComponentAccessors, IndexChecks) {
  std::mt19937_64 rng(11);
  const GmmModel m = random_model(3, 4, rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  EXPECT_THROW(component_log_density(m, 3, x), std::out_of_range);
  EXPECT_THROW(mahalanobis(m, -1, x), std::out_of_range);
}

TEST(FitEm, SingleGaussianMatchesSampleMoments) {
  std::mt19937_64 rng(21);
  const int d = 3, n = 2000;
  const Eigen::VectorXd true_mu = Eigen::Vector3d(1.0, -2.0, 0.5);
  Eigen::MatrixXd A(d, d);
  A << 1.0, 0.0, 0.0, 0.3, 0.8, 0.0, -0.2, 0.1, 0.5;
  Eigen::MatrixXd X(d, n);
  for (int i = 0; i < n; ++i) {
    X.col(i) = true_mu + A * random_vec(d, rng);
  }
  // Closed-form K=1 MLE: sample mean and (population) sample covariance.
  const Eigen::VectorXd sample_mu = X.rowwise().mean();
  Eigen::MatrixXd C = X.colwise() - sample_mu;
  const Eigen::MatrixXd sample_cov = (C * C.transpose()) / n;

  EmConfig cfg;
  const GmmModel m = fit_em_matrix(X, 1, cfg);
  const Eigen::VectorXd se =
      (sample_cov.diagonal() / n).cwiseSqrt();  // standard error of mean
  for (int j = 0; j < d; ++j) {
    EXPECT_LT(std::abs(m.components[0].mean()[j] - sample_mu[j]), 3.0 * se[j]);
  }
  EXPECT_LT((m.components[0].covariance() - sample_cov).norm(),
            0.1 * sample_cov.norm());
}

TEST(FitEm, RecoversTwoSeparatedClusters) {
  std::mt19937_64 rng(22);
  const int n = 1000;
  Eigen::MatrixXd X(2, n);
  for (int i = 0; i < n; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    X.col(i) = sign * Eigen::Vector2d(5.0, 5.0) + random_vec(2, rng);
  }
  EmConfig cfg;
  cfg.seed = 1;
  EmTrace trace;
  const GmmModel m = fit_em_matrix(X, 2, cfg, &trace);

  std::vector<Eigen::Vector2d> truths = {{5.0, 5.0}, {-5.0, -5.0}};
  for (const auto& t : truths) {
    double best = 1e9;
    for (int k = 0; k < 2; ++k) {
      best = std::min(best, (m.components[k].mean() - t).norm());
    }
    EXPECT_LT(best, 0.5);
  }
  EXPECT_NEAR(m.weights[0], 0.5, 0.1);

  // Per-iteration log-likelihood never decreases.
  for (std::size_t i = 1; i < trace.log_likelihood.size(); ++i) {
    EXPECT_GE(trace.log_likelihood[i], trace.log_likelihood[i - 1] - 1e-9);
  }
}

TEST(FitEm, WeightsNormalizedAfterFit) {
  std::mt19937_64 rng(23);
  Eigen::MatrixXd X(3, 200);
  for (int i = 0; i < 200; ++i) X.col(i) = random_vec(3, rng, 2.0);
  const GmmModel m = fit_em_matrix(X, 4, EmConfig{});
  EXPECT_NEAR(m.weights.sum(), 1.0, 1e-12);
  EXPECT_TRUE((m.weights.array() > 0).all());
}

TEST(FitEm, OnePointPerComponentStaysFinite) {
  std::mt19937_64 rng(24);
  const int n = 6;
  Eigen::MatrixXd X(2, n);
  for (int i = 0; i < n; ++i) X.col(i) = random_vec(2, rng, 3.0);
  EmConfig cfg;
  cfg.max_iter = 50;
  const GmmModel m = fit_em_matrix(X, n, cfg);  // K = N, reg keeps SPD
  for (int i = 0; i < n; ++i) {
    EXPECT_TRUE(std::isfinite(log_density(m, X.col(i))));
  }
}

TEST(FitEm, RejectsBadInput) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(3, 5);
  EXPECT_THROW(fit_em_matrix(X, 6, EmConfig{}), std::invalid_argument);
  EXPECT_THROW(fit_em_matrix(X, 0, EmConfig{}), std::invalid_argument);
  X(1, 2) = std::nan("");
  EXPECT_THROW(fit_em_matrix(X, 2, EmConfig{}), std::invalid_argument);
}

TEST(FitEm, NodeOverloadUsesStandardSplit) {
  std::mt19937_64 rng(25);
  std::vector<LatentNode> nodes;
  for (int i = 0; i < 50; ++i) {
    ControlVariable cv;
    cv.p = Quaternion(random_vec(4, rng)[0] + 2.0, 0.1, 0.0, 0.0).normalized();
    cv.f.force = random_vec(3, rng);
    nodes.emplace_back(random_vec(kFeatureDim, rng), cv);
  }
  const GmmModel m = fit_em(nodes, 2, EmConfig{});
  EXPECT_EQ(m.input_dim, kFeatureDim);
  EXPECT_EQ(m.output_dim, kControlDim);
  EXPECT_EQ(m.dim(), kNodeDim);
}

}  // namespace
}  // namespace uskill
