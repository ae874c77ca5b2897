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

#ifndef USKILL_MC_BASELINE_HPP_
#define USKILL_MC_BASELINE_HPP_

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "uskill/types.hpp"

namespace uskill {

/// Per-dimension range of the control variable over the training set;
/// defines the region Monte-Carlo candidates are drawn from.
struct SampleBounds {
  Eigen::VectorXd lo;  // 10
  Eigen::VectorXd hi;  // 10

  static SampleBounds from_nodes(const std::vector<LatentNode>& nodes) {
    if (nodes.empty()) {
      throw std::invalid_argument("SampleBounds: empty node list");
    }
    SampleBounds b;
    b.lo = nodes[0].w.flatten();
    b.hi = b.lo;
    for (const auto& n : nodes) {
      const Eigen::VectorXd w = n.w.flatten();
      b.lo = b.lo.cwiseMin(w);
      b.hi = b.hi.cwiseMax(w);
    }
    return b;
  }

  bool degenerate() const { return (hi - lo).maxCoeff() <= 0.0; }
};

struct MlpConfig {
  std::vector<int> hidden = {128, 64};
  double learning_rate = 1e-2;
  int epochs = 300;
  unsigned seed = 0;
};

/// Score network over 50-D joint nodes: logistic hidden layers, identity
/// output. Trained to score demonstrated nodes high and perturbed ones low.
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // layer l: out_l x in_l
  std::vector<Eigen::VectorXd> biases;
  MlpConfig config;

  int layer_count() const { return static_cast<int>(weights.size()); }

  static MlpModel init(const MlpConfig& cfg) {
    MlpModel m;
    m.config = cfg;
    std::vector<int> sizes;
    sizes.push_back(kNodeDim);
    for (int h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(1);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
      Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
      for (int i = 0; i < w.size(); ++i) w.data()[i] = scale * gauss(rng);
      m.weights.push_back(std::move(w));
      m.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    }
    return m;
  }

  /// Scores each row of X (n x 50). Hidden layers use the logistic
  /// function, the output layer is linear.
  Eigen::VectorXd score_rows(const Eigen::MatrixXd& X) const {
    if (X.cols() != kNodeDim) {
      throw std::invalid_argument("MlpModel: input must have 50 columns");
    }
    Eigen::MatrixXd a = X.transpose();
    for (int l = 0; l < layer_count(); ++l) {
      a = (weights[l] * a).colwise() + biases[l];
      if (l + 1 < layer_count()) {
        a = (1.0 / (1.0 + (-a.array()).exp())).matrix();
      }
    }
    return a.row(0).transpose();
  }

  double score(const Eigen::VectorXd& node) const {
    return score_rows(node.transpose())[0];
  }
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean squared error between scores of the rows of X and targets, with
/// optional analytic backprop gradients.
inline double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& targets,
                       MlpGradients* grads = nullptr) {
  if (X.rows() != targets.size()) {
    throw std::invalid_argument("mlp_loss: row/target count mismatch");
  }
  const int L = m.layer_count();
  const double n = static_cast<double>(X.rows());

  std::vector<Eigen::MatrixXd> activations;  // post-activation, incl. input
  activations.reserve(L + 1);
  activations.push_back(X.transpose());
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd a = (m.weights[l] * activations.back()).colwise() +
                        m.biases[l];
    if (l + 1 < L) a = (1.0 / (1.0 + (-a.array()).exp())).matrix();
    activations.push_back(std::move(a));
  }
  const Eigen::VectorXd scores = activations.back().row(0).transpose();
  const Eigen::VectorXd err = scores - targets;
  const double loss = err.squaredNorm() / n;

  if (grads) {
    grads->weights.resize(L);
    grads->biases.resize(L);
    Eigen::MatrixXd delta = (2.0 / n) * err.transpose();  // 1 x n
    for (int l = L - 1; l >= 0; --l) {
      grads->weights[l] = delta * activations[l].transpose();
      grads->biases[l] = delta.rowwise().sum();
      if (l > 0) {
        const auto& a = activations[l];  // logistic outputs
        delta = ((m.weights[l].transpose() * delta).array() * a.array() *
                 (1.0 - a.array()))
                    .matrix();
      }
    }
  }
  return loss;
}

struct MlpTrace {
  std::vector<double> loss;  // per epoch, before each update
  double final_loss = 0.0;
};

/// Contrastive training: demonstration nodes are positives (target 1),
/// negatives are the same nodes with the control part re-sampled uniformly
/// within the training bounds (target 0). Full-batch gradient descent.
inline std::pair<MlpModel, SampleBounds> train_mlp(
    const std::vector<LatentNode>& nodes, const MlpConfig& cfg,
    MlpTrace* trace = nullptr) {
  if (nodes.size() < 10) {
    throw std::invalid_argument("train_mlp: need at least 10 nodes");
  }
  const SampleBounds bounds = SampleBounds::from_nodes(nodes);
  if (bounds.degenerate()) {
    throw std::invalid_argument("train_mlp: degenerate sample bounds");
  }
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd X(2 * n, kNodeDim);
  Eigen::VectorXd targets(2 * n);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    X.row(i) = nodes[i].flatten().transpose();
    targets[i] = 1.0;
    Eigen::VectorXd neg = X.row(i).transpose();
    for (int j = 0; j < kControlDim; ++j) {
      neg[kFeatureDim + j] =
          bounds.lo[j] + unif(rng) * (bounds.hi[j] - bounds.lo[j]);
    }
    X.row(n + i) = neg.transpose();
    targets[n + i] = 0.0;
  }

  MlpModel model = MlpModel::init(cfg);
  MlpGradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = mlp_loss(model, X, targets, &grads);
    if (trace) trace->loss.push_back(loss);
    for (int l = 0; l < model.layer_count(); ++l) {
      model.weights[l] -= cfg.learning_rate * grads.weights[l];
      model.biases[l] -= cfg.learning_rate * grads.biases[l];
    }
  }
  if (trace) trace->final_loss = mlp_loss(model, X, targets);
  return {model, bounds};
}

/// Draws the candidate control variables for one query; candidate i+1's
/// random draws follow candidate i's in a single seed-determined stream,
/// so a larger n_samples extends (not reshuffles) a smaller one.
inline std::vector<Eigen::VectorXd> draw_candidates(const SampleBounds& bounds,
                                                    int n_samples,
                                                    unsigned seed) {
  if (n_samples < 1) {
    throw std::invalid_argument("draw_candidates: need n_samples >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    Eigen::VectorXd w(kControlDim);
    for (int j = 0; j < kControlDim; ++j) {
      w[j] = bounds.lo[j] + unif(rng) * (bounds.hi[j] - bounds.lo[j]);
    }
    const double qn = w.head<4>().norm();
    if (qn < 1e-6) {
      w.head<4>() << 1.0, 0.0, 0.0, 0.0;
    } else {
      w.head<4>() /= qn;
    }
    out.push_back(std::move(w));
  }
  return out;
}

/// Monte-Carlo prediction: score every candidate joint node and return the
/// best-scoring control variable (lowest index wins ties).
inline ControlVariable mc_predict(const MlpModel& mlp,
                                  const SampleBounds& bounds,
                                  const Eigen::VectorXd& v, int n_samples,
                                  unsigned seed, double* best_score = nullptr) {
  if (v.size() != kFeatureDim) {
    throw std::invalid_argument("mc_predict: feature vector must be 40-D");
  }
  const auto candidates = draw_candidates(bounds, n_samples, seed);
  Eigen::MatrixXd X(n_samples, kNodeDim);
  for (int i = 0; i < n_samples; ++i) {
    X.row(i).head(kFeatureDim) = v.transpose();
    X.row(i).tail(kControlDim) = candidates[i].transpose();
  }
  const Eigen::VectorXd scores = mlp.score_rows(X);
  int best = 0;
  for (int i = 1; i < n_samples; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  if (best_score) *best_score = scores[best];
  return ControlVariable::unflatten(candidates[best]);
}

}  // namespace uskill

#endif  // USKILL_MC_BASELINE_HPP_
