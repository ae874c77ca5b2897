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

#ifndef USKILL_STABILITY_HPP_
#define USKILL_STABILITY_HPP_

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <vector>

#include "uskill/gmm.hpp"
#include "uskill/types.hpp"

namespace uskill {

/// Per-component log-likelihood range over the m-sigma Mahalanobis
/// ellipsoid. The Gaussian log density is b_k - maha^2/2, so over the
/// ellipsoid the max is the peak and the min is the peak minus m^2/2.
struct LikelihoodBounds {
  Eigen::VectorXd lower;  // a_k
  Eigen::VectorXd upper;  // b_k
  double sigma_level = 3.0;
  int K = 0;
  int dim = 0;
};

inline LikelihoodBounds likelihood_bounds(const GmmModel& model, double m) {
  if (m <= 0.0) {
    throw std::invalid_argument("likelihood_bounds: sigma level must be > 0");
  }
  LikelihoodBounds b;
  b.sigma_level = m;
  b.K = model.K();
  b.dim = model.dim();
  b.lower.resize(b.K);
  b.upper.resize(b.K);
  for (int k = 0; k < b.K; ++k) {
    b.upper[k] = model.components[k].peak_log_density();
    b.lower[k] = b.upper[k] - 0.5 * m * m;
  }
  return b;
}

/// Empirical alternative: range of each component's log density over the
/// reference points that fall inside its m-sigma ellipsoid. Components with
/// no such point get an empty (infinite) range.
inline LikelihoodBounds likelihood_bounds_empirical(
    const GmmModel& model, const std::vector<LatentNode>& reference,
    double m) {
  if (m <= 0.0) {
    throw std::invalid_argument("likelihood_bounds: sigma level must be > 0");
  }
  LikelihoodBounds b;
  b.sigma_level = m;
  b.K = model.K();
  b.dim = model.dim();
  b.lower = Eigen::VectorXd::Constant(b.K,
                                      std::numeric_limits<double>::infinity());
  b.upper = Eigen::VectorXd::Constant(
      b.K, -std::numeric_limits<double>::infinity());
  for (const auto& node : reference) {
    const Eigen::VectorXd d = node.flatten();
    for (int k = 0; k < b.K; ++k) {
      const double maha = model.components[k].mahalanobis(d);
      if (maha <= m) {
        const double ll = model.components[k].log_density(d);
        b.lower[k] = std::min(b.lower[k], ll);
        b.upper[k] = std::max(b.upper[k], ll);
      }
    }
  }
  return b;
}

struct StabilityVerdict {
  bool stable = false;
  int best_component = 0;  // argmin_k mahalanobis, lowest index on ties
  Eigen::VectorXd log_likelihoods;  // per-component log density of the node
  double sigma_level = 3.0;
};

/// Stable iff some component's log density of the node lies inside that
/// component's [a_k, b_k] range.
inline StabilityVerdict classify(const GmmModel& model,
                                 const LikelihoodBounds& bounds,
                                 const LatentNode& node) {
  if (bounds.K != model.K() || bounds.dim != model.dim()) {
    throw std::invalid_argument("classify: bounds built from another model");
  }
  const Eigen::VectorXd d = node.flatten();
  StabilityVerdict verdict;
  verdict.sigma_level = bounds.sigma_level;
  verdict.log_likelihoods.resize(model.K());
  double best_maha = std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.K(); ++k) {
    const double maha = model.components[k].mahalanobis(d);
    verdict.log_likelihoods[k] = model.components[k].log_density(d);
    if (maha < best_maha) {
      best_maha = maha;
      verdict.best_component = k;
    }
    if (verdict.log_likelihoods[k] >= bounds.lower[k] &&
        verdict.log_likelihoods[k] <= bounds.upper[k]) {
      verdict.stable = true;
    }
  }
  return verdict;
}

}  // namespace uskill

#endif  // USKILL_STABILITY_HPP_
