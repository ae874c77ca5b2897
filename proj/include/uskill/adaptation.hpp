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

#ifndef USKILL_ADAPTATION_HPP_
#define USKILL_ADAPTATION_HPP_

#include <Eigen/Core>

#include <limits>
#include <utility>

#include "uskill/gmm.hpp"
#include "uskill/gmr.hpp"
#include "uskill/stability.hpp"
#include "uskill/types.hpp"

namespace uskill {

/// Fine-tunes an unstable prediction: the control part is snapped to the
/// output-mean of the component nearest (in joint Mahalanobis distance) to
/// the full 50-D node. Stable predictions pass through unchanged. No
/// gradient step is ever taken on unstable nodes.
inline ControlVariable adapt(const GmmModel& model, const LatentNode& node,
                             const StabilityVerdict& verdict) {
  if (verdict.log_likelihoods.size() != model.K()) {
    throw std::invalid_argument("adapt: verdict from another model");
  }
  if (verdict.stable) {
    return node.w;
  }
  const Eigen::VectorXd d = node.flatten();
  int best = 0;
  double best_maha = std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.K(); ++k) {
    const double maha = model.components[k].mahalanobis(d);
    if (maha < best_maha) {
      best_maha = maha;
      best = k;
    }
  }
  ControlVariable cv = ControlVariable::unflatten(
      model.components[best].mean().tail(model.output_dim));
  cv.p = cv.p.normalized();  // throws on degenerate orientation
  return cv;
}

/// Full online pipeline for one query: regression, stability check,
/// adaptation. Returns the final control variable and the pre-adaptation
/// verdict.
inline std::pair<ControlVariable, StabilityVerdict> predict_adapted(
    const GmrEngine& engine, const LikelihoodBounds& bounds,
    const Eigen::VectorXd& v) {
  const GmrPrediction pred = engine.predict(v);
  const ControlVariable raw = prediction_to_control(pred);
  const LatentNode node(v, raw);
  const StabilityVerdict verdict = classify(engine.model(), bounds, node);
  return {adapt(engine.model(), node, verdict), verdict};
}

inline std::pair<ControlVariable, StabilityVerdict> predict_adapted(
    const GmmModel& model, const LikelihoodBounds& bounds,
    const Eigen::VectorXd& v) {
  return predict_adapted(GmrEngine(model), bounds, v);
}

}  // namespace uskill

#endif  // USKILL_ADAPTATION_HPP_
