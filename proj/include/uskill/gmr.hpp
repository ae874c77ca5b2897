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

#ifndef USKILL_GMR_HPP_
#define USKILL_GMR_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "uskill/gmm.hpp"
#include "uskill/types.hpp"

namespace uskill {

/// Conditional distribution of the output block given an input vector.
struct GmrPrediction {
  Eigen::VectorXd mean;              // conditional mean of the output block
  Eigen::MatrixXd covariance;        // sum_k h_k^2 * conditional covariance_k
  Eigen::VectorXd responsibilities;  // h_k(v), sums to 1
  std::vector<Eigen::VectorXd> component_means;  // per-component cond. means
  bool out_of_support = false;  // every input density underflowed
};

/// Gaussian-conditioning regression over a fitted mixture. Per-component
/// input-block factorizations and conditional covariances are computed once
/// at construction; queries only pay for triangular solves.
class GmrEngine {
 public:
  explicit GmrEngine(const GmmModel& model) : model_(model) {
    model.validate();
    const int di = model.input_dim;
    const int dw = model.output_dim;
    const int K = model.K();
    comps_.resize(K);
    for (int k = 0; k < K; ++k) {
      const auto& c = model.components[k];
      Comp& e = comps_[k];
      e.mu_v = c.mean().head(di);
      e.mu_w = c.mean().tail(dw);
      const Eigen::MatrixXd s_vv = c.covariance().topLeftCorner(di, di);
      e.s_wv = c.covariance().bottomLeftCorner(dw, di);
      const Eigen::MatrixXd s_ww = c.covariance().bottomRightCorner(dw, dw);
      e.llt_vv.compute(s_vv);
      if (e.llt_vv.info() != Eigen::Success) {
        throw std::invalid_argument(
            "GmrEngine: input block not positive definite");
      }
      e.log_norm =
          std::log(model.weights[k]) -
          0.5 * (2.0 * Eigen::MatrixXd(e.llt_vv.matrixL())
                           .diagonal()
                           .array()
                           .log()
                           .sum() +
                 di * kLog2Pi);
      e.cond_cov = s_ww - e.s_wv * e.llt_vv.solve(e.s_wv.transpose());
    }
  }

  const GmmModel& model() const { return model_; }

  GmrPrediction predict(const Eigen::VectorXd& v) const {
    const int di = model_.input_dim;
    const int dw = model_.output_dim;
    if (v.size() != di) {
      throw std::invalid_argument("GmrEngine::predict: input dim mismatch");
    }
    const int K = static_cast<int>(comps_.size());

    GmrPrediction pred;
    pred.component_means.resize(K);
    Eigen::VectorXd log_h(K);
    for (int k = 0; k < K; ++k) {
      const Comp& e = comps_[k];
      const Eigen::VectorXd diff = v - e.mu_v;
      const Eigen::VectorXd solved = e.llt_vv.solve(diff);
      log_h[k] = e.log_norm - 0.5 * diff.dot(solved);
      pred.component_means[k] = e.mu_w + e.s_wv * solved;
    }

    const double mx = log_h.maxCoeff();
    pred.out_of_support = mx < -700.0;
    Eigen::VectorXd h = (log_h.array() - mx).exp();
    h /= h.sum();
    pred.responsibilities = h;

    pred.mean = Eigen::VectorXd::Zero(dw);
    pred.covariance = Eigen::MatrixXd::Zero(dw, dw);
    for (int k = 0; k < K; ++k) {
      pred.mean += h[k] * pred.component_means[k];
      pred.covariance += h[k] * h[k] * comps_[k].cond_cov;
    }
    pred.covariance = 0.5 * (pred.covariance + pred.covariance.transpose());
    return pred;
  }

 private:
  struct Comp {
    Eigen::VectorXd mu_v, mu_w;
    Eigen::MatrixXd s_wv;
    Eigen::LLT<Eigen::MatrixXd> llt_vv;
    Eigen::MatrixXd cond_cov;  // constant in v
    double log_norm = 0.0;     // log pi_k - (logdet + di log 2pi)/2
  };

  GmmModel model_;
  std::vector<Comp> comps_;
};

inline GmrPrediction predict(const GmmModel& m, const Eigen::VectorXd& v) {
  return GmrEngine(m).predict(v);
}

/// Splits a 10-D prediction mean into a renormalized quaternion and wrench.
/// `renorm_factor`, when given, receives the pre-normalization norm.
inline ControlVariable prediction_to_control(const GmrPrediction& pred,
                                             double* renorm_factor = nullptr) {
  if (pred.mean.size() != kControlDim) {
    throw std::invalid_argument("prediction_to_control: need 10-D mean");
  }
  ControlVariable cv = ControlVariable::unflatten(pred.mean);
  const double n = cv.p.norm();
  if (renorm_factor) *renorm_factor = n;
  cv.p = cv.p.normalized();  // throws DegenerateOrientationError if n < 1e-6
  return cv;
}

}  // namespace uskill

#endif  // USKILL_GMR_HPP_
