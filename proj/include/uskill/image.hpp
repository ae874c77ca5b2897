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

#ifndef USKILL_IMAGE_HPP_
#define USKILL_IMAGE_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "uskill/types.hpp"

namespace uskill {

inline constexpr int kPatchSide = 28;
inline constexpr int kGridSide = 8;                        // 8x8 patches
inline constexpr int kPatchCount = kGridSide * kGridSide;  // 64
inline constexpr int kPatchDim = kPatchSide * kPatchSide;  // 784
inline constexpr int kKeptPatches = 40;

/// Center-crop to a square and bilinearly resample to 224x224, clamped to
/// [0,1]. A 224x224 input is returned unchanged.
inline Image preprocess(const Image& raw) {
  const int h = static_cast<int>(raw.rows());
  const int w = static_cast<int>(raw.cols());
  if (h == 0 || w == 0) {
    throw std::invalid_argument("preprocess: empty image");
  }
  if (h == kImageSize && w == kImageSize) {
    return raw.cwiseMax(0.0f).cwiseMin(1.0f);
  }
  const int side = std::min(h, w);
  const int r0 = (h - side) / 2;
  const int c0 = (w - side) / 2;
  const double scale = static_cast<double>(side) / kImageSize;

  Image out(kImageSize, kImageSize);
  for (int r = 0; r < kImageSize; ++r) {
    const double sr = std::clamp((r + 0.5) * scale - 0.5, 0.0,
                                 static_cast<double>(side - 1));
    const int r1 = static_cast<int>(sr);
    const int r2 = std::min(r1 + 1, side - 1);
    const double fr = sr - r1;
    for (int c = 0; c < kImageSize; ++c) {
      const double sc = std::clamp((c + 0.5) * scale - 0.5, 0.0,
                                   static_cast<double>(side - 1));
      const int c1 = static_cast<int>(sc);
      const int c2 = std::min(c1 + 1, side - 1);
      const double fc = sc - c1;
      const double top = (1.0 - fc) * raw(r0 + r1, c0 + c1) +
                         fc * raw(r0 + r1, c0 + c2);
      const double bot = (1.0 - fc) * raw(r0 + r2, c0 + c1) +
                         fc * raw(r0 + r2, c0 + c2);
      out(r, c) = static_cast<float>(
          std::clamp((1.0 - fr) * top + fr * bot, 0.0, 1.0));
    }
  }
  return out;
}

/// 64 patches of 28x28, row-major grid order: patch index = 8*gr + gc.
struct PatchGrid {
  std::vector<Image> patches;  // 64 blocks of 28x28

  /// Row-major flattening of one patch to a 784-vector.
  Eigen::VectorXd flat(int idx) const {
    Eigen::VectorXd v(kPatchDim);
    const Image& p = patches[idx];
    for (int r = 0; r < kPatchSide; ++r) {
      for (int c = 0; c < kPatchSide; ++c) {
        v[r * kPatchSide + c] = p(r, c);
      }
    }
    return v;
  }
};

inline PatchGrid patchify(const Image& img) {
  if (img.rows() != kImageSize || img.cols() != kImageSize) {
    throw std::invalid_argument("patchify: image must be 224x224");
  }
  PatchGrid grid;
  grid.patches.resize(kPatchCount);
  for (int gr = 0; gr < kGridSide; ++gr) {
    for (int gc = 0; gc < kGridSide; ++gc) {
      grid.patches[gr * kGridSide + gc] =
          img.block(gr * kPatchSide, gc * kPatchSide, kPatchSide, kPatchSide);
    }
  }
  return grid;
}

inline Image unpatchify(const PatchGrid& grid) {
  if (grid.patches.size() != kPatchCount) {
    throw std::invalid_argument("unpatchify: need 64 patches");
  }
  Image img(kImageSize, kImageSize);
  for (int gr = 0; gr < kGridSide; ++gr) {
    for (int gc = 0; gc < kGridSide; ++gc) {
      const Image& p = grid.patches[gr * kGridSide + gc];
      if (p.rows() != kPatchSide || p.cols() != kPatchSide) {
        throw std::invalid_argument("unpatchify: patch must be 28x28");
      }
      img.block(gr * kPatchSide, gc * kPatchSide, kPatchSide, kPatchSide) = p;
    }
  }
  return img;
}

/// Random 40-of-64 patch selection, reproducible from the seed.
struct MaskSelection {
  std::vector<int> kept;  // sorted, 40 distinct indices in [0, 64)
  unsigned seed = 0;

  bool is_kept(int idx) const {
    return std::binary_search(kept.begin(), kept.end(), idx);
  }

  std::vector<int> masked() const {
    std::vector<int> out;
    out.reserve(kPatchCount - kKeptPatches);
    for (int i = 0; i < kPatchCount; ++i) {
      if (!is_kept(i)) out.push_back(i);
    }
    return out;
  }
};

inline MaskSelection select_mask(unsigned seed) {
  std::vector<int> idx(kPatchCount);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  MaskSelection sel;
  sel.seed = seed;
  sel.kept.assign(idx.begin(), idx.begin() + kKeptPatches);
  std::sort(sel.kept.begin(), sel.kept.end());
  return sel;
}

struct EncoderConfig {
  int latent_width = 64;
  double learning_rate = 1e-3;
  int epochs = 200;
  unsigned seed = 0;
};

/// Single affine encoder + single affine decoder over flattened patches,
/// with a frozen 40/64 patch mask. Trained to reconstruct masked patches
/// from the pooled encoding of kept patches.
struct EncoderModel {
  Eigen::MatrixXd enc_weight;  // h x 784
  Eigen::VectorXd enc_bias;    // h
  Eigen::MatrixXd dec_weight;  // 784 x h
  Eigen::VectorXd dec_bias;    // 784
  MaskSelection mask;
  EncoderConfig config;

  int latent_width() const { return static_cast<int>(enc_bias.size()); }

  static EncoderModel init(const EncoderConfig& cfg) {
    if (cfg.latent_width < 1) {
      throw std::invalid_argument("EncoderModel: latent width must be >= 1");
    }
    EncoderModel m;
    m.config = cfg;
    m.mask = select_mask(cfg.seed);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double enc_scale = 1.0 / std::sqrt(static_cast<double>(kPatchDim));
    const double dec_scale =
        1.0 / std::sqrt(static_cast<double>(cfg.latent_width));
    m.enc_weight.resize(cfg.latent_width, kPatchDim);
    for (int i = 0; i < m.enc_weight.size(); ++i) {
      m.enc_weight.data()[i] = enc_scale * gauss(rng);
    }
    m.enc_bias = Eigen::VectorXd::Zero(cfg.latent_width);
    m.dec_weight.resize(kPatchDim, cfg.latent_width);
    for (int i = 0; i < m.dec_weight.size(); ++i) {
      m.dec_weight.data()[i] = dec_scale * gauss(rng);
    }
    m.dec_bias = Eigen::VectorXd::Zero(kPatchDim);
    return m;
  }
};

struct EncoderGradients {
  Eigen::MatrixXd enc_weight;
  Eigen::VectorXd enc_bias;
  Eigen::MatrixXd dec_weight;
  Eigen::VectorXd dec_bias;
};

/// Masked reconstruction loss over a batch of patch grids:
/// z = enc(mean of kept patches); the decoded z is compared against every
/// masked patch, per-pixel mean squared error, averaged over patches and
/// images. Optionally accumulates analytic gradients.
inline double masked_loss(const EncoderModel& m,
                          const std::vector<PatchGrid>& batch,
                          EncoderGradients* grads = nullptr) {
  if (batch.empty()) {
    throw std::invalid_argument("masked_loss: empty batch");
  }
  const auto masked_idx = m.mask.masked();
  const double n_img = static_cast<double>(batch.size());
  const double n_masked = static_cast<double>(masked_idx.size());
  if (grads) {
    grads->enc_weight = Eigen::MatrixXd::Zero(m.enc_weight.rows(),
                                              m.enc_weight.cols());
    grads->enc_bias = Eigen::VectorXd::Zero(m.enc_bias.size());
    grads->dec_weight = Eigen::MatrixXd::Zero(m.dec_weight.rows(),
                                              m.dec_weight.cols());
    grads->dec_bias = Eigen::VectorXd::Zero(m.dec_bias.size());
  }
  double loss = 0.0;
  for (const PatchGrid& grid : batch) {
    Eigen::VectorXd kept_mean = Eigen::VectorXd::Zero(kPatchDim);
    for (int idx : m.mask.kept) kept_mean += grid.flat(idx);
    kept_mean /= static_cast<double>(m.mask.kept.size());

    const Eigen::VectorXd z = m.enc_weight * kept_mean + m.enc_bias;
    const Eigen::VectorXd recon = m.dec_weight * z + m.dec_bias;

    Eigen::VectorXd err_mean = Eigen::VectorXd::Zero(kPatchDim);
    for (int idx : masked_idx) {
      const Eigen::VectorXd err = recon - grid.flat(idx);
      loss += err.squaredNorm() / (kPatchDim * n_masked * n_img);
      err_mean += err / n_masked;
    }
    if (grads) {
      const Eigen::VectorXd d_recon = 2.0 * err_mean / (kPatchDim * n_img);
      grads->dec_weight += d_recon * z.transpose();
      grads->dec_bias += d_recon;
      const Eigen::VectorXd dz = m.dec_weight.transpose() * d_recon;
      grads->enc_weight += dz * kept_mean.transpose();
      grads->enc_bias += dz;
    }
  }
  return loss;
}

struct EncoderTrace {
  std::vector<double> loss;  // per epoch, recorded before each update
  double final_loss = 0.0;
};

/// Full-batch gradient descent on the masked reconstruction loss.
inline EncoderModel train_encoder(const Dataset& ds, const EncoderConfig& cfg,
                                  EncoderTrace* trace = nullptr) {
  std::vector<PatchGrid> batch;
  for (const auto& s : ds.subjects) {
    for (const auto& demo : s.demos) {
      for (const auto& fr : demo) {
        if (fr.image) batch.push_back(patchify(*fr.image));
      }
    }
  }
  if (batch.empty()) {
    throw std::invalid_argument("train_encoder: dataset carries no images");
  }
  EncoderModel model = EncoderModel::init(cfg);
  EncoderGradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = masked_loss(model, batch, &grads);
    if (trace) trace->loss.push_back(loss);
    model.enc_weight -= cfg.learning_rate * grads.enc_weight;
    model.enc_bias -= cfg.learning_rate * grads.enc_bias;
    model.dec_weight -= cfg.learning_rate * grads.dec_weight;
    model.dec_bias -= cfg.learning_rate * grads.dec_bias;
  }
  if (trace) trace->final_loss = masked_loss(model, batch);
  return model;
}

/// Compresses a 224x224 image to the 40-D feature vector: each kept patch
/// is encoded, decoded, and reduced to the mean of its 784 reconstructed
/// values. Depends only on kept patches.
inline Eigen::VectorXd encode_features(const Image& img,
                                       const EncoderModel& enc) {
  const PatchGrid grid = patchify(img);
  if (enc.mask.kept.size() != kKeptPatches) {
    throw std::invalid_argument("encode_features: malformed mask");
  }
  Eigen::VectorXd v(kKeptPatches);
  for (int i = 0; i < kKeptPatches; ++i) {
    const Eigen::VectorXd p = grid.flat(enc.mask.kept[i]);
    const Eigen::VectorXd recon =
        enc.dec_weight * (enc.enc_weight * p + enc.enc_bias) + enc.dec_bias;
    v[i] = recon.mean();
  }
  return v;
}

}  // namespace uskill

#endif  // USKILL_IMAGE_HPP_
