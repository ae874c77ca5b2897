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

#include "uskill/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "uskill/synth.hpp"

namespace uskill {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("uskill_io_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST_F(IoTest, DatasetRoundTripIsExact) {
  GenConfig cfg;
  cfg.subjects = 3;
  cfg.demos_per_subject = 2;
  cfg.duration_s = 5.0;
  cfg.rate_hz = 4.0;
  cfg.seed = 5;
  const Dataset ds = generate_dataset(cfg);
  save_dataset(ds, dir_);
  const Dataset back = load_dataset(dir_);

  ASSERT_EQ(back.subjects.size(), ds.subjects.size());
  for (size_t si = 0; si < ds.subjects.size(); ++si) {
    const auto& a = ds.subjects[si];
    const auto& b = back.subjects[si];
    EXPECT_EQ(a.meta.id, b.meta.id);
    EXPECT_EQ(a.meta.age, b.meta.age);
    EXPECT_EQ(a.meta.gender, b.meta.gender);
    EXPECT_DOUBLE_EQ(a.meta.height_m, b.meta.height_m);
    EXPECT_DOUBLE_EQ(a.meta.weight_kg, b.meta.weight_kg);
    ASSERT_EQ(a.demos.size(), b.demos.size());
    for (size_t di = 0; di < a.demos.size(); ++di) {
      ASSERT_EQ(a.demos[di].size(), b.demos[di].size());
      for (size_t fi = 0; fi < a.demos[di].size(); ++fi) {
        const Frame& fa = a.demos[di][fi];
        const Frame& fb = b.demos[di][fi];
        // setprecision(17) makes the text representation lossless.
        EXPECT_EQ(fa.timestamp, fb.timestamp);
        EXPECT_TRUE(fa.w.flatten().isApprox(fb.w.flatten(), 0.0));
        ASSERT_TRUE(fb.features.has_value());
        EXPECT_TRUE(fa.features->isApprox(*fb.features, 0.0));
      }
    }
  }
}

TEST_F(IoTest, ImageSidecarRoundTripWithinQuantization) {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(kImageSize, kImageSize);
  for (int i = 0; i < img.size(); ++i) img.data()[i] = u(rng);
  const fs::path p = dir_ / "img.raw";
  save_image_sidecar(img, p);
  const Image back = load_image_sidecar(p);
  EXPECT_LE((back - img).cwiseAbs().maxCoeff(), 0.5f / 255.0f + 1e-6f);
}

TEST_F(IoTest, ImageFramesSurviveRoundTrip) {
  GenConfig cfg;
  cfg.subjects = 1;
  cfg.demos_per_subject = 1;
  cfg.duration_s = 5.0;
  cfg.rate_hz = 0.4;
  cfg.with_images = true;
  const Dataset ds = generate_dataset(cfg);
  save_dataset(ds, dir_);
  const Dataset back = load_dataset(dir_);
  const auto& demo = back.subjects[0].demos[0];
  ASSERT_EQ(demo.size(), 2u);
  for (size_t i = 0; i < demo.size(); ++i) {
    ASSERT_TRUE(demo[i].image.has_value());
    EXPECT_LE((*demo[i].image - *ds.subjects[0].demos[0][i].image)
                  .cwiseAbs()
                  .maxCoeff(),
              0.5f / 255.0f + 1e-6f);
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

TEST_F(IoTest, NonMonotoneTimestampsRejected) {
  write_file(dir_ / "subject_1.traj",
             "uskill-trajectory v1\n"
             "subject 1 30 male 1.75 70\n"
             "demo 2\n"
             "0.2 1 0 0 0 0 0 1 0 0 0\n"
             "0.1 1 0 0 0 0 0 1 0 0 0\n");
  EXPECT_THROW(load_dataset(dir_), SchemaError);
}

TEST_F(IoTest, WrongFeatureDimensionRejected) {
  std::string line = "0.1 1 0 0 0 0 0 1 0 0 0 v";
  for (int i = 0; i < 39; ++i) line += " 0.5";
  write_file(dir_ / "subject_1.traj",
             "uskill-trajectory v1\n"
             "subject 1 30 male 1.75 70\n"
             "demo 2\n"
             "0 1 0 0 0 0 0 1 0 0 0\n" +
                 line + "\n");
  EXPECT_THROW(load_dataset(dir_), SchemaError);
}

TEST_F(IoTest, MalformedFilesFailWithParseError) {
  write_file(dir_ / "subject_1.traj", "not-a-header\nsubject 1\n");
  EXPECT_THROW(load_dataset(dir_), ParseError);

  write_file(dir_ / "subject_1.traj",
             "uskill-trajectory v1\n"
             "subject 1 30 male 1.75 seventy\n");
  EXPECT_THROW(load_dataset(dir_), ParseError);

  write_file(dir_ / "subject_1.traj",
             "uskill-trajectory v1\n"
             "subject 1 30 male 1.75 70\n"
             "demo 3\n"
             "0 1 0 0 0 0 0 1 0 0 0\n");  // truncated
  EXPECT_THROW(load_dataset(dir_), ParseError);
}

TEST_F(IoTest, MissingDirectoryOrEmptyDirectoryRejected) {
  EXPECT_THROW(load_dataset(dir_ / "nope"), ParseError);
  EXPECT_THROW(load_dataset(dir_), ParseError);
}

GmmModel small_gmm() {
  std::mt19937_64 rng(92);
  std::normal_distribution<double> g(0.0, 1.0);
  GmmModel m;
  m.input_dim = 2;
  m.output_dim = 1;
  m.weights = Eigen::Vector2d(0.4, 0.6);
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd mu(3);
    for (int i = 0; i < 3; ++i) mu[i] = g(rng);
    Eigen::MatrixXd A(3, 3);
    for (int i = 0; i < 9; ++i) A.data()[i] = g(rng);
    m.components.emplace_back(
        mu, A * A.transpose() + Eigen::MatrixXd::Identity(3, 3));
  }
  return m;
}

TEST_F(IoTest, GmmRoundTripIsExact) {
  const GmmModel m = small_gmm();
  const fs::path p = dir_ / "model.gmm";
  save_gmm(m, p);
  const GmmModel back = load_gmm(p);
  EXPECT_EQ(back.input_dim, m.input_dim);
  EXPECT_EQ(back.output_dim, m.output_dim);
  EXPECT_TRUE(back.weights.isApprox(m.weights, 0.0));
  for (int k = 0; k < m.K(); ++k) {
    EXPECT_TRUE(back.components[k].mean().isApprox(
        m.components[k].mean(), 0.0));
    EXPECT_TRUE(back.components[k].covariance().isApprox(
        m.components[k].covariance(), 0.0));
  }
}

TEST_F(IoTest, GmmRejectsBadHeaderAndBadCovariance) {
  write_file(dir_ / "bad.gmm", "uskill-gmm v2\n");
  EXPECT_THROW(load_gmm(dir_ / "bad.gmm"), ParseError);

  // Indefinite covariance (lower triangle of diag(1, -1)).
  write_file(dir_ / "bad2.gmm",
             "uskill-gmm v1\n"
             "K 1 dims 1 1\n"
             "weights\n1\n"
             "component 0\n"
             "0 0\n"
             "1 0 -1\n");
  EXPECT_THROW(load_gmm(dir_ / "bad2.gmm"), SchemaError);
}

TEST_F(IoTest, EncoderRoundTripIsExact) {
  EncoderConfig cfg;
  cfg.latent_width = 6;
  cfg.learning_rate = 0.005;
  cfg.epochs = 17;
  cfg.seed = 99;
  const EncoderModel m = EncoderModel::init(cfg);
  const fs::path p = dir_ / "model.enc";
  save_encoder(m, p);
  const EncoderModel back = load_encoder(p);
  EXPECT_EQ(back.latent_width(), m.latent_width());
  EXPECT_EQ(back.mask.kept, m.mask.kept);
  EXPECT_EQ(back.mask.seed, m.mask.seed);
  EXPECT_DOUBLE_EQ(back.config.learning_rate, m.config.learning_rate);
  EXPECT_EQ(back.config.epochs, m.config.epochs);
  EXPECT_TRUE(back.enc_weight.isApprox(m.enc_weight, 0.0));
  EXPECT_TRUE(back.enc_bias.isApprox(m.enc_bias, 0.0));
  EXPECT_TRUE(back.dec_weight.isApprox(m.dec_weight, 0.0));
  EXPECT_TRUE(back.dec_bias.isApprox(m.dec_bias, 0.0));
}

TEST_F(IoTest, MlpRoundTripIsExact) {
  MlpConfig cfg;
  cfg.hidden = {5, 3};
  cfg.learning_rate = 0.125;
  cfg.epochs = 42;
  cfg.seed = 7;
  const MlpModel m = MlpModel::init(cfg);
  SampleBounds bounds;
  bounds.lo = -Eigen::VectorXd::Ones(kControlDim);
  bounds.hi = 2.0 * Eigen::VectorXd::Ones(kControlDim);
  const fs::path p = dir_ / "model.mlp";
  save_mlp(m, bounds, p);
  const auto [back, bb] = load_mlp(p);
  ASSERT_EQ(back.layer_count(), m.layer_count());
  EXPECT_EQ(back.config.hidden, m.config.hidden);
  for (int l = 0; l < m.layer_count(); ++l) {
    EXPECT_TRUE(back.weights[l].isApprox(m.weights[l], 0.0));
    EXPECT_TRUE(back.biases[l].isApprox(m.biases[l], 0.0));
  }
  EXPECT_TRUE(bb.lo.isApprox(bounds.lo, 0.0));
  EXPECT_TRUE(bb.hi.isApprox(bounds.hi, 0.0));

  // Loaded model scores identically.
  const Eigen::VectorXd x = Eigen::VectorXd::Random(kNodeDim);
  EXPECT_DOUBLE_EQ(back.score(x), m.score(x));
}

TEST_F(IoTest, NumericTextIsLossless) {
  // Spot-check fmt on awkward doubles: round-trip through text is identity.
  for (double v : {1.0 / 3.0, 1e-17, 123456.789012345678, -0.1,
                   2.2250738585072014e-308}) {
    EXPECT_EQ(std::stod(io_detail::fmt(v)), v);
  }
}

}  // namespace
}  // namespace uskill
