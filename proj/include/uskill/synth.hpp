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

#ifndef USKILL_SYNTH_HPP_
#define USKILL_SYNTH_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "uskill/types.hpp"

namespace uskill {

/// Scan-style parameters of one synthetic subject, a deterministic
/// function of the subject metadata and a seed.
struct SubjectProfile {
  SubjectMeta meta;
  double force_scale = 1.0;       // monotone in BMI
  Quaternion orientation_bias;    // age/gender dependent probe tilt
  double anatomy_phase = 0.0;     // per-subject scan-path phase offset
  double orientation_noise_deg = 1.0;
  double force_noise = 0.15;
  double feature_noise = 0.02;
};

inline SubjectProfile generate_subject(const SubjectMeta& meta,
                                       unsigned seed) {
  SubjectProfile prof;
  prof.meta = meta;
  prof.force_scale = 0.5 + 0.06 * (meta.bmi() - 16.0);
  const double deg = M_PI / 180.0;
  const double age_tilt = (meta.age / 67.0) * 10.0 * deg;
  const double gender_tilt =
      (meta.gender == Gender::kMale ? 5.0 : -5.0) * deg;
  prof.orientation_bias =
      Quaternion::from_axis_angle(1, 0, 0, age_tilt) *
      Quaternion::from_axis_angle(0, 1, 0, gender_tilt);
  std::mt19937_64 rng(seed ^ (static_cast<unsigned long long>(meta.id) << 32));
  std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
  prof.anatomy_phase = unif(rng);
  return prof;
}

/// Renders one 224x224 phantom: a bright ellipse over speckle, position and
/// size tracking the scan progress s in [0, 1].
inline Image render_phantom(double s, double phase, std::mt19937_64& rng) {
  Image img(kImageSize, kImageSize);
  std::uniform_real_distribution<double> speckle(0.0, 0.15);
  const double cx = 40.0 + 140.0 * s + 8.0 * std::sin(phase);
  const double cy = 112.0 + 30.0 * std::sin(2.0 * M_PI * s + phase);
  const double rx = 30.0 + 10.0 * std::sin(M_PI * s);
  const double ry = 22.0 + 6.0 * std::cos(M_PI * s + phase);
  for (int r = 0; r < kImageSize; ++r) {
    for (int c = 0; c < kImageSize; ++c) {
      const double dx = (c - cx) / rx;
      const double dy = (r - cy) / ry;
      double val = speckle(rng);
      if (dx * dx + dy * dy <= 1.0) val += 0.7;
      img(r, c) = static_cast<float>(std::min(1.0, val));
    }
  }
  return img;
}

/// Feature stand-in used when images are disabled: a Gaussian bump over the
/// 40 feature slots whose position moves monotonically with scan progress,
/// plus a force-coupled amplitude channel.
inline Eigen::VectorXd synth_features(double s, const SubjectProfile& prof,
                                      std::mt19937_64& rng) {
  Eigen::VectorXd v(kFeatureDim);
  const double center = 4.0 + 32.0 * s;
  // Amplitude carries a body-type cue so feature vectors are informative
  // about the force scale even for held-out subjects.
  const double amp = 0.4 + 0.03 * (prof.meta.bmi() - 16.0) +
                     0.05 * std::sin(prof.anatomy_phase);
  std::normal_distribution<double> noise(0.0, prof.feature_noise);
  for (int i = 0; i < kFeatureDim; ++i) {
    const double d = (i - center) / 4.0;
    v[i] = amp * std::exp(-0.5 * d * d) + noise(rng);
  }
  return v;
}

/// One synthetic demonstration: starts vertical, ramps into contact, then
/// follows a smooth profile-biased scan arc at the given rate.
inline Demonstration generate_demo(const SubjectProfile& prof,
                                   double duration_s, double rate_hz,
                                   unsigned seed, bool with_images = false) {
  if (duration_s < 5.0 || duration_s > 120.0) {
    throw std::invalid_argument("generate_demo: duration must be in [5,120] s");
  }
  if (rate_hz <= 0.0) {
    throw std::invalid_argument("generate_demo: rate must be positive");
  }
  const int n = static_cast<int>(std::lround(duration_s * rate_hz));
  const double deg = M_PI / 180.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Quaternion bias_total =
      prof.orientation_bias * Quaternion::from_axis_angle(1, 0, 0, 25.0 * deg);

  Demonstration demo;
  demo.reserve(n);
  double force_ar = 0.0;  // AR(1) noise state, correlated across frames
  for (int i = 0; i < n; ++i) {
    const double t = i / rate_hz;
    const double s = (n > 1) ? static_cast<double>(i) / (n - 1) : 0.0;
    const double ramp = std::min(1.0, s / 0.1);
    const double smooth = ramp * ramp * (3.0 - 2.0 * ramp);

    Frame fr;
    fr.timestamp = t;

    // Orientation: slerp toward the biased tilt plus a phase-coupled wobble.
    Quaternion q = slerp(Quaternion::identity(), bias_total, smooth);
    const double wob_y =
        12.0 * deg * std::sin(2.0 * M_PI * s + prof.anatomy_phase) * smooth;
    const double wob_z =
        8.0 * deg * std::sin(4.0 * M_PI * s + 0.5 * prof.anatomy_phase) *
        smooth;
    q = q * Quaternion::from_axis_angle(0, 1, 0, wob_y) *
        Quaternion::from_axis_angle(0, 0, 1, wob_z);
    const double ori_noise =
        prof.orientation_noise_deg * deg * gauss(rng) * smooth;
    q = q * Quaternion::from_axis_angle(0, 0, 1, ori_noise);
    fr.w.p = q.normalized();

    // Wrench: ramp to a plateau normal force scaled by the profile.
    force_ar = 0.9 * force_ar + 0.1 * gauss(rng);
    const double plateau = prof.force_scale * 10.0;
    const double fz = plateau * smooth *
                          (1.0 + 0.05 * std::sin(2.0 * M_PI * s +
                                                 prof.anatomy_phase)) +
                      prof.force_noise * force_ar * smooth;
    fr.w.f.force = Eigen::Vector3d(
        0.4 * plateau * smooth * std::sin(M_PI * s),
        0.3 * plateau * smooth * std::cos(M_PI * s + prof.anatomy_phase), fz);
    fr.w.f.torque =
        0.012 * plateau *
        Eigen::Vector3d(std::sin(2.0 * M_PI * s), std::cos(2.0 * M_PI * s),
                        0.5 * std::sin(M_PI * s + prof.anatomy_phase)) *
        smooth;

    if (with_images) {
      fr.image = render_phantom(s, prof.anatomy_phase, rng);
    } else {
      fr.features = synth_features(s, prof, rng);
    }
    demo.push_back(std::move(fr));
  }
  return demo;
}

/// Subject roster used by default: ids, ages, genders, and body types
/// matching the 24-volunteer cohort the task splits are defined over
/// (14 male, 10 female; BMI spanning underweight to overweight).
inline std::vector<SubjectMeta> default_roster() {
  // id, age, gender, height_m, weight_kg
  struct Row { int id, age; Gender g; double h, w; };
  static const Row rows[] = {
      {1, 19, Gender::kMale, 1.65, 49},   {2, 35, Gender::kMale, 1.74, 68},
      {3, 27, Gender::kMale, 1.72, 79},   {4, 25, Gender::kMale, 1.72, 62},
      {5, 23, Gender::kMale, 1.84, 90},   {6, 24, Gender::kMale, 1.62, 46},
      {7, 23, Gender::kMale, 1.79, 81},   {8, 23, Gender::kMale, 1.76, 53},
      {9, 22, Gender::kMale, 1.77, 80},   {10, 24, Gender::kMale, 1.82, 72},
      {11, 27, Gender::kMale, 1.81, 68},  {12, 36, Gender::kMale, 1.68, 54},
      {13, 67, Gender::kFemale, 1.60, 65}, {14, 24, Gender::kMale, 1.70, 67},
      {15, 22, Gender::kFemale, 1.62, 60}, {16, 23, Gender::kMale, 1.70, 55},
      {17, 19, Gender::kFemale, 1.58, 46}, {18, 24, Gender::kFemale, 1.63, 51},
      {19, 25, Gender::kFemale, 1.55, 55}, {20, 21, Gender::kFemale, 1.69, 60},
      {21, 19, Gender::kFemale, 1.54, 39}, {22, 19, Gender::kFemale, 1.61, 55},
      {23, 24, Gender::kFemale, 1.58, 50}, {24, 25, Gender::kFemale, 1.62, 49},
  };
  std::vector<SubjectMeta> roster;
  for (const Row& r : rows) {
    SubjectMeta m;
    m.id = r.id;
    m.age = r.age;
    m.gender = r.g;
    m.height_m = r.h;
    m.weight_kg = r.w;
    roster.push_back(m);
  }
  return roster;
}

struct GenConfig {
  int subjects = 24;
  int demos_per_subject = 5;
  double duration_s = 40.0;
  double rate_hz = 10.0;
  unsigned seed = 0;
  bool with_images = false;
};

/// Full synthetic corpus. Per-demo seeds follow the documented splitting
/// rule seed + subject_id * 1000 + demo_index, so demos are independent
/// and the whole corpus is reproducible.
inline Dataset generate_dataset(const GenConfig& cfg) {
  if (cfg.subjects < 1 || cfg.demos_per_subject < 1) {
    throw std::invalid_argument("generate_dataset: need >= 1 subject and demo");
  }
  const auto roster = default_roster();
  Dataset ds;
  for (int i = 0; i < cfg.subjects; ++i) {
    SubjectMeta meta = roster[i % roster.size()];
    meta.id = i + 1;
    Subject subj;
    subj.meta = meta;
    const SubjectProfile prof = generate_subject(meta, cfg.seed);
    for (int j = 0; j < cfg.demos_per_subject; ++j) {
      const unsigned demo_seed =
          cfg.seed + static_cast<unsigned>(meta.id) * 1000u +
          static_cast<unsigned>(j);
      subj.demos.push_back(generate_demo(prof, cfg.duration_s, cfg.rate_hz,
                                         demo_seed, cfg.with_images));
    }
    ds.subjects.push_back(std::move(subj));
  }
  return ds;
}

enum class SplitTask {
  kIntra,
  kInterPatient,
  kInterGender,
  kInterAge,
  kInterBmi
};

inline const char* split_task_name(SplitTask t) {
  switch (t) {
    case SplitTask::kIntra: return "intra";
    case SplitTask::kInterPatient: return "inter_patient";
    case SplitTask::kInterGender: return "inter_gender";
    case SplitTask::kInterAge: return "inter_age";
    case SplitTask::kInterBmi: return "inter_bmi";
  }
  return "?";
}

inline SplitTask split_task_from_name(const std::string& name) {
  if (name == "intra") return SplitTask::kIntra;
  if (name == "inter_patient") return SplitTask::kInterPatient;
  if (name == "inter_gender") return SplitTask::kInterGender;
  if (name == "inter_age") return SplitTask::kInterAge;
  if (name == "inter_bmi") return SplitTask::kInterBmi;
  throw std::invalid_argument("unknown task name: " + name);
}

/// Train/test partition for one task. Train and test are disjoint and
/// together cover the input dataset.
inline std::pair<Dataset, Dataset> make_split(const Dataset& ds,
                                              SplitTask task) {
  Dataset train, test;
  auto by_subject = [&](auto test_pred) {
    for (const auto& s : ds.subjects) {
      (test_pred(s.meta) ? test : train).subjects.push_back(s);
    }
  };
  switch (task) {
    case SplitTask::kIntra: {
      for (const auto& s : ds.subjects) {
        if (s.demos.size() < 2) {
          throw SplitError("intra split needs >= 2 demos per subject");
        }
        Subject tr, te;
        tr.meta = te.meta = s.meta;
        tr.demos.assign(s.demos.begin(), s.demos.end() - 1);
        te.demos.push_back(s.demos.back());
        train.subjects.push_back(std::move(tr));
        test.subjects.push_back(std::move(te));
      }
      break;
    }
    case SplitTask::kInterPatient: {
      if (ds.subjects.size() < 3) {
        throw SplitError("inter_patient split needs >= 3 subjects");
      }
      std::vector<int> ids;
      for (const auto& s : ds.subjects) ids.push_back(s.meta.id);
      std::sort(ids.begin(), ids.end());
      const int cut = ids[ids.size() - 2];
      by_subject([&](const SubjectMeta& m) { return m.id >= cut; });
      break;
    }
    case SplitTask::kInterGender: {
      by_subject(
          [](const SubjectMeta& m) { return m.gender == Gender::kFemale; });
      break;
    }
    case SplitTask::kInterAge: {
      std::vector<std::pair<int, int>> age_id;  // (age, id), oldest first
      for (const auto& s : ds.subjects) {
        age_id.emplace_back(s.meta.age, s.meta.id);
      }
      std::sort(age_id.begin(), age_id.end(), [](auto a, auto b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      const std::size_t quart = (age_id.size() + 3) / 4;
      std::vector<int> test_ids;
      for (std::size_t i = 0; i < quart; ++i) test_ids.push_back(age_id[i].second);
      by_subject([&](const SubjectMeta& m) {
        return std::find(test_ids.begin(), test_ids.end(), m.id) !=
               test_ids.end();
      });
      break;
    }
    case SplitTask::kInterBmi: {
      by_subject([](const SubjectMeta& m) {
        return m.bmi_class() != BmiClass::kNormal;
      });
      break;
    }
  }
  if (train.subjects.empty() || test.subjects.empty()) {
    throw SplitError(std::string("split '") + split_task_name(task) +
                     "' produced an empty side");
  }
  return {std::move(train), std::move(test)};
}

/// Flattens every frame that carries precomputed features into latent nodes.
inline std::vector<LatentNode> collect_nodes(const Dataset& ds) {
  std::vector<LatentNode> nodes;
  nodes.reserve(ds.frame_count());
  for (const auto& s : ds.subjects) {
    for (const auto& d : s.demos) {
      for (const auto& fr : d) {
        if (fr.features) nodes.emplace_back(*fr.features, fr.w);
      }
    }
  }
  return nodes;
}

}  // namespace uskill

#endif  // USKILL_SYNTH_HPP_
