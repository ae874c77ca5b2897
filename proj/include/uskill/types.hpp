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

#ifndef USKILL_TYPES_HPP_
#define USKILL_TYPES_HPP_

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uskill {

inline constexpr int kImageSize = 224;
inline constexpr int kFeatureDim = 40;
inline constexpr int kControlDim = 10;
inline constexpr int kNodeDim = kFeatureDim + kControlDim;

/// Malformed input file (bad token, truncated record).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally valid file whose contents violate a dataset invariant.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prediction whose orientation part collapsed below renormalizable length.
class DegenerateOrientationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested train/test split cannot be formed from the given dataset.
class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unit quaternion, component order [w, x, y, z].
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Quaternion() = default;
  Quaternion(double w_, double x_, double y_, double z_)
      : w(w_), x(x_), y(y_), z(z_) {}

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  bool is_finite() const {
    return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) &&
           std::isfinite(z);
  }

  /// Returns the unit-length version; throws on near-zero input.
  Quaternion normalized() const {
    if (!is_finite()) {
      throw std::invalid_argument("Quaternion::normalized: non-finite input");
    }
    const double n = norm();
    if (n < 1e-6) {
      throw DegenerateOrientationError(
          "Quaternion::normalized: norm below 1e-6");
    }
    return Quaternion(w / n, x / n, y / n, z / n);
  }

  double dot(const Quaternion& o) const {
    return w * o.w + x * o.x + y * o.y + z * o.z;
  }

  /// Hamilton product.
  Quaternion operator*(const Quaternion& o) const {
    return Quaternion(w * o.w - x * o.x - y * o.y - z * o.z,
                      w * o.x + x * o.w + y * o.z - z * o.y,
                      w * o.y - x * o.z + y * o.w + z * o.x,
                      w * o.z + x * o.y - y * o.x + z * o.w);
  }

  static Quaternion identity() { return Quaternion(1.0, 0.0, 0.0, 0.0); }

  /// Rotation of `angle_rad` about a (normalized) axis.
  static Quaternion from_axis_angle(double ax, double ay, double az,
                                    double angle_rad) {
    const double n = std::sqrt(ax * ax + ay * ay + az * az);
    if (n < 1e-12) {
      throw std::invalid_argument("from_axis_angle: zero axis");
    }
    const double h = 0.5 * angle_rad;
    const double s = std::sin(h) / n;
    return Quaternion(std::cos(h), ax * s, ay * s, az * s);
  }
};

/// Geodesic angle between two unit quaternions in degrees, range [0, 180].
/// Sign-invariant: q and -q describe the same rotation.
inline double quat_angle_deg(const Quaternion& a, const Quaternion& b) {
  if (!a.is_finite() || !b.is_finite()) {
    throw std::invalid_argument("quat_angle_deg: non-finite input");
  }
  const double d = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(d) * 180.0 / M_PI;
}

/// Geodesic interpolation from a to b, t in [0, 1]. Takes the short arc.
inline Quaternion slerp(const Quaternion& a, const Quaternion& b, double t) {
  Quaternion end = b;
  double cos_half = a.dot(b);
  if (cos_half < 0.0) {
    end = Quaternion(-b.w, -b.x, -b.y, -b.z);
    cos_half = -cos_half;
  }
  if (cos_half > 1.0 - 1e-12) {
    // Nearly parallel: nlerp is numerically safer.
    Quaternion q(a.w + t * (end.w - a.w), a.x + t * (end.x - a.x),
                 a.y + t * (end.y - a.y), a.z + t * (end.z - a.z));
    return q.normalized();
  }
  const double half = std::acos(std::min(1.0, cos_half));
  const double s = std::sin(half);
  const double wa = std::sin((1.0 - t) * half) / s;
  const double wb = std::sin(t * half) / s;
  return Quaternion(wa * a.w + wb * end.w, wa * a.x + wb * end.x,
                    wa * a.y + wb * end.y, wa * a.z + wb * end.z)
      .normalized();
}

/// Contact force (N) and torque (Nm) at the probe tip.
struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();

  bool is_finite() const {
    return force.allFinite() && torque.allFinite();
  }
};

/// (force_error_N, torque_error_Nm) as Euclidean norms of the differences.
inline std::pair<double, double> wrench_errors(const Wrench& pred,
                                               const Wrench& truth) {
  if (!pred.is_finite() || !truth.is_finite()) {
    throw std::invalid_argument("wrench_errors: non-finite input");
  }
  return {(pred.force - truth.force).norm(),
          (pred.torque - truth.torque).norm()};
}

/// The 10-D robot-facing variable: probe orientation + contact wrench.
/// Flattens in the order [qw, qx, qy, qz, fx, fy, fz, tx, ty, tz].
struct ControlVariable {
  Quaternion p;
  Wrench f;

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(kControlDim);
    out << p.w, p.x, p.y, p.z, f.force, f.torque;
    return out;
  }

  static ControlVariable unflatten(const Eigen::VectorXd& v) {
    if (v.size() != kControlDim) {
      throw std::invalid_argument("ControlVariable::unflatten: need 10 dims");
    }
    ControlVariable cv;
    cv.p = Quaternion(v[0], v[1], v[2], v[3]);
    cv.f.force = v.segment<3>(4);
    cv.f.torque = v.segment<3>(7);
    return cv;
  }
};

/// A state embedded in latent space: 40 image features + control variable.
struct LatentNode {
  Eigen::VectorXd v;  // 40-D image features
  ControlVariable w;

  LatentNode() : v(Eigen::VectorXd::Zero(kFeatureDim)) {}
  LatentNode(Eigen::VectorXd v_, ControlVariable w_)
      : v(std::move(v_)), w(std::move(w_)) {
    if (v.size() != kFeatureDim) {
      throw std::invalid_argument("LatentNode: feature vector must be 40-D");
    }
  }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(kNodeDim);
    out.head(kFeatureDim) = v;
    out.tail(kControlDim) = w.flatten();
    return out;
  }

  static LatentNode unflatten(const Eigen::VectorXd& d) {
    if (d.size() != kNodeDim) {
      throw std::invalid_argument("LatentNode::unflatten: need 50 dims");
    }
    return LatentNode(d.head(kFeatureDim),
                      ControlVariable::unflatten(d.tail(kControlDim)));
  }
};

using Image = Eigen::MatrixXf;  // row-major semantics: (row, col), [0,1]

/// One recorded instant: timestamp, optional image and/or precomputed
/// features, and the control variable at that instant.
struct Frame {
  double timestamp = 0.0;
  std::optional<Image> image;            // 224x224, intensities in [0,1]
  std::optional<Eigen::VectorXd> features;  // pre-encoded 40-D v
  ControlVariable w;
};

using Demonstration = std::vector<Frame>;

enum class Gender { kMale, kFemale };
enum class BmiClass { kUnderweight, kNormal, kOverweight };

inline BmiClass bmi_class_of(double bmi) {
  if (bmi < 18.5) return BmiClass::kUnderweight;
  if (bmi >= 25.0) return BmiClass::kOverweight;
  return BmiClass::kNormal;
}

struct SubjectMeta {
  int id = 0;
  int age = 0;
  Gender gender = Gender::kMale;
  double height_m = 0.0;
  double weight_kg = 0.0;

  double bmi() const { return weight_kg / (height_m * height_m); }
  BmiClass bmi_class() const { return bmi_class_of(bmi()); }
};

struct Subject {
  SubjectMeta meta;
  std::vector<Demonstration> demos;
};

struct Dataset {
  std::vector<Subject> subjects;

  std::size_t frame_count() const {
    std::size_t n = 0;
    for (const auto& s : subjects) {
      for (const auto& d : s.demos) n += d.size();
    }
    return n;
  }
};

/// Checks the structural dataset invariants, throwing SchemaError on the
/// first violation. Demonstrations need >= 2 frames with strictly
/// increasing timestamps; every subject needs >= 1 demonstration.
inline void validate_dataset(const Dataset& ds) {
  for (const auto& s : ds.subjects) {
    if (s.demos.empty()) {
      throw SchemaError("subject " + std::to_string(s.meta.id) +
                        " has no demonstrations");
    }
    if (s.meta.height_m <= 0.0 || s.meta.weight_kg <= 0.0) {
      throw SchemaError("subject " + std::to_string(s.meta.id) +
                        " has non-positive height or weight");
    }
    for (std::size_t j = 0; j < s.demos.size(); ++j) {
      const auto& demo = s.demos[j];
      if (demo.size() < 2) {
        throw SchemaError("subject " + std::to_string(s.meta.id) + " demo " +
                          std::to_string(j) + " has fewer than 2 frames");
      }
      for (std::size_t i = 0; i < demo.size(); ++i) {
        const Frame& fr = demo[i];
        if (i > 0 && fr.timestamp <= demo[i - 1].timestamp) {
          throw SchemaError("subject " + std::to_string(s.meta.id) + " demo " +
                            std::to_string(j) +
                            ": timestamps not strictly increasing at frame " +
                            std::to_string(i));
        }
        if (!fr.w.p.is_finite() || !fr.w.f.is_finite()) {
          throw SchemaError("non-finite control variable");
        }
        if (fr.features && fr.features->size() != kFeatureDim) {
          throw SchemaError("feature vector with dimension " +
                            std::to_string(fr.features->size()) +
                            " (expected 40)");
        }
      }
    }
  }
}

}  // namespace uskill

#endif  // USKILL_TYPES_HPP_
