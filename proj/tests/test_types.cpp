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

#include "uskill/types.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace uskill {
namespace {

Quaternion random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return Quaternion(g(rng), g(rng), g(rng), g(rng)).normalized();
}

TEST(Quaternion, NormalizationInvariant) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Quaternion q = random_unit_quat(rng);
    EXPECT_NEAR(q.norm(), 1.0, 1e-9);
  }
}

TEST(Quaternion, DegenerateNormalizeThrows) {
  EXPECT_THROW(Quaternion(1e-8, 0, 0, 0).normalized(),
               DegenerateOrientationError);
}

TEST(QuatAngle, IdentityIsZero) {
  EXPECT_DOUBLE_EQ(quat_angle_deg(Quaternion::identity(),
                                  Quaternion::identity()),
                   0.0);
}

TEST(QuatAngle, DoubleCoverIsZero) {
  std::mt19937_64 rng(11);
  const Quaternion q = random_unit_quat(rng);
  const Quaternion neg(-q.w, -q.x, -q.y, -q.z);
  EXPECT_NEAR(quat_angle_deg(q, neg), 0.0, 1e-9);
}

TEST(QuatAngle, NinetyAboutZ) {
  // 2*acos(sqrt(2)/2) = 90 degrees
  const double s = std::sqrt(2.0) / 2.0;
  EXPECT_NEAR(quat_angle_deg(Quaternion::identity(), Quaternion(s, 0, 0, s)),
              90.0, 1e-9);
}

TEST(QuatAngle, NonFiniteThrows) {
  Quaternion bad(std::nan(""), 0, 0, 0);
  EXPECT_THROW(quat_angle_deg(bad, Quaternion::identity()),
               std::invalid_argument);
}

TEST(QuatAngle, SymmetricSignInvariantTriangle) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Quaternion a = random_unit_quat(rng);
    const Quaternion b = random_unit_quat(rng);
    const Quaternion c = random_unit_quat(rng);
    EXPECT_NEAR(quat_angle_deg(a, b), quat_angle_deg(b, a), 1e-9);
    const Quaternion na(-a.w, -a.x, -a.y, -a.z);
    EXPECT_NEAR(quat_angle_deg(a, b), quat_angle_deg(na, b), 1e-9);
    EXPECT_LE(quat_angle_deg(a, c),
              quat_angle_deg(a, b) + quat_angle_deg(b, c) + 1e-9);
  }
}

TEST(WrenchErrors, ZeroOnIdentical) {
  Wrench w;
  w.force = Eigen::Vector3d(1, 0, 0);
  const auto [fe, te] = wrench_errors(w, w);
  EXPECT_DOUBLE_EQ(fe, 0.0);
  EXPECT_DOUBLE_EQ(te, 0.0);
}

TEST(WrenchErrors, ThreeFourFive) {
  Wrench a, b;
  a.force = Eigen::Vector3d(3, 4, 0);
  const auto [fe, te] = wrench_errors(a, b);
  EXPECT_DOUBLE_EQ(fe, 5.0);
  EXPECT_DOUBLE_EQ(te, 0.0);
}

TEST(WrenchErrors, TorqueOnly) {
  Wrench a, b;
  a.torque = Eigen::Vector3d(0, 0, 0.1);
  const auto [fe, te] = wrench_errors(a, b);
  EXPECT_DOUBLE_EQ(fe, 0.0);
  EXPECT_DOUBLE_EQ(te, 0.1);
}

TEST(ControlVariable, FlattenRoundTrip) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd raw(kControlDim);
    for (int k = 0; k < kControlDim; ++k) raw[k] = g(rng);
    raw.head<4>().normalize();
    const ControlVariable cv = ControlVariable::unflatten(raw);
    EXPECT_TRUE(cv.flatten().isApprox(raw, 0.0));  // exact
  }
}

TEST(ControlVariable, UnflattenWrongDimThrows) {
  EXPECT_THROW(ControlVariable::unflatten(Eigen::VectorXd::Zero(9)),
               std::invalid_argument);
}

TEST(LatentNode, DimensionIs50) {
  LatentNode n;
  EXPECT_EQ(n.flatten().size(), kNodeDim);
  EXPECT_THROW(LatentNode(Eigen::VectorXd::Zero(39), ControlVariable{}),
               std::invalid_argument);
}

TEST(SubjectMeta, BmiClasses) {
  SubjectMeta m;
  m.height_m = 1.65;
  m.weight_kg = 49;  // bmi 17.998...
  EXPECT_NEAR(m.bmi(), 17.9982, 1e-3);
  EXPECT_EQ(m.bmi_class(), BmiClass::kUnderweight);
  m.height_m = 1.60;
  m.weight_kg = 65;  // bmi 25.39
  EXPECT_EQ(m.bmi_class(), BmiClass::kOverweight);
  m.height_m = 1.70;
  m.weight_kg = 67;  // bmi 23.18
  EXPECT_EQ(m.bmi_class(), BmiClass::kNormal);
  EXPECT_EQ(bmi_class_of(18.5), BmiClass::kNormal);
  EXPECT_EQ(bmi_class_of(25.0), BmiClass::kOverweight);
}

TEST(ValidateDataset, CatchesBadStructure) {
  Dataset ds;
  Subject s;
  s.meta.id = 1;
  s.meta.height_m = 1.7;
  s.meta.weight_kg = 60;
  Frame f0, f1;
  f0.timestamp = 0.0;
  f1.timestamp = 0.1;
  s.demos.push_back({f0, f1});
  ds.subjects.push_back(s);
  EXPECT_NO_THROW(validate_dataset(ds));

  ds.subjects[0].demos[0][1].timestamp = 0.0;  // non-monotone
  EXPECT_THROW(validate_dataset(ds), SchemaError);
  ds.subjects[0].demos[0][1].timestamp = 0.1;

  ds.subjects[0].demos.push_back({f0});  // single frame
  EXPECT_THROW(validate_dataset(ds), SchemaError);
}

}  // namespace
}  // namespace uskill
