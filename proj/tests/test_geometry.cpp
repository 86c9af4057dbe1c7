#include <doctest.h>

#include <random>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/geometry/projection.hpp"
#include "fringeslam/geometry/types.hpp"
#include "test_support.hpp"

using namespace fringeslam;
using namespace fringeslam::geometry;
using test_support::random_rotation;
using test_support::random_transform;
using test_support::random_vector;

namespace {

// Independent oracle: plain triple-loop product of K (3x3) and [R|t] (3x4).
Mat34 product_oracle(const Intrinsics& intr, const Extrinsics& extr) {
  double k[3][3] = {{intr.fx, 0, intr.u0}, {0, intr.fy, intr.v0}, {0, 0, 1}};
  double rt[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rt[r][c] = extr.rotation(r, c);
    rt[r][3] = extr.translation(r);
  }
  Mat34 a = Mat34::Zero();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < 3; ++i) a(r, c) += k[r][i] * rt[i][c];
  return a;
}

// Independent oracle: homogeneous product and explicit divide.
Vec2 project_oracle(const Mat34& a, const Vec3& x) {
  double h[3] = {0, 0, 0};
  const double xh[4] = {x.x(), x.y(), x.z(), 1.0};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) h[r] += a(r, c) * xh[c];
  return {h[0] / h[2], h[1] / h[2]};
}

Intrinsics desk_camera_intrinsics() { return {600.0, 600.0, 320.0, 200.0}; }

Extrinsics offset_projector_extrinsics() {
  Extrinsics e;
  e.rotation = axis_angle_rotation(Vec3(0, 1, 0), -0.24);
  e.translation = Vec3(-140.0, 2.0, 18.0);
  return e;
}

}  // namespace

TEST_CASE("projection matrix of an identity rig is [I | 0]") {
  const Mat34 a = build_projection_matrix({1, 1, 0, 0}, {});
  Mat34 expected = Mat34::Zero();
  expected.leftCols<3>() = Mat3::Identity();
  CHECK((a - expected).norm() == 0.0);
}

TEST_CASE("projection matrix equals the matrix-product oracle") {
  std::mt19937_64 rng(7001);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_real_distribution<double> f(200.0, 1500.0);
    std::uniform_real_distribution<double> c(100.0, 900.0);
    Intrinsics intr{f(rng), f(rng), c(rng), c(rng)};
    Extrinsics extr{random_rotation(rng), random_vector(rng, 400)};
    const Mat34 a = build_projection_matrix(intr, extr);
    const Mat34 oracle = product_oracle(intr, extr);
    CHECK((a - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("projection matrix rejects bad calibration") {
  CHECK_THROWS_AS(build_projection_matrix({-1, 600, 0, 0}, {}), ConfigError);
  CHECK_THROWS_AS(build_projection_matrix({0, 600, 0, 0}, {}), ConfigError);
  Extrinsics skewed;
  skewed.rotation(0, 1) = 0.5;  // not orthonormal
  CHECK_THROWS_AS(build_projection_matrix({600, 600, 0, 0}, skewed), ConfigError);
  Extrinsics mirrored;
  mirrored.rotation = Mat3::Identity();
  mirrored.rotation(2, 2) = -1;  // reflection
  CHECK_THROWS_AS(build_projection_matrix({600, 600, 0, 0}, mirrored), ConfigError);
}

TEST_CASE("project: canonical pinhole divide") {
  Mat34 a = Mat34::Zero();
  a.leftCols<3>() = Mat3::Identity();
  const Vec2 p = project(a, {2, 4, 2});
  CHECK(p.x() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.y() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("project matches the homogeneous oracle and ignores matrix scale") {
  std::mt19937_64 rng(7002);
  for (int trial = 0; trial < 200; ++trial) {
    Intrinsics intr = desk_camera_intrinsics();
    Extrinsics extr{random_rotation(rng), random_vector(rng, 200)};
    const Mat34 a = build_projection_matrix(intr, extr);
    Vec3 x = random_vector(rng, 300);
    // Keep the point safely in front of the device.
    if (std::abs((extr.rotation * x + extr.translation).z()) < 10.0) continue;
    const Vec2 p = project(a, x);
    const Vec2 oracle = project_oracle(a, x);
    CHECK((p - oracle).norm() < 1e-10);
    const Vec2 scaled = project(Mat34(2.5 * a), x);
    CHECK((p - scaled).norm() < 1e-9);
  }
}

TEST_CASE("project throws on points in the principal plane") {
  Mat34 a = Mat34::Zero();
  a.leftCols<3>() = Mat3::Identity();
  CHECK_THROWS_AS(project(a, {1.0, 1.0, 0.0}), DegeneracyError);
}

TEST_CASE("triangulate inverts forward projection exactly") {
  std::mt19937_64 rng(7003);
  const Mat34 ac = build_projection_matrix(desk_camera_intrinsics(), {});
  const Mat34 ap = build_projection_matrix({700, 700, 228, 285}, offset_projector_extrinsics());

  int tested = 0;
  std::uniform_real_distribution<double> ux(-150, 150), uy(-100, 100), uz(450, 800);
  while (tested < 500) {
    const Vec3 x(ux(rng), uy(rng), uz(rng));
    const Vec2 pc = project(ac, x);
    const Vec2 pp = project(ap, x);
    const Vec3 recovered = triangulate(pc, pp.x(), ac, ap);
    CHECK((recovered - x).norm() < 1e-9);
    ++tested;
  }
}

TEST_CASE("triangulate rejects near-parallel rays") {
  // Coincident devices: the projector row is a linear combination of the
  // camera rows, so the 3x3 system is singular.
  const Mat34 a = build_projection_matrix(desk_camera_intrinsics(), {});
  CHECK_THROWS_AS(triangulate({320, 200}, 320.0, a, a), DegeneracyError);
}

TEST_CASE("rigid transform composition matches pointwise application") {
  std::mt19937_64 rng(7004);
  for (int trial = 0; trial < 200; ++trial) {
    const RigidTransform t1 = random_transform(rng);
    const RigidTransform t2 = random_transform(rng);
    const RigidTransform c = compose(t1, t2);
    for (int k = 0; k < 5; ++k) {
      const Vec3 x = random_vector(rng, 500);
      CHECK((c.apply(x) - t1.apply(t2.apply(x))).norm() < 1e-9);
    }
  }
}

TEST_CASE("invert is a two-sided inverse") {
  std::mt19937_64 rng(7005);
  for (int trial = 0; trial < 200; ++trial) {
    const RigidTransform t = random_transform(rng);
    const RigidTransform i1 = compose(t, invert(t));
    const RigidTransform i2 = compose(invert(t), t);
    CHECK(rotation_angle(i1.rotation()) < 1e-12);
    CHECK(i1.translation().norm() < 1e-9);
    CHECK(rotation_angle(i2.rotation()) < 1e-12);
    CHECK(i2.translation().norm() < 1e-9);
  }
}

TEST_CASE("long composition chains stay orthonormal") {
  std::mt19937_64 rng(7006);
  RigidTransform acc;
  std::vector<RigidTransform> steps;
  for (int k = 0; k < 10000; ++k) {
    const RigidTransform t = random_transform(rng, 10);
    steps.push_back(t);
    acc = compose(acc, t);
  }
  CHECK(orthonormality_error(acc.rotation()) < 1e-6);
  // Walk back down the chain; the round trip should cancel.
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) acc = compose(acc, invert(*it));
  CHECK(rotation_angle(acc.rotation()) < 1e-6);
  CHECK(acc.translation().norm() < 1e-3);
}

TEST_CASE("transform_delta is zero only for equal transforms") {
  std::mt19937_64 rng(7007);
  const RigidTransform t = random_transform(rng);
  const TransformDelta self = transform_delta(t, t);
  CHECK(self.angle_rad < 1e-12);
  CHECK(self.translation_mm < 1e-12);
  const RigidTransform other = compose(t, {axis_angle_rotation({0, 0, 1}, 1e-3), Vec3(0.5, 0, 0)});
  const TransformDelta d = transform_delta(other, t);
  CHECK(d.angle_rad == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(d.translation_mm > 0.1);
}
