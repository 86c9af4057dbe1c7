#include "fringeslam/geometry/types.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "fringeslam/core/errors.hpp"

namespace fringeslam::geometry {

void validate(const Intrinsics& intrinsics) {
  const double vals[] = {intrinsics.fx, intrinsics.fy, intrinsics.u0, intrinsics.v0};
  for (double v : vals)
    if (!std::isfinite(v)) throw ConfigError("intrinsics: non-finite entry");
  if (intrinsics.fx <= 0 || intrinsics.fy <= 0)
    throw ConfigError("intrinsics: focal lengths must be positive");
}

void validate(const Extrinsics& extrinsics) {
  if (!extrinsics.rotation.allFinite() || !extrinsics.translation.allFinite())
    throw ConfigError("extrinsics: non-finite entry");
  if (orthonormality_error(extrinsics.rotation) > 1e-9)
    throw ConfigError("extrinsics: rotation is not orthonormal");
  if (extrinsics.rotation.determinant() < 0)
    throw ConfigError("extrinsics: rotation is a reflection");
}

double orthonormality_error(const Mat3& rotation) {
  return (rotation.transpose() * rotation - Mat3::Identity()).norm();
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

double rotation_angle(const Mat3& rotation) {
  return Eigen::AngleAxisd(rotation).angle();
}

Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Mat3 r = a.rotation() * b.rotation();
  const Vec3 t = a.rotation() * b.translation() + a.translation();
  if (orthonormality_error(r) > 1e-9) r = nearest_rotation(r);
  return {r, t};
}

RigidTransform invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

TransformDelta transform_delta(const RigidTransform& a, const RigidTransform& b) {
  const RigidTransform d = compose(a, invert(b));
  return {rotation_angle(d.rotation()), d.translation().norm()};
}

}  // namespace fringeslam::geometry
