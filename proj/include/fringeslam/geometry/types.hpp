#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fringeslam::geometry {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// All lengths in this codebase are millimetres; pixel coordinates follow the
// image convention with u along columns and v along rows.

struct Intrinsics {
  double fx = 0, fy = 0, u0 = 0, v0 = 0;

  Mat3 matrix() const {
    Mat3 k = Mat3::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = u0;
    k(1, 2) = v0;
    return k;
  }
};

// Maps reference-frame points into the device frame: X_dev = R * X_ref + t.
struct Extrinsics {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

// Throw ConfigError on non-finite or non-physical values / non-orthonormal R.
void validate(const Intrinsics& intrinsics);
void validate(const Extrinsics& extrinsics);

// Frobenius distance of R^T R from identity; 0 for an exact rotation.
double orthonormality_error(const Mat3& rotation);

// Nearest rotation with det +1 (polar factor via SVD).
Mat3 nearest_rotation(const Mat3& m);

// Rotation angle in [0, pi].
double rotation_angle(const Mat3& rotation);

Mat3 axis_angle_rotation(const Vec3& axis, double angle);

// Proper rigid motion x -> R x + t.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return {}; }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

// (a o b)(x) = a(b(x)). Renormalizes the rotation when accumulated roundoff
// exceeds 1e-9 so long composition chains stay proper rigid motions.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

RigidTransform invert(const RigidTransform& t);

// Rotation angle plus translation norm of a o b^-1; both zero iff a == b.
struct TransformDelta {
  double angle_rad = 0;
  double translation_mm = 0;
};
TransformDelta transform_delta(const RigidTransform& a, const RigidTransform& b);

}  // namespace fringeslam::geometry
