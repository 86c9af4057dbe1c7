#include "fringeslam/geometry/projection.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "fringeslam/core/errors.hpp"

namespace fringeslam::geometry {

Mat34 build_projection_matrix(const Intrinsics& intrinsics, const Extrinsics& extrinsics) {
  validate(intrinsics);
  validate(extrinsics);
  Mat34 rt;
  rt.leftCols<3>() = extrinsics.rotation;
  rt.col(3) = extrinsics.translation;
  return intrinsics.matrix() * rt;
}

Vec2 project(const Mat34& projection, const Vec3& point) {
  const Eigen::Vector3d h = projection * point.homogeneous();
  if (std::abs(h.z()) < 1e-12)
    throw DegeneracyError("project: point at infinity for this view");
  return {h.x() / h.z(), h.y() / h.z()};
}

Vec3 triangulate(const Vec2& camera_pixel, double projector_u,
                 const Mat34& camera_projection, const Mat34& projector_projection,
                 const TriangulationOptions& options) {
  const Mat34& ac = camera_projection;
  const Mat34& ap = projector_projection;
  const double uc = camera_pixel.x();
  const double vc = camera_pixel.y();

  // Eliminating the homogeneous scales from u*s = A.row(0)*X, v*s = A.row(1)*X,
  // s = A.row(2)*X gives one linear equation per measured coordinate.
  Mat3 m;
  Vec3 rhs;
  m.row(0) = ac.row(0).head<3>() - uc * ac.row(2).head<3>();
  m.row(1) = ac.row(1).head<3>() - vc * ac.row(2).head<3>();
  m.row(2) = ap.row(0).head<3>() - projector_u * ap.row(2).head<3>();
  rhs(0) = uc * ac(2, 3) - ac(0, 3);
  rhs(1) = vc * ac(2, 3) - ac(1, 3);
  rhs(2) = projector_u * ap(2, 3) - ap(0, 3);

  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > 0) || sv(0) / sv(2) > options.condition_limit)
    throw DegeneracyError("triangulate: near-parallel rays");
  return svd.solve(rhs);
}

}  // namespace fringeslam::geometry
