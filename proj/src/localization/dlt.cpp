#include "fringeslam/localization/dlt.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "fringeslam/core/errors.hpp"

namespace fringeslam::localization {
namespace {

// Similarity that moves the centroid to the origin and scales the RMS radius
// to sqrt(dim): the standard conditioning for homogeneous least squares.
template <typename Vec>
Eigen::Matrix<double, Vec::RowsAtCompileTime + 1, Vec::RowsAtCompileTime + 1> conditioning(
    const std::vector<Match3D2D>& matches, Vec Match3D2D::*member) {
  constexpr int dim = Vec::RowsAtCompileTime;
  Vec centroid = Vec::Zero();
  for (const auto& m : matches) centroid += m.*member;
  centroid /= static_cast<double>(matches.size());
  double sum_sq = 0;
  for (const auto& m : matches) sum_sq += (m.*member - centroid).squaredNorm();
  const double rms = std::sqrt(sum_sq / static_cast<double>(matches.size()));
  const double scale = rms > 0 ? std::sqrt(static_cast<double>(dim)) / rms : 1.0;
  Eigen::Matrix<double, dim + 1, dim + 1> t = Eigen::Matrix<double, dim + 1, dim + 1>::Identity();
  t.template topLeftCorner<dim, dim>() *= scale;
  t.template topRightCorner<dim, 1>() = -scale * centroid;
  return t;
}

void fill_rows(Eigen::MatrixXd& a, int row, const Vec3& w, const Vec2& px) {
  a.row(row) << w.x(), w.y(), w.z(), 1, 0, 0, 0, 0, -px.x() * w.x(), -px.x() * w.y(),
      -px.x() * w.z(), -px.x();
  a.row(row + 1) << 0, 0, 0, 0, w.x(), w.y(), w.z(), 1, -px.y() * w.x(), -px.y() * w.y(),
      -px.y() * w.z(), -px.y();
}

}  // namespace

DltSystem build_dlt_system(const std::vector<Match3D2D>& matches) {
  if (matches.size() < 6)
    throw DataError("build_dlt_system: need at least 6 matches, got " +
                    std::to_string(matches.size()));
  for (const auto& m : matches)
    if (!m.world.allFinite() || !m.pixel.allFinite())
      throw DataError("build_dlt_system: non-finite match");
  DltSystem system;
  system.coefficients.resize(2 * static_cast<int>(matches.size()), 12);
  for (std::size_t i = 0; i < matches.size(); ++i)
    fill_rows(system.coefficients, 2 * static_cast<int>(i), matches[i].world, matches[i].pixel);
  system.matches = matches;
  return system;
}

ProjectionEstimate solve_projection_dlt(const DltSystem& system) {
  const auto& matches = system.matches;
  if (system.coefficients.rows() != 2 * static_cast<Eigen::Index>(matches.size()) ||
      system.coefficients.cols() != 12)
    throw DataError("solve_projection_dlt: malformed system");

  const Eigen::Matrix3d t_px = conditioning(matches, &Match3D2D::pixel);
  const Eigen::Matrix4d t_world = conditioning(matches, &Match3D2D::world);

  Eigen::MatrixXd conditioned(system.coefficients.rows(), 12);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const Eigen::Vector4d w = t_world * matches[i].world.homogeneous();
    const Eigen::Vector3d p = t_px * matches[i].pixel.homogeneous();
    fill_rows(conditioned, 2 * static_cast<int>(i), w.head<3>() / w.w(), p.head<2>() / p.z());
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(conditioned,
                                              Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A unique direction needs rank 11: eleven well-separated singular values
  // ahead of the nullish twelfth. Coplanar world points leave a multi-
  // dimensional null space (any row-times-plane outer product annihilates
  // the system) and land here.
  if (sv(10) < 1e-8 * sv(0))
    throw DegeneracyError("solve_projection_dlt: degenerate configuration (coplanar points?)");

  Mat34 normalized;
  const Eigen::VectorXd f = svd.matrixV().col(11);
  normalized.row(0) = f.segment<4>(0);
  normalized.row(1) = f.segment<4>(4);
  normalized.row(2) = f.segment<4>(8);

  // Undo the conditioning: the normalized solution maps conditioned world
  // points to conditioned pixels, so chain the similarities back on.
  Mat34 matrix = t_px.inverse() * normalized * t_world;
  matrix /= matrix.norm();

  // A homogeneous solve fixes the sign arbitrarily; observed points must come
  // out at positive depth (positive homogeneous scale).
  int positive = 0;
  for (const auto& m : matches)
    positive += (matrix.row(2) * m.world.homogeneous()) > 0 ? 1 : -1;
  if (positive < 0) matrix = -matrix;

  return {matrix, sv(11)};
}

geometry::RigidTransform decompose_projection(const Mat34& projection,
                                              const geometry::Intrinsics& intrinsics) {
  const Mat3 k_inv = intrinsics.matrix().inverse();
  Mat3 m = k_inv * projection.leftCols<3>();
  Vec3 t = k_inv * projection.col(3);
  // For F = s K [R | T] the block m is s R: rows of unit norm up to the
  // common scale, and det m carries the sign of s^3.
  if (m.determinant() < 0) {
    m = -m;
    t = -t;
  }
  const double row_norm_sum = m.row(0).norm() + m.row(1).norm() + m.row(2).norm();
  if (row_norm_sum < 1e-12)
    throw DegeneracyError("decompose_projection: zero rotation block");
  const double scale = 3.0 / row_norm_sum;
  const Mat3 scaled = scale * m;
  const Mat3 rotation = geometry::nearest_rotation(scaled);
  if ((rotation - scaled).norm() > 0.1)
    throw DegeneracyError("decompose_projection: left block is not a scaled rotation");
  return {rotation, scale * t};
}

Vec3 camera_center(const geometry::RigidTransform& camera_from_world) {
  return -(camera_from_world.rotation().transpose() * camera_from_world.translation());
}

}  // namespace fringeslam::localization
