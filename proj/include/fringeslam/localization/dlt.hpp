#pragma once

#include <Eigen/Core>
#include <vector>

#include "fringeslam/geometry/types.hpp"

namespace fringeslam::localization {

using geometry::Mat3;
using geometry::Mat34;
using geometry::Vec2;
using geometry::Vec3;

// One 3D-2D correspondence: a map point in world millimetres against its
// observed image position in pixels.
struct Match3D2D {
  Vec3 world;
  Vec2 pixel;
};

// The stacked homogeneous system A f = 0 over the 12 projection unknowns.
// Each match contributes two rows:
//   [x y z 1 0 0 0 0 -ux -uy -uz -u]
//   [0 0 0 0 x y z 1 -vx -vy -vz -v]
// The matches are kept alongside the raw matrix so the solver can recondition
// them and fix the solution's overall sign from the observed depths.
struct DltSystem {
  Eigen::MatrixXd coefficients;  // 2N x 12
  std::vector<Match3D2D> matches;
};

// Builds the 2N x 12 system. Throws DataError when fewer than 6 matches are
// given (12 unknowns, two equations per match) or any value is non-finite.
DltSystem build_dlt_system(const std::vector<Match3D2D>& matches);

struct ProjectionEstimate {
  // Unit Frobenius norm, sign chosen so the matches sit at positive depth.
  Mat34 matrix;
  // Smallest singular value of the conditioned system; zero for exact input.
  double residual = 0;
};

// Least-squares projection matrix for the system: the right singular vector
// of the smallest singular value. Both point sets are similarity-normalized
// (centroid to the origin, RMS radius sqrt(2) for pixels and sqrt(3) for
// world points) before the solve and the effect undone after; the raw system
// is numerically fragile at real-world coordinate scales. Throws
// DegeneracyError when the solution is not unique up to scale, which is the
// classic failure of all-coplanar world points.
ProjectionEstimate solve_projection_dlt(const DltSystem& system);

// Splits a projection into the world-to-camera rigid motion, given the
// intrinsics that were factored into it: M = K^-1 [F_left | F_right] equals
// s [R | T] for some scale s, recovered from the unit row norms of a rotation
// (s = 3 / sum of row norms), with the sign fixed so det R = +1. R is the
// nearest rotation to the scaled block; if that projection moves the block by
// more than 0.1 Frobenius the input was not a rigid projection and a
// DegeneracyError is thrown.
geometry::RigidTransform decompose_projection(const Mat34& projection,
                                              const geometry::Intrinsics& intrinsics);

// Sensor position in world coordinates: O_w = -R^T T. The homogeneous point
// (O_w, 1) spans the projection's null space.
Vec3 camera_center(const geometry::RigidTransform& camera_from_world);

}  // namespace fringeslam::localization
