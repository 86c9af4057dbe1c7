#pragma once

#include "fringeslam/geometry/types.hpp"

namespace fringeslam::geometry {

// A = K [R | t], the full 3x4 pinhole projection. Validates both inputs.
Mat34 build_projection_matrix(const Intrinsics& intrinsics, const Extrinsics& extrinsics);

// Perspective projection of a world point. Throws DegeneracyError when the
// point lies on the principal plane (homogeneous scale ~ 0).
Vec2 project(const Mat34& projection, const Vec3& point);

struct TriangulationOptions {
  // Reject pixel/column pairs whose 3x3 system is worse conditioned than
  // this; near-parallel camera and projector rays land here.
  double condition_limit = 1e12;
};

// Intersects the camera ray through camera_pixel with the projector plane of
// constant column projector_u. Two rows come from the camera projection, one
// from the projector's u row; the 3x3 solve is exact for consistent input.
Vec3 triangulate(const Vec2& camera_pixel, double projector_u,
                 const Mat34& camera_projection, const Mat34& projector_projection,
                 const TriangulationOptions& options = {});

}  // namespace fringeslam::geometry
