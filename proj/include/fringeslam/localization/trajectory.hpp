#pragma once

#include <filesystem>
#include <vector>

#include "fringeslam/geometry/types.hpp"

namespace fringeslam::localization {

using geometry::RigidTransform;
using geometry::Vec3;

// One localized frame. camera_from_world maps world points into the camera
// frame (x_c = R x_w + T); center is the sensor position in world
// coordinates, always regenerated as -R^T T rather than stored independently.
struct SensorPose {
  int frame_id = -1;
  RigidTransform camera_from_world;
  Vec3 center = Vec3::Zero();
};

SensorPose make_sensor_pose(int frame_id, const RigidTransform& camera_from_world);

struct Trajectory {
  std::vector<SensorPose> poses;
};

// Throws DataError unless frame ids strictly increase and every center agrees
// with its transform to 1e-9.
void validate(const Trajectory& trajectory);

// Spreads a measured loop-closure error over the trajectory. closure is the
// pose error accumulated over the full loop expressed in world coordinates:
// estimated placement of the loop's end = closure o its true placement, so
// identity means the loop already closes. Pose k receives the inverse error
// interpolated at fraction k/(n-1) (rotation by axis-angle fraction about the
// first pose's center, translation linearly), leaving the first pose fixed
// and correcting the last one exactly.
Trajectory redistribute_loop_drift(const Trajectory& trajectory, const RigidTransform& closure);

// CSV schema, one row per frame after a header line:
//   frame_id, center x y z (mm), camera_from_world rotation row-major (9)
// Ground-truth trajectories use the identical schema so files can be diffed.
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
Trajectory load_trajectory_csv(const std::filesystem::path& path);

}  // namespace fringeslam::localization
