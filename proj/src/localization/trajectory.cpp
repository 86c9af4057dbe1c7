#include "fringeslam/localization/trajectory.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/localization/dlt.hpp"

namespace fringeslam::localization {

SensorPose make_sensor_pose(int frame_id, const RigidTransform& camera_from_world) {
  return {frame_id, camera_from_world, camera_center(camera_from_world)};
}

void validate(const Trajectory& trajectory) {
  int last_id = std::numeric_limits<int>::min();
  for (const SensorPose& pose : trajectory.poses) {
    if (pose.frame_id <= last_id)
      throw DataError("trajectory: frame ids must strictly increase (got " +
                      std::to_string(pose.frame_id) + " after " + std::to_string(last_id) + ")");
    last_id = pose.frame_id;
    if ((pose.center - camera_center(pose.camera_from_world)).norm() > 1e-9)
      throw DataError("trajectory: center disagrees with its transform at frame " +
                      std::to_string(pose.frame_id));
  }
}

Trajectory redistribute_loop_drift(const Trajectory& trajectory, const RigidTransform& closure) {
  const std::size_t n = trajectory.poses.size();
  if (n < 2) return trajectory;
  const Vec3 anchor = trajectory.poses.front().center;
  // Conjugate about the first pose's center so a rotational error swings the
  // trajectory around its start instead of around the world origin.
  const RigidTransform about_anchor(
      closure.rotation(), closure.rotation() * anchor + closure.translation() - anchor);
  const Eigen::AngleAxisd rotation(about_anchor.rotation());

  Trajectory corrected = trajectory;
  for (std::size_t k = 1; k < n; ++k) {
    const double fraction = static_cast<double>(k) / static_cast<double>(n - 1);
    // Pose k is modeled as carrying this fraction of the error; the
    // correction removes exactly that, so interpolate forward then invert.
    const RigidTransform partial = geometry::invert(
        RigidTransform(geometry::axis_angle_rotation(rotation.axis(), fraction * rotation.angle()),
                       fraction * about_anchor.translation()));
    // World-side correction applied about the anchor point.
    const RigidTransform correction(partial.rotation(),
                                    partial.translation() + anchor - partial.rotation() * anchor);
    const RigidTransform placement =
        geometry::compose(correction, geometry::invert(trajectory.poses[k].camera_from_world));
    corrected.poses[k] =
        make_sensor_pose(trajectory.poses[k].frame_id, geometry::invert(placement));
  }
  return corrected;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  validate(trajectory);
  std::ofstream out(path);
  if (!out) throw DataError("save_trajectory_csv: cannot write " + path.string());
  out << "frame_id,x_mm,y_mm,z_mm,r00,r01,r02,r10,r11,r12,r20,r21,r22\n";
  for (const SensorPose& pose : trajectory.poses) {
    out << pose.frame_id;
    for (int i = 0; i < 3; ++i) out << "," << format_double(pose.center(i));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << "," << format_double(pose.camera_from_world.rotation()(r, c));
    out << "\n";
  }
  if (!out) throw DataError("save_trajectory_csv: write failed for " + path.string());
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_trajectory_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame_id,", 0) != 0)
    throw DataError("load_trajectory_csv: missing header in " + path.string());
  Trajectory trajectory;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int frame_id = 0;
    double v[12];
    const int fields = std::sscanf(
        line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &frame_id, &v[0],
        &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7], &v[8], &v[9], &v[10], &v[11]);
    if (fields != 13)
      throw DataError("load_trajectory_csv: malformed row in " + path.string() + ": " + line);
    const Vec3 center(v[0], v[1], v[2]);
    geometry::Mat3 rotation;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rotation(r, c) = v[3 + 3 * r + c];
    if (geometry::orthonormality_error(rotation) > 1e-6)
      throw DataError("load_trajectory_csv: row carries a non-rotation matrix: " + line);
    // T = -R O_w inverts the center equation; rebuild rather than store twice.
    trajectory.poses.push_back(
        make_sensor_pose(frame_id, RigidTransform(rotation, -(rotation * center))));
  }
  validate(trajectory);
  return trajectory;
}

}  // namespace fringeslam::localization
