#include "fringeslam/pipeline/evaluate.hpp"

#include <cmath>
#include <string>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/registration/rigid_estimation.hpp"

namespace fringeslam::pipeline {

using geometry::RigidTransform;
using geometry::Vec3;

EvaluationReport evaluate_trajectories(const localization::Trajectory& estimated,
                                       const localization::Trajectory& truth) {
  if (estimated.poses.size() != truth.poses.size())
    throw DataError("evaluate_trajectories: " + std::to_string(estimated.poses.size()) +
                    " estimated poses against " + std::to_string(truth.poses.size()) + " truth");
  if (estimated.poses.empty()) throw DataError("evaluate_trajectories: empty trajectories");
  for (std::size_t i = 0; i < truth.poses.size(); ++i)
    if (estimated.poses[i].frame_id != truth.poses[i].frame_id)
      throw DataError("evaluate_trajectories: frame id mismatch at index " + std::to_string(i));

  // Alignment correspondences: centers plus a forward-axis offset per pose.
  // The offsets carry orientation into the fit, so even a straight-line
  // trajectory pins all six alignment degrees of freedom.
  constexpr double kAxisOffset = 50.0;  // mm
  const auto forward_point = [](const localization::SensorPose& pose) {
    return Vec3(pose.center +
                pose.camera_from_world.rotation().transpose() * Vec3(0, 0, kAxisOffset));
  };
  std::vector<registration::Correspondence3D> corrs;
  for (std::size_t i = 0; i < truth.poses.size(); ++i) {
    corrs.push_back({estimated.poses[i].center, truth.poses[i].center});
    corrs.push_back({forward_point(estimated.poses[i]), forward_point(truth.poses[i])});
  }
  RigidTransform alignment;
  try {
    alignment = registration::umeyama_rigid(corrs);
  } catch (const DegeneracyError&) {
    // Single pose (or pathologically collinear even with offsets): fall back
    // to the optimal pure translation.
    Vec3 shift = Vec3::Zero();
    for (std::size_t i = 0; i < truth.poses.size(); ++i)
      shift += truth.poses[i].center - estimated.poses[i].center;
    alignment = RigidTransform(geometry::Mat3::Identity(),
                               shift / static_cast<double>(truth.poses.size()));
  }

  EvaluationReport report;
  const RigidTransform alignment_inverse = geometry::invert(alignment);
  double sum_sq = 0;
  for (std::size_t i = 0; i < truth.poses.size(); ++i) {
    FramePoseError err;
    err.frame_id = truth.poses[i].frame_id;
    err.center_mm = (alignment.apply(estimated.poses[i].center) - truth.poses[i].center).norm();
    // The estimate expressed in the truth's world frame.
    const RigidTransform aligned =
        geometry::compose(estimated.poses[i].camera_from_world, alignment_inverse);
    err.rotation_rad = geometry::transform_delta(aligned, truth.poses[i].camera_from_world).angle_rad;
    sum_sq += err.center_mm * err.center_mm;
    report.frame_errors.push_back(err);
  }
  report.ate_rms_mm = std::sqrt(sum_sq / static_cast<double>(truth.poses.size()));

  // Loop residual: how far the estimate drifted between two visits of the
  // same true pose. Rigid alignment cancels in the difference.
  for (std::size_t k = 1; k < truth.poses.size(); ++k) {
    const auto revisit = geometry::transform_delta(truth.poses[k].camera_from_world,
                                                   truth.poses.front().camera_from_world);
    if (revisit.angle_rad < 1e-9 && revisit.translation_mm < 1e-9) {
      report.loop_residual_mm =
          (estimated.poses[k].center - estimated.poses.front().center).norm();
      report.loop_residual_rad =
          geometry::transform_delta(estimated.poses[k].camera_from_world,
                                    estimated.poses.front().camera_from_world)
              .angle_rad;
      break;
    }
  }
  return report;
}

}  // namespace fringeslam::pipeline
