#pragma once

#include <vector>

#include "fringeslam/localization/trajectory.hpp"

namespace fringeslam::pipeline {

struct FramePoseError {
  int frame_id = -1;
  double rotation_rad = 0;
  double center_mm = 0;  // after trajectory alignment
};

struct EvaluationReport {
  std::vector<FramePoseError> frame_errors;
  double ate_rms_mm = 0;
  // Distance between the first pose and the truth's revisit of it; negative
  // when the ground truth never returns to its starting pose.
  double loop_residual_mm = -1;
  double loop_residual_rad = -1;
  // Filled by the slam driver, not by evaluate_trajectories.
  double map_rms_mm = -1;
};

// Standard absolute-trajectory-error evaluation: the estimated trajectory is
// rigidly aligned onto the truth by least squares before any residual is
// measured, removing the arbitrary choice of map frame. The alignment fit
// augments each center with a point offset along the camera's forward axis,
// which keeps straight (collinear) trajectories well posed; the reported
// errors are over the centers only. Frame id sequences must match exactly.
EvaluationReport evaluate_trajectories(const localization::Trajectory& estimated,
                                       const localization::Trajectory& truth);

}  // namespace fringeslam::pipeline
