#pragma once

#include <filesystem>

#include "fringeslam/geometry/projection.hpp"
#include "fringeslam/geometry/types.hpp"

namespace fringeslam::geometry {

// One pinhole device (camera or projector). Extrinsics map rig-frame points
// into the device frame; the rig frame coincides with the camera frame, so a
// calibrated camera carries identity extrinsics.
struct CameraModel {
  Intrinsics intrinsics;
  Extrinsics extrinsics;
  int width = 0;
  int height = 0;
};

struct CalibrationPair {
  CameraModel camera;
  CameraModel projector;
};

Mat34 projection_matrix(const CameraModel& model);

void validate(const CameraModel& model);
void validate(const CalibrationPair& calibration);

CalibrationPair load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const CalibrationPair& calibration);

}  // namespace fringeslam::geometry
