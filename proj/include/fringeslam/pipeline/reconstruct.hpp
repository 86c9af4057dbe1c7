#pragma once

#include "fringeslam/geometry/calibration.hpp"
#include "fringeslam/phase/retrieval.hpp"
#include "fringeslam/registration/point_cloud.hpp"
#include "fringeslam/sim/render.hpp"

namespace fringeslam::pipeline {

struct ReconstructParams {
  phase::RetrievalParams retrieval;
  phase::DecodeParams decode;  // periods is taken from the stack
  phase::AlignParams align;
  geometry::TriangulationOptions triangulation;
};

struct ReconstructedFrame {
  registration::FramePointCloud cloud;  // rig-frame points, one per valid pixel
  Image<double> gray;                   // texture luminance for feature work
  int invalid_pixels = 0;               // image pixels that failed the mask
};

// One frame through the measurement chain: wrapped phase from the shifted
// captures, fringe order from the binary-coded captures, unwrap, projector
// column, then a camera/projector triangulation per valid pixel. Texture
// colors ride along point-to-point. Pixels failing any validity mask are
// simply absent from the cloud.
ReconstructedFrame reconstruct_frame(const sim::CaptureStack& stack,
                                     const geometry::CalibrationPair& calibration, int frame_id,
                                     const ReconstructParams& params = {});

}  // namespace fringeslam::pipeline
