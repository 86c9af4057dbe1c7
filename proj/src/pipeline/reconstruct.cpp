#include "fringeslam/pipeline/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "fringeslam/core/parallel.hpp"
#include "fringeslam/geometry/projection.hpp"

namespace fringeslam::pipeline {

ReconstructedFrame reconstruct_frame(const sim::CaptureStack& stack,
                                     const geometry::CalibrationPair& calibration, int frame_id,
                                     const ReconstructParams& params) {
  const phase::PhaseMap wrapped = phase::compute_wrapped_phase(stack.phase_captures, params.retrieval);

  phase::DecodeParams decode = params.decode;
  decode.periods = stack.periods;
  const phase::FringeOrderMap raw_orders =
      phase::decode_fringe_order(stack.gray_captures, stack.black, stack.white, decode);
  const phase::FringeOrderMap orders = phase::align_fringe_orders(raw_orders, wrapped);
  const phase::AbsolutePhaseMap absolute =
      phase::unwrap_phase(wrapped, orders, stack.phase.fringe_width);

  MaskImage valid;
  const Image<double> projector_u =
      phase::projector_coord_map(absolute, calibration.projector.width, &valid);

  const geometry::Mat34 camera = geometry::projection_matrix(calibration.camera);
  const geometry::Mat34 projector = geometry::projection_matrix(calibration.projector);
  const int width = projector_u.width(), height = projector_u.height();

  // Triangulate into a dense grid first so rows stay independent, then pack.
  Image<geometry::Vec3> grid(width, height);
  MaskImage ok(width, height);
  parallel_for(height, [&](std::int64_t y) {
    for (int x = 0; x < width; ++x) {
      ok(x, static_cast<int>(y)) = 0;
      if (!valid(x, static_cast<int>(y))) continue;
      try {
        grid(x, static_cast<int>(y)) =
            geometry::triangulate(geometry::Vec2(x, y), projector_u(x, static_cast<int>(y)),
                                  camera, projector, params.triangulation);
        ok(x, static_cast<int>(y)) = 1;
      } catch (const DegeneracyError&) {
        // ray nearly parallel to the projector plane; leave the pixel masked
      }
    }
  });

  ReconstructedFrame frame;
  frame.cloud.frame_id = frame_id;
  frame.cloud.pixel_index = Image<std::int32_t>(width, height);
  frame.gray = Image<double>(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      frame.gray(x, y) = luminance(stack.texture(x, y));
      if (!ok(x, y)) {
        frame.cloud.pixel_index(x, y) = -1;
        ++frame.invalid_pixels;
        continue;
      }
      frame.cloud.pixel_index(x, y) = static_cast<std::int32_t>(frame.cloud.points.size());
      frame.cloud.points.push_back(grid(x, y));
      const Rgb& c = stack.texture(x, y);
      const auto to8 = [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      };
      frame.cloud.colors.push_back({to8(c.r), to8(c.g), to8(c.b)});
    }
  return frame;
}

}  // namespace fringeslam::pipeline
