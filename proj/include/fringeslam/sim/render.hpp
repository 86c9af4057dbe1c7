#pragma once

#include <cstdint>
#include <vector>

#include "fringeslam/geometry/calibration.hpp"
#include "fringeslam/phase/patterns.hpp"
#include "fringeslam/sim/scene.hpp"

namespace fringeslam::sim {

struct PhasePatternParams {
  double fringe_width = 18.0;  // projector pixels
  int steps = 4;
  double background = 0.5;
  double amplitude = 0.4;
};

struct RenderOptions {
  double noise_sigma = 0.0;      // Gaussian intensity noise, full-scale units
  std::uint64_t seed = 0;
  double shadow_texture_light = 0.15;  // residual texture brightness off-fringe
};

// Everything one capture position produces, full precision.
struct CaptureStack {
  std::vector<phase::FringePattern> phase_captures;
  std::vector<Image<double>> gray_captures;
  Image<double> black;
  Image<double> white;
  Image<Rgb> texture;
  PhasePatternParams phase;
  int periods = 1;
};

struct GroundTruthFrame {
  Image<double> depth;           // camera-frame z, mm; 0 where no surface
  MaskImage hit;
  Image<geometry::Vec3> points;  // rig-frame surface points at hit pixels
  Image<double> projector_coord; // true projector column
  MaskImage lit;                 // projector-visible and on-panel
  geometry::RigidTransform world_from_rig;
};

// Depth by analytic raycasting, camera-frame z per pixel. The _serial
// variant is the reference implementation; outputs are bit-identical.
Image<double> raycast_depth(const Scene& scene, const geometry::CameraModel& camera,
                            const geometry::RigidTransform& world_from_rig);
Image<double> raycast_depth_serial(const Scene& scene, const geometry::CameraModel& camera,
                                   const geometry::RigidTransform& world_from_rig);

// Renders the full structured-light stack seen from one rig pose: point
// sampling through exact pixel rays, projector-side occlusion by a second
// raycast, procedural albedo, optional per-capture Gaussian noise drawn from
// per-row streams so results do not depend on thread count.
CaptureStack render_capture_stack(const Scene& scene, const geometry::CalibrationPair& calibration,
                                  const geometry::RigidTransform& world_from_rig,
                                  const PhasePatternParams& phase_params,
                                  const RenderOptions& options = {},
                                  GroundTruthFrame* ground_truth = nullptr);

}  // namespace fringeslam::sim
