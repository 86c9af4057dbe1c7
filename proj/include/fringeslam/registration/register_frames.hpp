#pragma once

#include <optional>
#include <vector>

#include "fringeslam/registration/features.hpp"
#include "fringeslam/registration/icp.hpp"
#include "fringeslam/registration/point_cloud.hpp"
#include "fringeslam/registration/rigid_estimation.hpp"

namespace fringeslam::registration {

// Everything registration needs from one reconstructed frame.
struct RegistrationFrame {
  FramePointCloud cloud;
  Image<double> texture;  // grayscale, [0,1]
  FeatureSet features;
};

RegistrationFrame make_registration_frame(FramePointCloud cloud, const Image<double>& texture,
                                          const FeatureParams& feature_params = {});

// Interior surface samples with per-point unit normals from the organized
// pixel grid. Points whose 3x3 pixel neighborhood is incomplete, crosses a
// depth gap, or touches the image border are excluded: their normals are
// unreliable and their asymmetric visibility biases dense alignment.
struct SurfacePoints {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit, oriented toward the rig origin
};

struct SurfaceExtractParams {
  double gap_factor = 6.0;  // neighbor gap above this multiple of the median gap = discontinuity
  int margin = 3;           // image border margin, px
  // Planarity rejection: a point is kept only while its neighbors stay within
  // max(planarity_factor x median gap, planarity_k x median deviation) of its
  // tangent plane. Creases (box edges, object contacts) have continuous depth
  // yet bogus averaged normals; smooth curvature stays well under the limit
  // and measurement noise raises the adaptive term for both.
  double planarity_factor = 0.15;
  double planarity_k = 4.0;
};

SurfacePoints extract_surface_points(const FramePointCloud& cloud,
                                     const SurfaceExtractParams& params = {});

struct PairParams {
  FeatureParams features;
  double match_ratio = 0.8;
  int min_matches = 12;
  RansacParams ransac;   // inlier_threshold < 0 resolves to 3x the cloud noise scale
  int coarse_candidates = 5;
  IcpParams feature_icp;  // tightened on the sparse lifted feature points
  // Dense refinement runs surface-referenced with normals on both sides, in
  // two passes over the voxel-thinned source and the interior target. The
  // capture pass rejects on residuals against an absolute floor, so it pulls a
  // coarse hypothesis in without ejecting distant-but-honest surfaces. The
  // precision pass then rejects only geometrically (coverage boundary) and
  // keeps every remaining pair, because near an almost-right pose the
  // highest-residual pairs are exactly the ones pinning the weak directions.
  IcpParams cloud_icp;
  IcpParams polish_icp;
  double icp_voxel_mm = 2.0;
  // Acceptance cap for a refined pose: the probe quartile distance must stay
  // below accept_factor x target spacing, otherwise the next candidate runs.
  double accept_factor = 2.0;
  // External initialization (for example the previous relative motion of a
  // sequence). Competes with the feature hypotheses on equal terms, so a
  // contaminated match set cannot outvote a good motion prior.
  std::optional<RigidTransform> init;

  PairParams() {
    feature_icp.min_points = 12;
    feature_icp.trim_fraction = 0.2;
    cloud_icp.gate_start_factor = 4.0;
    cloud_icp.mutual = false;
    cloud_icp.trim_fraction = 0.0;
    cloud_icp.residual_reject_k = 3.0;
    cloud_icp.residual_floor_factor = 0.2;
    cloud_icp.max_iterations = 60;
    polish_icp.gate_start_factor = 4.0;
    polish_icp.mutual = false;
    polish_icp.trim_fraction = 0.0;
    polish_icp.residual_floor_factor = 0.0;
    polish_icp.lateral_reject_factor = 1.0;
    // The weakly constrained pose directions converge as a slow crawl: each
    // association step is cheap, so let the pass run until the crawl truly
    // flattens instead of stopping at the first rms plateau.
    polish_icp.max_iterations = 300;
    polish_icp.tolerance = 1e-9;
  }
};

struct PairResult {
  RigidTransform transform;  // maps frame_b rig points into frame_a's rig frame
  int feature_matches = 0;
  int lifted_matches = 0;
  int coarse_inliers = 0;
  double coarse_rms = 0;
  double icp_rms = 0;
  double probe_q25 = 0;     // accepted pose's validation distance, mm
  bool used_prior = false;  // true when the external init beat the feature hypotheses
};

// Point index of the reconstructed pixel nearest to a subpixel position,
// searching the 3x3 block around the rounded pixel; -1 beyond 1 px.
int lift_pixel(const FramePointCloud& cloud, const Vec2& position);

// Lifts 2D feature matches to 3D point pairs through the organized clouds.
// A keypoint uses the nearest reconstructed pixel within 1 px of its subpixel
// position; matches where either side has no such pixel are dropped.
std::vector<Correspondence3D> lift_correspondences(const std::vector<FeatureMatch>& matches,
                                                   const FramePointCloud& cloud_a,
                                                   const FramePointCloud& cloud_b,
                                                   int* dropped = nullptr);

// Full two-frame alignment: texture feature matching, robust 3-point fits on
// the lifted 3D pairs giving several coarse hypotheses, hypothesis selection
// by dense cloud agreement, then ICP stages (sparse feature points, dense
// point-to-point, surface-referenced polish). Throws DegeneracyError naming
// the stage that failed when the frames cannot be aligned.
PairResult register_pair(const RegistrationFrame& frame_a, const RegistrationFrame& frame_b,
                         const PairParams& params = {});

struct StitchResult {
  std::vector<RigidTransform> world_from_frame;  // per frame, world = frame 0 rig
  std::vector<Vec3> map_points;
  std::vector<Rgb8> map_colors;
  std::vector<std::int32_t> map_frame_ids;
  std::vector<PairResult> pair_results;  // frame k registered onto frame k-1
};

// Chains consecutive pair registrations into one map in the first frame's
// coordinates. From the second pair on, the previous relative motion is
// offered to register_pair as one more hypothesis; scenes whose appearance
// changes too fast for the feature stage still chain as long as the motion
// stays smooth. A pair failure aborts with the offending frame index in the
// error message.
StitchResult stitch_sequence(const std::vector<RegistrationFrame>& frames,
                             const PairParams& params = {});

}  // namespace fringeslam::registration
