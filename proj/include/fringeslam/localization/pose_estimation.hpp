#pragma once

#include <cstdint>
#include <vector>

#include "fringeslam/geometry/calibration.hpp"
#include "fringeslam/localization/dlt.hpp"
#include "fringeslam/registration/register_frames.hpp"

namespace fringeslam::localization {

// Global landmark store: world-frame feature points with the descriptors they
// were detected under. Landmarks from different viewpoints of the same corner
// coexist; the matcher treats near-coincident world points as one landmark
// when it applies the ratio test.
struct FeatureMap {
  std::vector<Vec3> points;
  std::vector<float> descriptors;
  int descriptor_size = 0;

  const float* descriptor(int i) const { return descriptors.data() + i * descriptor_size; }
  int size() const { return static_cast<int>(points.size()); }
};

// Collects every frame keypoint that lies on a reconstructed pixel into one
// map, placing it with the frame's world pose. Frames reuse the features they
// were registered with, so detection runs once per frame overall.
FeatureMap build_feature_map(const std::vector<registration::RegistrationFrame>& frames,
                             const std::vector<geometry::RigidTransform>& world_from_frame);

struct PoseEstimateParams {
  double match_ratio = 0.8;
  // Landmarks within this world distance count as the same physical point for
  // the ratio test; a corner seen from several frames must not veto itself.
  double duplicate_radius_mm = 5.0;
  int ransac_iterations = 1000;  // 6-point DLT samples
  double inlier_threshold_px = 2.0;
  int min_inliers = 6;
  int refit_rounds = 2;
  std::uint64_t seed = 17;
};

struct PoseEstimate {
  geometry::RigidTransform camera_from_world;
  Vec3 center;  // -R^T T, world mm
  int matches = 0;
  int inliers = 0;
  double reprojection_rms_px = 0;  // over inliers
};

// Descriptor matches between a frame's features and the map, as 3D-2D pairs.
// Lowe's ratio against the nearest landmark that is NOT a duplicate of the
// best one, so multi-view copies of a corner do not suppress each other.
std::vector<Match3D2D> match_to_map(const registration::FeatureSet& features,
                                    const FeatureMap& map, const PoseEstimateParams& params = {});

// Per-frame localization: match against the map, then RANSAC over 6-point
// minimal DLT solves scored by reprojection error, and a final DLT refit on
// the inlier set. Deterministic for a fixed seed. Throws DegeneracyError when
// matching or consensus cannot produce the minimum usable set.
PoseEstimate estimate_pose(const registration::FeatureSet& features, const FeatureMap& map,
                           const geometry::Intrinsics& intrinsics,
                           const PoseEstimateParams& params = {});

}  // namespace fringeslam::localization
