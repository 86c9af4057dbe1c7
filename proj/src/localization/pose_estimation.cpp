#include "fringeslam/localization/pose_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/parallel.hpp"
#include "fringeslam/core/rng.hpp"

namespace fringeslam::localization {
namespace {

double descriptor_distance_sq(const float* a, const float* b, int n) {
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum;
}

}  // namespace

FeatureMap build_feature_map(const std::vector<registration::RegistrationFrame>& frames,
                             const std::vector<geometry::RigidTransform>& world_from_frame) {
  if (frames.size() != world_from_frame.size())
    throw DataError("build_feature_map: pose count does not match frame count");
  FeatureMap map;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& features = frames[k].features;
    if (features.size() == 0) continue;
    if (map.descriptor_size == 0) map.descriptor_size = features.descriptor_size;
    if (features.descriptor_size != map.descriptor_size)
      throw DataError("build_feature_map: frames carry mixed descriptor sizes");
    for (int i = 0; i < features.size(); ++i) {
      const int index = registration::lift_pixel(frames[k].cloud, features.keypoints[i].position);
      if (index < 0) continue;
      map.points.push_back(world_from_frame[k].apply(frames[k].cloud.points[index]));
      const float* d = features.descriptor(i);
      map.descriptors.insert(map.descriptors.end(), d, d + map.descriptor_size);
    }
  }
  return map;
}

std::vector<Match3D2D> match_to_map(const registration::FeatureSet& features,
                                    const FeatureMap& map, const PoseEstimateParams& params) {
  if (features.size() == 0 || map.size() == 0) return {};
  if (features.descriptor_size != map.descriptor_size)
    throw DataError("match_to_map: descriptor sizes differ");
  const int n = features.size();
  const int landmarks = map.size();
  const double radius_sq = params.duplicate_radius_mm * params.duplicate_radius_mm;

  std::vector<int> chosen(n, -1);
  parallel_for(n, [&](std::int64_t i) {
    std::vector<double> dist(landmarks);
    const float* d = features.descriptor(static_cast<int>(i));
    int best = 0;
    for (int j = 0; j < landmarks; ++j) {
      dist[j] = descriptor_distance_sq(d, map.descriptor(j), map.descriptor_size);
      if (dist[j] < dist[best]) best = j;
    }
    // Ratio test against the runner-up that is a genuinely different point;
    // copies of the best landmark seen from other frames do not count.
    double second = std::numeric_limits<double>::infinity();
    for (int j = 0; j < landmarks; ++j) {
      if ((map.points[j] - map.points[best]).squaredNorm() <= radius_sq) continue;
      second = std::min(second, dist[j]);
    }
    if (dist[best] < params.match_ratio * params.match_ratio * second)
      chosen[i] = best;
  });

  std::vector<Match3D2D> matches;
  for (int i = 0; i < n; ++i)
    if (chosen[i] >= 0) matches.push_back({map.points[chosen[i]], features.keypoints[i].position});
  return matches;
}

PoseEstimate estimate_pose(const registration::FeatureSet& features, const FeatureMap& map,
                           const geometry::Intrinsics& intrinsics,
                           const PoseEstimateParams& params) {
  const std::vector<Match3D2D> matches = match_to_map(features, map, params);
  if (matches.size() < 6)
    throw DegeneracyError("estimate_pose: only " + std::to_string(matches.size()) +
                          " matches against the map");

  const auto reprojection_error = [&](const geometry::RigidTransform& pose, const Match3D2D& m) {
    const Vec3 c = pose.apply(m.world);
    if (c.z() < 1e-9) return std::numeric_limits<double>::infinity();
    const Vec2 projected(intrinsics.fx * c.x() / c.z() + intrinsics.u0,
                         intrinsics.fy * c.y() / c.z() + intrinsics.v0);
    return (projected - m.pixel).norm();
  };
  struct Consensus {
    int inliers = -1;
    double rms = std::numeric_limits<double>::infinity();
  };
  const auto score = [&](const geometry::RigidTransform& pose) {
    Consensus c;
    c.inliers = 0;
    double sum_sq = 0;
    for (const auto& m : matches) {
      const double err = reprojection_error(pose, m);
      if (err <= params.inlier_threshold_px) {
        ++c.inliers;
        sum_sq += err * err;
      }
    }
    c.rms = c.inliers > 0 ? std::sqrt(sum_sq / c.inliers) : 0.0;
    return c;
  };
  const auto solve_from = [&](const std::vector<Match3D2D>& subset) {
    return decompose_projection(solve_projection_dlt(build_dlt_system(subset)).matrix, intrinsics);
  };

  auto rng = seeded_rng(params.seed, matches.size());
  std::uniform_int_distribution<int> draw(0, static_cast<int>(matches.size()) - 1);
  geometry::RigidTransform best_pose;
  Consensus best;
  std::vector<Match3D2D> sample(6);
  for (int iteration = 0; iteration < params.ransac_iterations; ++iteration) {
    int picks[6];
    for (int s = 0; s < 6;) {
      picks[s] = draw(rng);
      bool repeat = false;
      for (int t = 0; t < s; ++t) repeat |= picks[t] == picks[s];
      if (!repeat) ++s;
    }
    for (int s = 0; s < 6; ++s) sample[s] = matches[picks[s]];
    geometry::RigidTransform pose;
    try {
      pose = solve_from(sample);
    } catch (const DegeneracyError&) {
      continue;  // coplanar or otherwise unusable sample, draw again
    }
    const Consensus c = score(pose);
    if (c.inliers > best.inliers || (c.inliers == best.inliers && c.rms < best.rms)) {
      best = c;
      best_pose = pose;
    }
  }
  if (best.inliers < params.min_inliers)
    throw DegeneracyError("estimate_pose: consensus reached only " + std::to_string(best.inliers) +
                          " inliers");

  // Refit on the full inlier set; each round can recruit inliers the minimal
  // sample's pose missed.
  for (int round = 0; round < params.refit_rounds; ++round) {
    std::vector<Match3D2D> inlier_matches;
    for (const auto& m : matches)
      if (reprojection_error(best_pose, m) <= params.inlier_threshold_px)
        inlier_matches.push_back(m);
    if (inlier_matches.size() < 6) break;
    geometry::RigidTransform refit;
    try {
      refit = solve_from(inlier_matches);
    } catch (const DegeneracyError&) {
      break;  // inliers collapsed onto a degenerate configuration, keep the sample pose
    }
    const Consensus c = score(refit);
    if (c.inliers < best.inliers) break;
    best = c;
    best_pose = refit;
  }

  PoseEstimate estimate;
  estimate.camera_from_world = best_pose;
  estimate.center = camera_center(best_pose);
  estimate.matches = static_cast<int>(matches.size());
  estimate.inliers = best.inliers;
  estimate.reprojection_rms_px = best.rms;
  return estimate;
}

}  // namespace fringeslam::localization
