#include "fringeslam/registration/register_frames.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/registration/kdtree.hpp"

namespace fringeslam::registration {

int lift_pixel(const FramePointCloud& cloud, const Vec2& position) {
  const int cx = static_cast<int>(std::lround(position.x()));
  const int cy = static_cast<int>(std::lround(position.y()));
  int best = -1;
  double best_dist = 1.0 + 1e-9;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = cx + dx, y = cy + dy;
      if (!cloud.pixel_index.in_bounds(x, y)) continue;
      const std::int32_t index = cloud.pixel_index(x, y);
      if (index < 0) continue;
      const double dist = std::hypot(x - position.x(), y - position.y());
      if (dist < best_dist) {
        best_dist = dist;
        best = index;
      }
    }
  return best;
}

namespace {

// Lower-quartile nearest-neighbor distance of the probe points under a
// candidate pose. The quartile stays meaningful down to ~25% overlap, where a
// median would be dominated by the non-overlapping majority.
double probe_quartile(const std::vector<Vec3>& probe, const KdTree& target_tree,
                      const RigidTransform& pose) {
  std::vector<double> squared(probe.size());
  for (std::size_t i = 0; i < probe.size(); ++i)
    squared[i] = target_tree.nearest(pose.apply(probe[i])).squared_distance;
  const std::size_t q = squared.size() / 4;
  std::nth_element(squared.begin(), squared.begin() + q, squared.end());
  return std::sqrt(squared[q]);
}

}  // namespace

RegistrationFrame make_registration_frame(FramePointCloud cloud, const Image<double>& texture,
                                          const FeatureParams& feature_params) {
  if (texture.width() != cloud.width() || texture.height() != cloud.height())
    throw DataError("make_registration_frame: texture size does not match the cloud");
  RegistrationFrame frame;
  frame.cloud = std::move(cloud);
  frame.texture = texture;
  frame.features = detect_features(texture, feature_params);
  return frame;
}

SurfacePoints extract_surface_points(const FramePointCloud& cloud,
                                     const SurfaceExtractParams& params) {
  const int w = cloud.width(), h = cloud.height();
  std::vector<double> gaps;
  gaps.reserve(cloud.points.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      const std::int32_t a = cloud.pixel_index(x, y), b = cloud.pixel_index(x + 1, y);
      if (a >= 0 && b >= 0) gaps.push_back((cloud.points[a] - cloud.points[b]).norm());
    }
  if (gaps.empty()) return {};
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double gap_limit = params.gap_factor * gaps[gaps.size() / 2];

  struct Candidate {
    Vec3 point;
    Vec3 normal;
    double deviation;  // worst neighbor distance to the tangent plane
  };
  std::vector<Candidate> candidates;
  const int margin = std::max(params.margin, 1);
  for (int y = margin; y < h - margin; ++y)
    for (int x = margin; x < w - margin; ++x) {
      const std::int32_t idx = cloud.pixel_index(x, y);
      if (idx < 0) continue;
      bool interior = true;
      for (int dy = -1; dy <= 1 && interior; ++dy)
        for (int dx = -1; dx <= 1 && interior; ++dx) {
          const std::int32_t n = cloud.pixel_index(x + dx, y + dy);
          if (n < 0 || (cloud.points[idx] - cloud.points[n]).norm() > gap_limit) interior = false;
        }
      if (!interior) continue;
      const Vec3 tangent_x =
          cloud.points[cloud.pixel_index(x + 1, y)] - cloud.points[cloud.pixel_index(x - 1, y)];
      const Vec3 tangent_y =
          cloud.points[cloud.pixel_index(x, y + 1)] - cloud.points[cloud.pixel_index(x, y - 1)];
      Vec3 normal = tangent_x.cross(tangent_y);
      const double length = normal.norm();
      if (length < 1e-12) continue;
      normal /= length;
      if (normal.dot(cloud.points[idx]) > 0) normal = -normal;
      double deviation = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const std::int32_t n = cloud.pixel_index(x + dx, y + dy);
          deviation =
              std::max(deviation, std::abs(normal.dot(cloud.points[n] - cloud.points[idx])));
        }
      candidates.push_back({cloud.points[idx], normal, deviation});
    }
  if (candidates.empty()) return {};

  std::vector<double> deviations(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) deviations[i] = candidates[i].deviation;
  std::nth_element(deviations.begin(), deviations.begin() + deviations.size() / 2,
                   deviations.end());
  const double planarity_limit =
      std::max(params.planarity_factor * gaps[gaps.size() / 2],
               params.planarity_k * deviations[deviations.size() / 2]);

  SurfacePoints out;
  out.points.reserve(candidates.size());
  out.normals.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    if (c.deviation > planarity_limit) continue;
    out.points.push_back(c.point);
    out.normals.push_back(c.normal);
  }
  return out;
}

std::vector<Correspondence3D> lift_correspondences(const std::vector<FeatureMatch>& matches,
                                                   const FramePointCloud& cloud_a,
                                                   const FramePointCloud& cloud_b, int* dropped) {
  std::vector<Correspondence3D> corrs;
  corrs.reserve(matches.size());
  int lost = 0;
  for (const FeatureMatch& m : matches) {
    const int ia = lift_pixel(cloud_a, m.pixel_a);
    const int ib = lift_pixel(cloud_b, m.pixel_b);
    if (ia < 0 || ib < 0) {
      ++lost;
      continue;
    }
    // Transform maps b into a: source comes from b, target from a.
    corrs.push_back({cloud_b.points[ib], cloud_a.points[ia]});
  }
  if (dropped) *dropped = lost;
  return corrs;
}

PairResult register_pair(const RegistrationFrame& frame_a, const RegistrationFrame& frame_b,
                         const PairParams& params) {
  PairResult result;

  const SurfacePoints target = extract_surface_points(frame_a.cloud);
  const SurfacePoints source_surface = extract_surface_points(frame_b.cloud);
  if (target.points.size() < 2 || source_surface.points.size() < 2)
    throw DegeneracyError("register_pair: frames carry no usable surface");
  const double spacing = median_point_spacing(target.points);
  // Thin the source but keep each survivor's own normal for the dense passes.
  std::vector<Vec3> source, source_normals;
  for (const std::size_t i :
       voxel_downsample_indices(source_surface.points, params.icp_voxel_mm)) {
    source.push_back(source_surface.points[i]);
    source_normals.push_back(source_surface.normals[i]);
  }

  // Strided probe subset for hypothesis scoring and final validation.
  std::vector<Vec3> probe;
  const std::size_t stride = std::max<std::size_t>(1, source.size() / 1200);
  for (std::size_t i = 0; i < source.size(); i += stride) probe.push_back(source[i]);
  const KdTree target_tree(target.points);

  // Coarse hypotheses from the feature stage. With a motion prior available
  // this stage may fail outright; without one its failure is fatal.
  struct Hypothesis {
    RigidTransform transform;
    double score;
    bool from_features;
  };
  std::vector<Hypothesis> hypotheses;
  std::vector<Correspondence3D> corrs;
  std::string feature_failure;
  try {
    const std::vector<FeatureMatch> matches =
        match_features(frame_a.features, frame_b.features, params.match_ratio);
    result.feature_matches = static_cast<int>(matches.size());
    if (result.feature_matches < params.min_matches)
      throw DegeneracyError("register_pair: feature matching found only " +
                            std::to_string(result.feature_matches) + " matches");

    corrs = lift_correspondences(matches, frame_a.cloud, frame_b.cloud, nullptr);
    result.lifted_matches = static_cast<int>(corrs.size());
    if (result.lifted_matches < params.min_matches)
      throw DegeneracyError("register_pair: only " + std::to_string(result.lifted_matches) +
                            " matches lift to 3D");

    RansacParams ransac = params.ransac;
    ransac.min_inliers = std::max(ransac.min_inliers, params.min_matches / 2);
    // Lifted matches are quantized to the pixel lattice, so the cloud noise
    // scale is about half the point spacing; the classification threshold is
    // three times that.
    if (ransac.inlier_threshold < 0) ransac.inlier_threshold = 3.0 * 0.5 * spacing;
    std::vector<RegistrationResult> coarse;
    try {
      coarse = estimate_rigid_candidates(corrs, ransac, params.coarse_candidates);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError(std::string("register_pair: coarse fit failed: ") + e.what());
    }
    result.coarse_inliers = coarse.front().inlier_count;
    result.coarse_rms = coarse.front().rms_residual;
    for (const RegistrationResult& c : coarse)
      hypotheses.push_back({c.transform, probe_quartile(probe, target_tree, c.transform), true});
  } catch (const DegeneracyError& e) {
    if (!params.init) throw;
    feature_failure = e.what();
  }

  if (params.init)
    hypotheses.push_back({*params.init, probe_quartile(probe, target_tree, *params.init), false});

  std::stable_sort(hypotheses.begin(), hypotheses.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.score < b.score; });

  // Feature points for the sparse polish of feature-born hypotheses.
  std::vector<Vec3> feature_source, feature_target;
  feature_source.reserve(corrs.size());
  feature_target.reserve(corrs.size());
  for (const Correspondence3D& c : corrs) {
    feature_source.push_back(c.source);
    feature_target.push_back(c.target);
  }

  const double accept_limit = params.accept_factor * spacing;
  std::string last_failure = feature_failure;
  for (const Hypothesis& hypothesis : hypotheses) {
    RigidTransform pose = hypothesis.transform;
    if (hypothesis.from_features && !feature_source.empty()) {
      // Sparse ICP on the lifted feature points tightens a coarse pose before
      // the dense stage sees it. An external prior skips this: the feature
      // set may be the very thing that is contaminated.
      try {
        pose = icp_refine(feature_source, feature_target, pose, params.feature_icp).transform;
      } catch (const DegeneracyError&) {
        // Accelerator only; the dense stage still gets the raw hypothesis.
      }
    }
    IcpResult dense;
    try {
      dense = icp_refine(source, source_normals, target.points, target.normals, pose,
                         params.cloud_icp);
      dense = icp_refine(source, source_normals, target.points, target.normals, dense.transform,
                         params.polish_icp);
    } catch (const DegeneracyError& e) {
      last_failure = e.what();
      continue;
    }
    const double final_score = probe_quartile(probe, target_tree, dense.transform);
    if (final_score > accept_limit) {
      last_failure = "refined pose failed validation (probe " + std::to_string(final_score) +
                     " mm vs limit " + std::to_string(accept_limit) + " mm)";
      continue;
    }
    result.transform = dense.transform;
    result.icp_rms = dense.rms;
    result.probe_q25 = final_score;
    result.used_prior = !hypothesis.from_features;
    return result;
  }
  throw DegeneracyError("register_pair: dense refinement failed: " +
                        (last_failure.empty() ? std::string("no usable hypothesis")
                                              : last_failure));
}

StitchResult stitch_sequence(const std::vector<RegistrationFrame>& frames,
                             const PairParams& params) {
  if (frames.empty()) throw DataError("stitch_sequence: no frames");
  StitchResult result;
  result.world_from_frame.reserve(frames.size());
  result.world_from_frame.push_back(RigidTransform::identity());

  PairParams chained = params;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    PairResult pair;
    try {
      pair = register_pair(frames[k - 1], frames[k], chained);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError("stitch_sequence: frame " + std::to_string(k) + " onto " +
                            std::to_string(k - 1) + ": " + e.what());
    }
    result.world_from_frame.push_back(
        geometry::compose(result.world_from_frame[k - 1], pair.transform));
    result.pair_results.push_back(pair);
    chained.init = pair.transform;  // smooth-motion hypothesis for the next pair
  }

  std::size_t total = 0;
  for (const RegistrationFrame& f : frames) total += f.cloud.points.size();
  result.map_points.reserve(total);
  result.map_colors.reserve(total);
  result.map_frame_ids.reserve(total);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const RigidTransform& pose = result.world_from_frame[k];
    const FramePointCloud& cloud = frames[k].cloud;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      result.map_points.push_back(pose.apply(cloud.points[i]));
      result.map_colors.push_back(cloud.colors[i]);
      result.map_frame_ids.push_back(cloud.frame_id);
    }
  }
  return result;
}

}  // namespace fringeslam::registration
