#include "fringeslam/registration/rigid_estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/rng.hpp"

namespace fringeslam::registration {

namespace {

using geometry::Mat3;

RigidTransform fit_subset(const std::vector<Correspondence3D>& corrs,
                          const std::vector<int>& indices) {
  const int n = static_cast<int>(indices.size());
  Vec3 centroid_src = Vec3::Zero(), centroid_tgt = Vec3::Zero();
  for (int i : indices) {
    centroid_src += corrs[i].source;
    centroid_tgt += corrs[i].target;
  }
  centroid_src /= n;
  centroid_tgt /= n;

  Mat3 h = Mat3::Zero();
  for (int i : indices)
    h += (corrs[i].target - centroid_tgt) * (corrs[i].source - centroid_src).transpose();

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // Collinear sources leave the rotation about their axis free.
  if (svd.singularValues()(1) < 1e-9 * std::max(svd.singularValues()(0), 1e-300))
    throw DegeneracyError("umeyama_rigid: correspondences are collinear");

  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
  const Mat3 r = svd.matrixU() * d * svd.matrixV().transpose();
  return {r, centroid_tgt - r * centroid_src};
}

double squared_residual(const Correspondence3D& c, const RigidTransform& t) {
  return (c.target - t.apply(c.source)).squaredNorm();
}

}  // namespace

RigidTransform umeyama_rigid(const std::vector<Correspondence3D>& correspondences) {
  if (correspondences.size() < 3)
    throw DegeneracyError("umeyama_rigid: need at least 3 correspondences");
  std::vector<int> all(correspondences.size());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
  return fit_subset(correspondences, all);
}

namespace {

struct SampleModel {
  RigidTransform transform;
  double median_sq = std::numeric_limits<double>::infinity();
  int inlier_count = 0;
};

// Refit a winning sample: classify inliers at the working threshold, re-fit on
// them, and repeat so the classification sees the improved model.
RegistrationResult refit_model(const std::vector<Correspondence3D>& correspondences,
                               const RansacParams& params, const SampleModel& model,
                               int iterations) {
  const int n = static_cast<int>(correspondences.size());
  // 1.4826 * sqrt(median of squares) estimates sigma for Gaussian inliers.
  double threshold = params.inlier_threshold;
  if (threshold < 0) threshold = 3.0 * 1.4826 * std::sqrt(model.median_sq);
  threshold = std::max(threshold, 1e-12);

  RegistrationResult result;
  result.transform = model.transform;
  result.iterations_used = iterations;
  result.inlier_mask.assign(n, 0);

  for (int round = 0; round < std::max(params.refit_rounds, 1); ++round) {
    std::vector<int> inliers;
    for (int i = 0; i < n; ++i)
      if (squared_residual(correspondences[i], result.transform) <= threshold * threshold)
        inliers.push_back(i);
    if (static_cast<int>(inliers.size()) < std::max(params.min_inliers, 3))
      throw DegeneracyError("estimate_rigid_transform: consensus too small");
    result.transform = fit_subset(correspondences, inliers);

    std::fill(result.inlier_mask.begin(), result.inlier_mask.end(), 0);
    double sum_sq = 0;
    for (int i : inliers) {
      result.inlier_mask[i] = 1;
      sum_sq += squared_residual(correspondences[i], result.transform);
    }
    result.inlier_count = static_cast<int>(inliers.size());
    result.rms_residual = std::sqrt(sum_sq / inliers.size());
  }
  return result;
}

}  // namespace

std::vector<RegistrationResult> estimate_rigid_candidates(
    const std::vector<Correspondence3D>& correspondences, const RansacParams& params,
    int max_candidates) {
  const int n = static_cast<int>(correspondences.size());
  if (n < std::max(params.min_inliers, 3))
    throw DegeneracyError("estimate_rigid_transform: too few correspondences");

  std::mt19937_64 rng = seeded_rng(params.seed, 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<int> pick(0, n - 1);

  // With a fixed threshold samples are ranked by inlier count (median squared
  // residual breaking ties); in adaptive mode by median alone (LMedS). The
  // serial loop keeps the draw order, and therefore the result, independent
  // of thread count.
  const bool count_scored = params.inlier_threshold >= 0;
  const double thr_sq = params.inlier_threshold * params.inlier_threshold;
  const auto better = [count_scored](const SampleModel& a, const SampleModel& b) {
    if (count_scored && a.inlier_count != b.inlier_count) return a.inlier_count > b.inlier_count;
    return a.median_sq < b.median_sq;
  };

  std::vector<SampleModel> samples;
  samples.reserve(params.max_iterations);
  std::vector<double> residuals(n);
  int iterations = 0;
  for (int it = 0; it < params.max_iterations; ++it) {
    ++iterations;
    int a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    SampleModel model;
    try {
      model.transform = fit_subset(correspondences, {a, b, c});
    } catch (const DegeneracyError&) {
      continue;
    }
    for (int i = 0; i < n; ++i) {
      residuals[i] = squared_residual(correspondences[i], model.transform);
      if (count_scored && residuals[i] <= thr_sq) ++model.inlier_count;
    }
    std::nth_element(residuals.begin(), residuals.begin() + n / 2, residuals.end());
    model.median_sq = residuals[n / 2];
    samples.push_back(model);
  }
  if (samples.empty())
    throw DegeneracyError("estimate_rigid_transform: no non-degenerate sample found");

  std::stable_sort(samples.begin(), samples.end(), better);

  // Walk best-first, keeping only models a detectable motion apart, so the
  // candidate list spans distinct hypotheses instead of one basin repeated.
  std::vector<SampleModel> distinct;
  for (const SampleModel& s : samples) {
    bool novel = true;
    for (const SampleModel& kept : distinct) {
      const auto delta = geometry::transform_delta(s.transform, kept.transform);
      if (delta.angle_rad < 2e-2 && delta.translation_mm < 5.0) {
        novel = false;
        break;
      }
    }
    if (novel) distinct.push_back(s);
    if (static_cast<int>(distinct.size()) >= std::max(max_candidates, 1)) break;
  }

  std::vector<RegistrationResult> results;
  for (const SampleModel& s : distinct) {
    try {
      results.push_back(refit_model(correspondences, params, s, iterations));
    } catch (const DegeneracyError&) {
      // A hypothesis whose consensus evaporates on refit is dropped unless it
      // was the only one.
    }
  }
  if (results.empty())
    throw DegeneracyError("estimate_rigid_transform: consensus too small");
  return results;
}

RegistrationResult estimate_rigid_transform(const std::vector<Correspondence3D>& correspondences,
                                            const RansacParams& params) {
  return estimate_rigid_candidates(correspondences, params, 1).front();
}

}  // namespace fringeslam::registration
