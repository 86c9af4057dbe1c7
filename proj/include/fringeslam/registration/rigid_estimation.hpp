#pragma once

#include <cstdint>
#include <vector>

#include "fringeslam/geometry/types.hpp"

namespace fringeslam::registration {

using geometry::RigidTransform;
using geometry::Vec3;

// One putative 3D-3D correspondence: source maps onto target under the
// transform being estimated.
struct Correspondence3D {
  Vec3 source;
  Vec3 target;
};

// Least-squares rigid fit: argmin_{R,T} sum_i ||target_i - R source_i - T||^2.
// Needs >= 3 correspondences spanning a plane; throws DegeneracyError when the
// point sets are too few or collinear to pin down the rotation.
RigidTransform umeyama_rigid(const std::vector<Correspondence3D>& correspondences);

struct RansacParams {
  int max_iterations = 1000;
  // Residual threshold in mm for the final inlier classification. Negative
  // means adaptive: 3x the robust noise scale estimated from the best
  // median-of-squares sample (LMedS).
  double inlier_threshold = -1.0;
  int min_inliers = 6;
  int refit_rounds = 2;
  std::uint64_t seed = 13;
};

struct RegistrationResult {
  RigidTransform transform;
  double rms_residual = 0;  // over inliers, mm
  int inlier_count = 0;
  int iterations_used = 0;
  std::vector<std::uint8_t> inlier_mask;
};

// Robust rigid fit over contaminated correspondences. Minimal 3-point samples
// are scored by inlier count when a threshold is given, or by median squared
// residual (LMedS) in adaptive mode; the winning sample sets the scale for
// inlier selection and the transform is re-fit on the inliers. Deterministic
// for a fixed seed.
RegistrationResult estimate_rigid_transform(const std::vector<Correspondence3D>& correspondences,
                                            const RansacParams& params = {});

// Same search, but returns up to max_candidates mutually distinct refit
// models, best first. Callers with an independent quality signal (for example
// dense cloud agreement) can re-rank them; with heavily contaminated match
// sets the sample scores alone cannot always separate the true motion from a
// coherent alias.
std::vector<RegistrationResult> estimate_rigid_candidates(
    const std::vector<Correspondence3D>& correspondences, const RansacParams& params,
    int max_candidates);

}  // namespace fringeslam::registration
