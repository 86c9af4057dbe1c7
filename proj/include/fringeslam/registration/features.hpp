#pragma once

#include <vector>

#include "fringeslam/core/image.hpp"
#include "fringeslam/geometry/types.hpp"

namespace fringeslam::registration {

using geometry::Vec2;

struct Keypoint {
  Vec2 position;  // subpixel image coordinates
  double response = 0;
};

// Detected corners plus one flat descriptor block (row per keypoint).
struct FeatureSet {
  std::vector<Keypoint> keypoints;
  std::vector<float> descriptors;
  int descriptor_size = 0;

  const float* descriptor(int i) const { return descriptors.data() + i * descriptor_size; }
  int size() const { return static_cast<int>(keypoints.size()); }
};

struct FeatureParams {
  int max_features = 1200;
  double quality_level = 0.01;  // response threshold relative to the maximum
  int nms_radius = 4;
  int patch_radius = 8;         // descriptor samples a (2r)x(2r) patch
  double harris_k = 0.04;
  int smoothing_radius = 2;     // box smoothing of the structure tensor
};

// Harris corner response; kernels are exposed for the benchmark and the
// serial/parallel consistency tests.
Image<double> harris_response(const Image<double>& gray, const FeatureParams& params = {});
Image<double> harris_response_serial(const Image<double>& gray, const FeatureParams& params = {});

// Corner detection with non-maximum suppression, quadratic subpixel
// refinement, and normalized patch descriptors. Deterministic: keypoints are
// ordered by (response desc, y, x).
FeatureSet detect_features(const Image<double>& gray, const FeatureParams& params = {});

struct FeatureMatch {
  int index_a = -1, index_b = -1;
  Vec2 pixel_a, pixel_b;
  double distance = 0;  // descriptor L2 distance
};

// Mutual nearest descriptor matches passing Lowe's ratio test. Symmetric:
// swapping the arguments swaps the roles in each returned match.
std::vector<FeatureMatch> match_features(const FeatureSet& a, const FeatureSet& b,
                                         double ratio_threshold = 0.8);

}  // namespace fringeslam::registration
