#include "fringeslam/registration/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/parallel.hpp"

namespace fringeslam::registration {

namespace {

// Structure-tensor row products with central-difference gradients.
struct TensorImages {
  Image<double> xx, yy, xy;
};

TensorImages gradient_products(const Image<double>& gray) {
  const int w = gray.width(), h = gray.height();
  TensorImages t{Image<double>(w, h), Image<double>(w, h), Image<double>(w, h)};
  parallel_for(h, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
      const double gx = 0.5 * (gray(xp, y) - gray(xm, y));
      const double gy = 0.5 * (gray(x, yp) - gray(x, ym));
      t.xx(x, y) = gx * gx;
      t.yy(x, y) = gy * gy;
      t.xy(x, y) = gx * gy;
    }
  });
  return t;
}

// Binomial weights approximate the classic Gaussian window. The center
// weighting matters: a flat box window gives identical sums on neighboring
// pixels around an isolated corner (both windows swallow the whole edge
// energy), so the response plateaus and the peak loses its location.
std::vector<double> binomial_weights(int radius) {
  std::vector<double> w(2 * radius + 1, 0.0);
  w[0] = 1.0;
  for (int row = 1; row <= 2 * radius; ++row)
    for (int k = row; k > 0; --k) w[k] += w[k - 1];
  double sum = 0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return w;
}

// Shared row kernel for the parallel and serial variants.
void harris_row(const TensorImages& t, const FeatureParams& params,
                const std::vector<double>& weight, int y, Image<double>& out) {
  const int w = out.width(), h = out.height();
  const int r = params.smoothing_radius;
  for (int x = 0; x < w; ++x) {
    double sxx = 0, syy = 0, sxy = 0;
    for (int dy = -r; dy <= r; ++dy) {
      const int yy = std::clamp(y + dy, 0, h - 1);
      for (int dx = -r; dx <= r; ++dx) {
        const int xx = std::clamp(x + dx, 0, w - 1);
        const double wgt = weight[dy + r] * weight[dx + r];
        sxx += wgt * t.xx(xx, yy);
        syy += wgt * t.yy(xx, yy);
        sxy += wgt * t.xy(xx, yy);
      }
    }
    const double det = sxx * syy - sxy * sxy;
    const double trace = sxx + syy;
    out(x, y) = det - params.harris_k * trace * trace;
  }
}

}  // namespace

Image<double> harris_response(const Image<double>& gray, const FeatureParams& params) {
  const TensorImages t = gradient_products(gray);
  const std::vector<double> weight = binomial_weights(params.smoothing_radius);
  Image<double> response(gray.width(), gray.height());
  parallel_for(gray.height(), [&](std::int64_t y) {
    harris_row(t, params, weight, static_cast<int>(y), response);
  });
  return response;
}

Image<double> harris_response_serial(const Image<double>& gray, const FeatureParams& params) {
  TensorImages t{Image<double>(gray.width(), gray.height()),
                 Image<double>(gray.width(), gray.height()),
                 Image<double>(gray.width(), gray.height())};
  const int w = gray.width(), h = gray.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
      const double gx = 0.5 * (gray(xp, y) - gray(xm, y));
      const double gy = 0.5 * (gray(x, yp) - gray(x, ym));
      t.xx(x, y) = gx * gx;
      t.yy(x, y) = gy * gy;
      t.xy(x, y) = gx * gy;
    }
  Image<double> response(w, h);
  const std::vector<double> weight = binomial_weights(params.smoothing_radius);
  for (int y = 0; y < h; ++y) harris_row(t, params, weight, y, response);
  return response;
}

FeatureSet detect_features(const Image<double>& gray, const FeatureParams& params) {
  if (gray.width() < 4 * params.patch_radius || gray.height() < 4 * params.patch_radius)
    throw DataError("detect_features: image too small for the patch size");

  const Image<double> response = harris_response(gray, params);
  double max_response = 0;
  for (double v : response.data()) max_response = std::max(max_response, v);
  const double threshold = params.quality_level * max_response;

  struct Candidate {
    double response;
    int x, y;
  };
  std::vector<Candidate> candidates;
  const int border = params.patch_radius + 1;
  const int r = params.nms_radius;
  for (int y = border; y < gray.height() - border; ++y)
    for (int x = border; x < gray.width() - border; ++x) {
      const double v = response(x, y);
      if (v <= threshold || v <= 0) continue;
      bool is_max = true;
      for (int dy = -r; dy <= r && is_max; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double n = response(x + dx, y + dy);
          // Strict tie-break by scan order keeps exactly one of a plateau.
          if (n > v || (n == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) candidates.push_back({v, x, y});
    }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (static_cast<int>(candidates.size()) > params.max_features)
    candidates.resize(params.max_features);

  FeatureSet set;
  const int patch = 2 * params.patch_radius;
  set.descriptor_size = patch * patch;
  set.keypoints.reserve(candidates.size());
  set.descriptors.reserve(candidates.size() * set.descriptor_size);

  auto bilinear = [&](double x, double y) {
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const int x1 = std::min(x0 + 1, gray.width() - 1), y1 = std::min(y0 + 1, gray.height() - 1);
    return (1 - fx) * (1 - fy) * gray(x0, y0) + fx * (1 - fy) * gray(x1, y0) +
           (1 - fx) * fy * gray(x0, y1) + fx * fy * gray(x1, y1);
  };

  for (const Candidate& c : candidates) {
    // Quadratic subpixel peak of the response surface.
    const double dx = 0.5 * (response(c.x + 1, c.y) - response(c.x - 1, c.y));
    const double dy = 0.5 * (response(c.x, c.y + 1) - response(c.x, c.y - 1));
    const double dxx = response(c.x + 1, c.y) - 2 * c.response + response(c.x - 1, c.y);
    const double dyy = response(c.x, c.y + 1) - 2 * c.response + response(c.x, c.y - 1);
    const double dxy = 0.25 * (response(c.x + 1, c.y + 1) - response(c.x - 1, c.y + 1) -
                               response(c.x + 1, c.y - 1) + response(c.x - 1, c.y - 1));
    double ox = 0, oy = 0;
    const double det = dxx * dyy - dxy * dxy;
    if (std::abs(det) > 1e-18) {
      ox = -(dyy * dx - dxy * dy) / det;
      oy = -(dxx * dy - dxy * dx) / det;
      if (std::abs(ox) > 0.5 || std::abs(oy) > 0.5) ox = oy = 0;
    }
    const Vec2 position(c.x + ox, c.y + oy);

    // Zero-mean, unit-norm patch sampled at unit spacing around the corner.
    std::vector<float> d(set.descriptor_size);
    double mean = 0;
    for (int py = 0; py < patch; ++py)
      for (int px = 0; px < patch; ++px) {
        const double v = bilinear(position.x() + px - params.patch_radius + 0.5,
                                  position.y() + py - params.patch_radius + 0.5);
        d[py * patch + px] = static_cast<float>(v);
        mean += v;
      }
    mean /= set.descriptor_size;
    double norm = 0;
    for (float& v : d) {
      v = static_cast<float>(v - mean);
      norm += static_cast<double>(v) * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-9) continue;  // textureless patch, useless descriptor
    for (float& v : d) v = static_cast<float>(v / norm);

    set.keypoints.push_back({position, c.response});
    set.descriptors.insert(set.descriptors.end(), d.begin(), d.end());
  }
  return set;
}

std::vector<FeatureMatch> match_features(const FeatureSet& a, const FeatureSet& b,
                                         double ratio_threshold) {
  std::vector<FeatureMatch> matches;
  if (a.size() == 0 || b.size() == 0) return matches;
  if (a.descriptor_size != b.descriptor_size)
    throw DataError("match_features: descriptor sizes differ");
  const int dim = a.descriptor_size;

  auto best_two = [&](const float* query, const FeatureSet& set, int& best, double& d1,
                      double& d2) {
    best = -1;
    d1 = d2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < set.size(); ++j) {
      const float* cand = set.descriptor(j);
      double d = 0;
      for (int k = 0; k < dim; ++k) {
        const double diff = static_cast<double>(query[k]) - cand[k];
        d += diff * diff;
      }
      if (d < d1) {
        d2 = d1;
        d1 = d;
        best = j;
      } else if (d < d2) {
        d2 = d;
      }
    }
  };

  std::vector<int> forward(a.size(), -1);
  std::vector<double> forward_d1(a.size()), forward_d2(a.size());
  parallel_for(a.size(), [&](std::int64_t i) {
    best_two(a.descriptor(static_cast<int>(i)), b, forward[i], forward_d1[i], forward_d2[i]);
  });
  std::vector<int> backward(b.size(), -1);
  parallel_for(b.size(), [&](std::int64_t j) {
    int best;
    double d1, d2;
    best_two(b.descriptor(static_cast<int>(j)), a, best, d1, d2);
    backward[j] = best;
  });

  const double ratio_sq = ratio_threshold * ratio_threshold;
  for (int i = 0; i < a.size(); ++i) {
    const int j = forward[i];
    if (j < 0 || backward[j] != i) continue;
    if (forward_d1[i] >= ratio_sq * forward_d2[i]) continue;
    matches.push_back({i, j, a.keypoints[i].position, b.keypoints[j].position,
                       std::sqrt(forward_d1[i])});
  }
  return matches;
}

}  // namespace fringeslam::registration
