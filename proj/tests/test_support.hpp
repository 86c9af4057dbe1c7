#pragma once

#include <random>

#include "fringeslam/geometry/types.hpp"

namespace test_support {

using fringeslam::geometry::Mat3;
using fringeslam::geometry::RigidTransform;
using fringeslam::geometry::Vec3;

// Uniform random rotation via normalized quaternion samples.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_vector(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Vec3 random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = Vec3(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline RigidTransform random_transform(std::mt19937_64& rng, double translation_scale = 100) {
  return {random_rotation(rng), random_vector(rng, translation_scale)};
}

}  // namespace test_support
