#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "fringeslam/core/image.hpp"
#include "fringeslam/geometry/types.hpp"

namespace fringeslam::sim {

using geometry::Vec3;

// Procedural surface color. Checker and gradient run over the primitive's
// own 2D parameterization so patterns stay attached to the surface.
struct AlbedoSpec {
  enum class Kind { kUniform, kChecker, kGradient };
  Kind kind = Kind::kUniform;
  Rgb base{0.8, 0.8, 0.8};
  Rgb secondary{0.3, 0.3, 0.3};
  double scale = 30.0;  // checker cell edge / gradient ramp length, mm
};

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  AlbedoSpec albedo;
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  AlbedoSpec albedo;
};

// Axis-aligned box.
struct Box {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Ones();
  AlbedoSpec albedo;
};

using Primitive = std::variant<Plane, Sphere, Box>;

struct Scene {
  std::vector<Primitive> primitives;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct RayHit {
  double t = 0;        // distance along the ray, mm
  Vec3 point;          // hit position
  int primitive = -1;  // index into Scene::primitives
};

// Nearest intersection with t > t_min, or nullopt.
std::optional<RayHit> raycast(const Scene& scene, const Ray& ray, double t_min = 1e-6);

// Surface color at a point previously returned by raycast for primitive i.
Rgb albedo_at(const Scene& scene, int primitive, const Vec3& point);

void validate(const Scene& scene);

}  // namespace fringeslam::sim
