#include "fringeslam/sim/scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fringeslam/core/errors.hpp"

namespace fringeslam::sim {

namespace {

std::optional<double> intersect(const Plane& plane, const Ray& ray, double t_min) {
  const double denom = ray.direction.dot(plane.normal);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (plane.point - ray.origin).dot(plane.normal) / denom;
  return t > t_min ? std::optional<double>(t) : std::nullopt;
}

std::optional<double> intersect(const Sphere& sphere, const Ray& ray, double t_min) {
  const Vec3 oc = ray.origin - sphere.center;
  const double b = oc.dot(ray.direction);
  const double c = oc.squaredNorm() - sphere.radius * sphere.radius;
  const double disc = b * b - c;
  if (disc < 0) return std::nullopt;
  const double root = std::sqrt(disc);
  for (double t : {-b - root, -b + root})
    if (t > t_min) return t;
  return std::nullopt;
}

std::optional<double> intersect(const Box& box, const Ray& ray, double t_min) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin(axis), d = ray.direction(axis);
    const double lo = box.min_corner(axis), hi = box.max_corner(axis);
    if (std::abs(d) < 1e-15) {
      if (o < lo || o > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - o) / d, t1 = (hi - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  if (t_enter > t_min) return t_enter;
  if (t_exit > t_min) return t_exit;  // origin inside the box
  return std::nullopt;
}

// Orthonormal in-plane axes derived deterministically from the normal.
void plane_axes(const Plane& plane, Vec3& e1, Vec3& e2) {
  const Vec3 n = plane.normal.normalized();
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = n.cross(seed).normalized();
  e2 = n.cross(e1);
}

// 2D surface parameterization in mm, used to anchor procedural albedo.
Eigen::Vector2d surface_params(const Primitive& primitive, const Vec3& point) {
  if (const auto* plane = std::get_if<Plane>(&primitive)) {
    Vec3 e1, e2;
    plane_axes(*plane, e1, e2);
    const Vec3 d = point - plane->point;
    return {d.dot(e1), d.dot(e2)};
  }
  if (const auto* sphere = std::get_if<Sphere>(&primitive)) {
    const Vec3 d = (point - sphere->center).normalized();
    const double azimuth = std::atan2(d.y(), d.x());
    const double polar = std::acos(std::clamp(d.z(), -1.0, 1.0));
    return {azimuth * sphere->radius, polar * sphere->radius};
  }
  const auto& box = std::get<Box>(primitive);
  // Pick the face by the dominant normalized offset from the center, then
  // parameterize with the two in-face coordinates.
  const Vec3 center = 0.5 * (box.min_corner + box.max_corner);
  const Vec3 half = 0.5 * (box.max_corner - box.min_corner);
  const Vec3 rel = point - center;
  int face = 0;
  double best = -1;
  for (int axis = 0; axis < 3; ++axis) {
    const double v = std::abs(rel(axis)) / std::max(half(axis), 1e-12);
    if (v > best) {
      best = v;
      face = axis;
    }
  }
  const int a = (face + 1) % 3, b = (face + 2) % 3;
  return {point(a), point(b)};
}

const AlbedoSpec& spec_of(const Primitive& primitive) {
  return std::visit([](const auto& p) -> const AlbedoSpec& { return p.albedo; }, primitive);
}

}  // namespace

std::optional<RayHit> raycast(const Scene& scene, const Ray& ray, double t_min) {
  std::optional<RayHit> best;
  for (int i = 0; i < static_cast<int>(scene.primitives.size()); ++i) {
    const auto t = std::visit([&](const auto& p) { return intersect(p, ray, t_min); },
                              scene.primitives[i]);
    if (t && (!best || *t < best->t)) best = RayHit{*t, ray.origin + *t * ray.direction, i};
  }
  return best;
}

Rgb albedo_at(const Scene& scene, int primitive, const Vec3& point) {
  const Primitive& prim = scene.primitives.at(primitive);
  const AlbedoSpec& spec = spec_of(prim);
  switch (spec.kind) {
    case AlbedoSpec::Kind::kUniform:
      return spec.base;
    case AlbedoSpec::Kind::kChecker: {
      const Eigen::Vector2d uv = surface_params(prim, point);
      const auto iu = static_cast<long long>(std::floor(uv.x() / spec.scale));
      const auto iv = static_cast<long long>(std::floor(uv.y() / spec.scale));
      return ((iu ^ iv) & 1) ? spec.secondary : spec.base;
    }
    case AlbedoSpec::Kind::kGradient: {
      const Eigen::Vector2d uv = surface_params(prim, point);
      const double phase = uv.x() / spec.scale * std::numbers::pi;
      const double w = 0.5 + 0.5 * std::sin(phase);
      return {spec.base.r + w * (spec.secondary.r - spec.base.r),
              spec.base.g + w * (spec.secondary.g - spec.base.g),
              spec.base.b + w * (spec.secondary.b - spec.base.b)};
    }
  }
  return spec.base;
}

void validate(const Scene& scene) {
  if (scene.primitives.empty()) throw ConfigError("scene: no primitives");
  for (const auto& primitive : scene.primitives) {
    if (const auto* sphere = std::get_if<Sphere>(&primitive)) {
      if (!(sphere->radius > 0)) throw ConfigError("scene: sphere radius must be positive");
    } else if (const auto* box = std::get_if<Box>(&primitive)) {
      if ((box->max_corner - box->min_corner).minCoeff() <= 0)
        throw ConfigError("scene: box must have positive extent");
    } else if (const auto* plane = std::get_if<Plane>(&primitive)) {
      if (plane->normal.norm() < 1e-12) throw ConfigError("scene: plane normal is zero");
    }
  }
}

}  // namespace fringeslam::sim
