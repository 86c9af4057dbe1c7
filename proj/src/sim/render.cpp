#include "fringeslam/sim/render.hpp"

#include <cmath>
#include <numbers>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/parallel.hpp"
#include "fringeslam/core/rng.hpp"
#include "fringeslam/geometry/projection.hpp"

namespace fringeslam::sim {

namespace {

using geometry::Mat3;
using geometry::Mat34;
using geometry::RigidTransform;
using geometry::Vec3;

struct FrameGeometry {
  Image<double> depth;
  MaskImage hit;
  Image<Vec3> points_rig;
  Image<double> projector_u;
  MaskImage lit;
  Image<Rgb> albedo;
};

struct CameraRays {
  Vec3 origin_world;
  Mat3 pixel_to_world;  // maps (u, v, 1) to an unnormalized world direction
};

CameraRays camera_rays(const geometry::CameraModel& camera, const RigidTransform& world_from_rig) {
  const Mat3 r_cam = camera.extrinsics.rotation;
  const Vec3 center_rig = -(r_cam.transpose() * camera.extrinsics.translation);
  CameraRays rays;
  rays.origin_world = world_from_rig.apply(center_rig);
  rays.pixel_to_world =
      world_from_rig.rotation() * r_cam.transpose() * camera.intrinsics.matrix().inverse();
  return rays;
}

// Shared per-pixel kernel: camera-ray hit, rig-frame point, camera depth.
// Returns false on a miss.
bool trace_pixel(const Scene& scene, const CameraRays& rays, const RigidTransform& rig_from_world,
                 const geometry::CameraModel& camera, int x, int y, Vec3& point_rig,
                 double& depth, int& primitive, Vec3& point_world) {
  const Vec3 dir = (rays.pixel_to_world * Vec3(x, y, 1.0)).normalized();
  const auto hit = raycast(scene, Ray{rays.origin_world, dir});
  if (!hit) return false;
  point_world = hit->point;
  point_rig = rig_from_world.apply(hit->point);
  depth = (camera.extrinsics.rotation * point_rig + camera.extrinsics.translation).z();
  primitive = hit->primitive;
  return depth > 0;
}

FrameGeometry trace_frame(const Scene& scene, const geometry::CalibrationPair& calibration,
                          const RigidTransform& world_from_rig) {
  const int w = calibration.camera.width, h = calibration.camera.height;
  FrameGeometry g{Image<double>(w, h), MaskImage(w, h), Image<Vec3>(w, h, Vec3::Zero()),
                  Image<double>(w, h), MaskImage(w, h), Image<Rgb>(w, h)};

  const CameraRays rays = camera_rays(calibration.camera, world_from_rig);
  const RigidTransform rig_from_world = geometry::invert(world_from_rig);
  const Mat34 projector = geometry::projection_matrix(calibration.projector);
  const Mat3 r_proj = calibration.projector.extrinsics.rotation;
  const Vec3 projector_center_world =
      world_from_rig.apply(-(r_proj.transpose() * calibration.projector.extrinsics.translation));

  parallel_for(h, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x) {
      Vec3 point_rig, point_world;
      double depth;
      int primitive;
      if (!trace_pixel(scene, rays, rig_from_world, calibration.camera, x, y, point_rig, depth,
                       primitive, point_world))
        continue;
      g.hit(x, y) = 1;
      g.depth(x, y) = depth;
      g.points_rig(x, y) = point_rig;
      g.albedo(x, y) = albedo_at(scene, primitive, point_world);

      // Projector side: on-panel, in front, and not shadowed by the scene.
      const Eigen::Vector3d hp = projector * point_rig.homogeneous();
      if (hp.z() <= 1e-9) continue;
      const double up = hp.x() / hp.z(), vp = hp.y() / hp.z();
      g.projector_u(x, y) = up;
      if (up < 0 || up >= calibration.projector.width || vp < 0 ||
          vp >= calibration.projector.height)
        continue;
      const Vec3 to_point = point_world - projector_center_world;
      const double dist = to_point.norm();
      const auto shadow = raycast(scene, Ray{projector_center_world, to_point / dist});
      if (shadow && shadow->t < dist - 1e-6) continue;
      g.lit(x, y) = 1;
    }
  });
  return g;
}

// One noise stream per (seed, capture, row); drawing order inside a row is
// fixed, so rendering is reproducible for any thread count.
template <typename Fn>
void add_noise(Image<double>& image, double sigma, std::uint64_t seed, std::uint64_t capture_salt,
               Fn value_of) {
  parallel_for(image.height(), [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    if (sigma > 0) {
      auto rng = seeded_rng(seed, capture_salt, static_cast<std::uint64_t>(y));
      std::normal_distribution<double> noise(0.0, sigma);
      for (int x = 0; x < image.width(); ++x) image(x, y) = value_of(x, y) + noise(rng);
    } else {
      for (int x = 0; x < image.width(); ++x) image(x, y) = value_of(x, y);
    }
  });
}

}  // namespace

Image<double> raycast_depth(const Scene& scene, const geometry::CameraModel& camera,
                            const RigidTransform& world_from_rig) {
  validate(scene);
  geometry::validate(camera);
  Image<double> depth(camera.width, camera.height);
  const CameraRays rays = camera_rays(camera, world_from_rig);
  const RigidTransform rig_from_world = geometry::invert(world_from_rig);
  parallel_for(camera.height, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < camera.width; ++x) {
      Vec3 point_rig, point_world;
      double z;
      int primitive;
      depth(x, y) = trace_pixel(scene, rays, rig_from_world, camera, x, y, point_rig, z,
                                primitive, point_world)
                        ? z
                        : 0.0;
    }
  });
  return depth;
}

Image<double> raycast_depth_serial(const Scene& scene, const geometry::CameraModel& camera,
                                   const RigidTransform& world_from_rig) {
  validate(scene);
  geometry::validate(camera);
  Image<double> depth(camera.width, camera.height);
  const CameraRays rays = camera_rays(camera, world_from_rig);
  const RigidTransform rig_from_world = geometry::invert(world_from_rig);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      Vec3 point_rig, point_world;
      double z;
      int primitive;
      depth(x, y) = trace_pixel(scene, rays, rig_from_world, camera, x, y, point_rig, z,
                                primitive, point_world)
                        ? z
                        : 0.0;
    }
  }
  return depth;
}

CaptureStack render_capture_stack(const Scene& scene, const geometry::CalibrationPair& calibration,
                                  const RigidTransform& world_from_rig,
                                  const PhasePatternParams& phase_params,
                                  const RenderOptions& options, GroundTruthFrame* ground_truth) {
  validate(scene);
  geometry::validate(calibration);
  if (phase_params.steps < 3) throw ConfigError("render: need at least 3 phase steps");
  if (!(phase_params.fringe_width > 0)) throw ConfigError("render: fringe width must be positive");
  if (options.noise_sigma < 0) throw ConfigError("render: noise sigma must be non-negative");

  FrameGeometry g = trace_frame(scene, calibration, world_from_rig);
  const int w = calibration.camera.width, h = calibration.camera.height;
  const int periods = phase::period_count(calibration.projector.width, phase_params.fringe_width);
  const int bits = phase::gray_pattern_count(periods);

  CaptureStack stack;
  stack.phase = phase_params;
  stack.periods = periods;

  auto luma = [&](int x, int y) { return luminance(g.albedo(x, y)); };
  std::uint64_t capture_salt = 0;

  for (int n = 0; n < phase_params.steps; ++n) {
    phase::FringePattern capture{Image<double>(w, h), n,
                                 2.0 * std::numbers::pi * n / phase_params.steps};
    add_noise(capture.intensity, options.noise_sigma, options.seed, capture_salt++, [&](int x, int y) {
      if (!g.lit(x, y)) return 0.0;
      return luma(x, y) * phase::fringe_value(g.projector_u(x, y), phase_params.fringe_width, n,
                                              phase_params.steps, phase_params.background,
                                              phase_params.amplitude);
    });
    stack.phase_captures.push_back(std::move(capture));
  }

  for (int b = 0; b < bits; ++b) {
    Image<double> capture(w, h);
    add_noise(capture, options.noise_sigma, options.seed, capture_salt++, [&](int x, int y) {
      if (!g.lit(x, y)) return 0.0;
      return phase::gray_bit(g.projector_u(x, y), phase_params.fringe_width, b, bits)
                 ? luma(x, y)
                 : 0.0;
    });
    stack.gray_captures.push_back(std::move(capture));
  }

  stack.black = Image<double>(w, h);
  add_noise(stack.black, options.noise_sigma, options.seed, capture_salt++,
            [&](int, int) { return 0.0; });
  stack.white = Image<double>(w, h);
  add_noise(stack.white, options.noise_sigma, options.seed, capture_salt++,
            [&](int x, int y) { return g.lit(x, y) ? luma(x, y) : 0.0; });

  // Texture: albedo under projector white light with a dim fill where the
  // projector cannot reach, so feature matching still sees the scene there.
  stack.texture = Image<Rgb>(w, h);
  const std::uint64_t texture_salt = capture_salt;
  parallel_for(h, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    auto rng = seeded_rng(options.seed, texture_salt, static_cast<std::uint64_t>(y));
    std::normal_distribution<double> noise(0.0, options.noise_sigma);
    for (int x = 0; x < w; ++x) {
      double light = 0.0;
      if (g.hit(x, y)) light = g.lit(x, y) ? 1.0 : options.shadow_texture_light;
      const Rgb& a = g.albedo(x, y);
      Rgb out{a.r * light, a.g * light, a.b * light};
      if (options.noise_sigma > 0) {
        out.r += noise(rng);
        out.g += noise(rng);
        out.b += noise(rng);
      }
      stack.texture(x, y) = out;
    }
  });

  if (ground_truth) {
    *ground_truth = GroundTruthFrame{std::move(g.depth), std::move(g.hit), std::move(g.points_rig),
                                     std::move(g.projector_u), std::move(g.lit), world_from_rig};
  }
  return stack;
}

}  // namespace fringeslam::sim
