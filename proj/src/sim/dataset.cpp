#include "fringeslam/sim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/image_io.hpp"
#include "fringeslam/core/rng.hpp"

namespace fringeslam::sim {

namespace {

using geometry::RigidTransform;
using geometry::Vec3;
using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string frame_dir_name(int frame) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "frame_%04d", frame);
  return buf;
}

AlbedoSpec checker(Rgb base, Rgb secondary, double scale) {
  return {AlbedoSpec::Kind::kChecker, base, secondary, scale};
}

DatasetPaths generate_dataset(const std::filesystem::path& out_dir, const Scene& scene,
                              const geometry::CalibrationPair& calibration,
                              const std::vector<RigidTransform>& poses,
                              const PhasePatternParams& phase, double noise_sigma,
                              std::uint64_t seed, const std::string& preset) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create dataset directory: " + out_dir.string());

  DatasetPaths paths;
  paths.root = out_dir;
  paths.calibration = out_dir / "calibration.json";
  paths.meta = out_dir / "meta.json";
  paths.poses = out_dir / "poses_gt.csv";

  geometry::save_calibration(paths.calibration, calibration);
  save_dataset_meta(paths.meta, {phase, noise_sigma, seed, static_cast<int>(poses.size()), preset});
  save_poses_csv(paths.poses, poses);

  for (int k = 0; k < static_cast<int>(poses.size()); ++k) {
    RenderOptions options;
    options.noise_sigma = noise_sigma;
    options.seed = mix_seed(seed, static_cast<std::uint64_t>(k));
    GroundTruthFrame ground_truth;
    const CaptureStack stack =
        render_capture_stack(scene, calibration, poses[k], phase, options, &ground_truth);
    const auto frame_dir = out_dir / frame_dir_name(k);
    std::filesystem::create_directories(frame_dir);
    write_capture_stack(frame_dir, stack, ground_truth);
    paths.frames.push_back(frame_dir);
  }
  return paths;
}

}  // namespace

geometry::CalibrationPair default_desk_calibration() {
  geometry::CalibrationPair calibration;
  calibration.camera.width = 480;
  calibration.camera.height = 300;
  calibration.camera.intrinsics = {600.0, 600.0, 239.5, 149.5};

  calibration.projector.width = 456;
  calibration.projector.height = 570;
  calibration.projector.intrinsics = {700.0, 700.0, 227.5, 284.5};
  // 150 mm baseline to the camera's right, toed in on the subject at 600 mm.
  const Vec3 position(150.0, 0.0, 0.0);
  const Vec3 target(0.0, 0.0, 600.0);
  const Vec3 z = (target - position).normalized();
  const Vec3 x = Vec3(0, 1, 0).cross(z).normalized();
  const Vec3 y = z.cross(x);
  geometry::Mat3 r;
  r.row(0) = x;
  r.row(1) = y;
  r.row(2) = z;
  calibration.projector.extrinsics.rotation = r;
  calibration.projector.extrinsics.translation = -(r * position);
  return calibration;
}

Scene default_turntable_scene() {
  Scene scene;
  // Subject cluster at 600 mm; deliberately asymmetric so every rigid degree
  // of freedom is pinned by geometry alone.
  scene.primitives.push_back(
      Box{{-130, 60, 470}, {130, 170, 730}, checker({0.85, 0.8, 0.7}, {0.35, 0.3, 0.3}, 36)});
  scene.primitives.push_back(
      Sphere{{0, 15, 600}, 55, checker({0.9, 0.6, 0.45}, {0.4, 0.25, 0.2}, 24)});
  scene.primitives.push_back(
      Sphere{{-18, -52, 588}, 30,
             {AlbedoSpec::Kind::kGradient, {0.85, 0.82, 0.6}, {0.3, 0.35, 0.5}, 26}});
  scene.primitives.push_back(
      Box{{68, -8, 552}, {116, 60, 612}, checker({0.55, 0.75, 0.85}, {0.25, 0.3, 0.35}, 17)});
  scene.primitives.push_back(
      Box{{-122, 6, 618}, {-74, 60, 670}, checker({0.75, 0.85, 0.55}, {0.3, 0.35, 0.22}, 21)});
  scene.primitives.push_back(
      Plane{{0, 170, 0}, {0, -1, 0}, checker({0.75, 0.75, 0.78}, {0.45, 0.45, 0.5}, 60)});
  return scene;
}

geometry::RigidTransform turntable_pose(const TurntableParams& params, int frame) {
  if (params.views_per_turn < 3) throw ConfigError("turntable: need at least 3 views per turn");
  if (!(params.orbit_radius > 0)) throw ConfigError("turntable: orbit radius must be positive");
  const double angle = 2.0 * std::numbers::pi * frame / params.views_per_turn;
  // Rotation about the vertical axis through the subject center; pose 0 is
  // the identity so the world frame equals the first rig frame.
  const Vec3 pivot(0, 0, params.orbit_radius);
  const geometry::Mat3 r = geometry::axis_angle_rotation({0, 1, 0}, angle);
  return {r, pivot - r * pivot};
}

Scene default_corridor_scene(int frames, double step) {
  Scene scene;
  const double span = step * std::max(frames - 1, 1);
  // Back wall and floor run the full track length.
  scene.primitives.push_back(
      Plane{{0, 0, 700}, {0, 0, -1}, checker({0.8, 0.78, 0.72}, {0.4, 0.38, 0.36}, 45)});
  scene.primitives.push_back(
      Plane{{0, 170, 0}, {0, -1, 0}, checker({0.7, 0.7, 0.74}, {0.42, 0.42, 0.46}, 55)});
  // Wall furniture at alternating heights and depths for parallax.
  const Rgb palette[3] = {{0.85, 0.55, 0.4}, {0.5, 0.75, 0.85}, {0.65, 0.85, 0.55}};
  for (int i = 0;; ++i) {
    const double x = -250.0 + 230.0 * i;
    if (x >= span + 250.0) break;
    const double y0 = -85.0 + 45.0 * (i % 3);
    if (i % 4 == 3) {
      scene.primitives.push_back(Sphere{{x, y0 + 20.0, 640.0}, 34.0,
                                        checker(palette[i % 3], {0.25, 0.25, 0.28}, 16)});
    } else {
      scene.primitives.push_back(Box{{x - 42.0, y0, 612.0 + 12.0 * (i % 2)},
                                     {x + 42.0, y0 + 70.0, 700.0},
                                     checker(palette[i % 3], {0.28, 0.26, 0.3}, 19)});
    }
  }
  return scene;
}

double corridor_step(const geometry::CalibrationPair& calibration, double overlap,
                     double wall_distance) {
  if (!(overlap > 0) || overlap >= 1) throw ConfigError("corridor: overlap must be in (0, 1)");
  const double footprint =
      calibration.camera.width / calibration.camera.intrinsics.fx * wall_distance;
  return (1.0 - overlap) * footprint;
}

geometry::RigidTransform corridor_pose(double step, int frame) {
  return {geometry::Mat3::Identity(), Vec3(step * frame, 0, 0)};
}

DatasetPaths generate_turntable_dataset(const std::filesystem::path& out_dir,
                                        const TurntableParams& params,
                                        const PhasePatternParams& phase) {
  if (params.turns < 1) throw ConfigError("turntable: need at least 1 turn");
  std::vector<RigidTransform> poses;
  for (int k = 0; k < params.views_per_turn * params.turns; ++k)
    poses.push_back(turntable_pose(params, k));
  return generate_dataset(out_dir, default_turntable_scene(), default_desk_calibration(), poses,
                          phase, params.noise_sigma, params.seed, "turntable");
}

DatasetPaths generate_corridor_dataset(const std::filesystem::path& out_dir,
                                       const CorridorParams& params,
                                       const PhasePatternParams& phase) {
  if (params.frames < 2) throw ConfigError("corridor: need at least 2 frames");
  const auto calibration = default_desk_calibration();
  const double step = corridor_step(calibration, params.overlap, 700.0);
  std::vector<RigidTransform> poses;
  for (int k = 0; k < params.frames; ++k) poses.push_back(corridor_pose(step, k));
  return generate_dataset(out_dir, default_corridor_scene(params.frames, step), calibration,
                          poses, phase, params.noise_sigma, params.seed, "corridor");
}

void write_capture_stack(const std::filesystem::path& frame_dir, const CaptureStack& stack,
                         const GroundTruthFrame& ground_truth) {
  std::ofstream manifest(frame_dir / "stack.txt");
  if (!manifest) throw DataError("cannot write manifest: " + (frame_dir / "stack.txt").string());

  char name[32];
  for (std::size_t n = 0; n < stack.phase_captures.size(); ++n) {
    std::snprintf(name, sizeof(name), "phase_%02zu.pgm", n);
    write_pgm(frame_dir / name, stack.phase_captures[n].intensity);
    manifest << "phase " << n << " " << name << "\n";
  }
  for (std::size_t b = 0; b < stack.gray_captures.size(); ++b) {
    std::snprintf(name, sizeof(name), "gray_%02zu.pgm", b);
    write_pgm(frame_dir / name, stack.gray_captures[b]);
    manifest << "gray " << b << " " << name << "\n";
  }
  write_pgm(frame_dir / "black.pgm", stack.black);
  manifest << "black black.pgm\n";
  write_pgm(frame_dir / "white.pgm", stack.white);
  manifest << "white white.pgm\n";
  write_ppm(frame_dir / "texture.ppm", stack.texture);
  manifest << "texture texture.ppm\n";
  write_pfm(frame_dir / "depth_gt.pfm", ground_truth.depth);
  manifest << "depth_gt depth_gt.pfm\n";
  // 16-bit preview of the depth, scaled to its own maximum.
  double max_depth = 0;
  for (double d : ground_truth.depth.data()) max_depth = std::max(max_depth, d);
  if (max_depth > 0) {
    Image<double> preview(ground_truth.depth.width(), ground_truth.depth.height());
    for (std::size_t i = 0; i < preview.size(); ++i)
      preview[i] = ground_truth.depth[i] / max_depth;
    write_pgm(frame_dir / "depth_preview.pgm", preview);
    manifest << "depth_preview depth_preview.pgm " << format_double(max_depth) << "\n";
  }
}

void save_poses_csv(const std::filesystem::path& path, const std::vector<RigidTransform>& poses) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write poses: " + path.string());
  out << "frame";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << ",r" << r << c;
    out << ",t" << r;
  }
  out << "\n";
  for (std::size_t k = 0; k < poses.size(); ++k) {
    out << k;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << "," << format_double(poses[k].rotation()(r, c));
      out << "," << format_double(poses[k].translation()(r));
    }
    out << "\n";
  }
}

std::vector<RigidTransform> load_poses_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open poses: " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<RigidTransform> poses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != 13) throw DataError("poses: expected 13 columns per row");
    if (static_cast<std::size_t>(values[0]) != poses.size())
      throw DataError("poses: frame indices must be contiguous from 0");
    geometry::Mat3 r;
    Vec3 t;
    for (int row_i = 0; row_i < 3; ++row_i) {
      for (int c = 0; c < 3; ++c) r(row_i, c) = values[1 + 4 * row_i + c];
      t(row_i) = values[1 + 4 * row_i + 3];
    }
    poses.emplace_back(r, t);
  }
  return poses;
}

void save_dataset_meta(const std::filesystem::path& path, const DatasetMeta& meta) {
  ordered_json j;
  j["preset"] = meta.preset;
  j["frames"] = meta.frame_count;
  j["noise_sigma"] = meta.noise_sigma;
  j["seed"] = meta.seed;
  j["phase"] = {{"fringe_width", meta.phase.fringe_width},
                {"steps", meta.phase.steps},
                {"background", meta.phase.background},
                {"amplitude", meta.phase.amplitude}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write meta: " + path.string());
  out << j.dump(2) << "\n";
}

DatasetMeta load_dataset_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open meta: " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
    DatasetMeta meta;
    meta.preset = j.value("preset", "");
    meta.frame_count = j.at("frames").get<int>();
    meta.noise_sigma = j.value("noise_sigma", 0.0);
    meta.seed = j.value("seed", std::uint64_t{0});
    const auto& p = j.at("phase");
    meta.phase.fringe_width = p.at("fringe_width").get<double>();
    meta.phase.steps = p.at("steps").get<int>();
    meta.phase.background = p.value("background", 0.5);
    meta.phase.amplitude = p.value("amplitude", 0.4);
    return meta;
  } catch (const ordered_json::exception& e) {
    throw DataError("meta parse error: " + std::string(e.what()));
  }
}

Dataset open_dataset(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw DataError("dataset directory not found: " + root.string());
  Dataset dataset;
  dataset.root = root;
  dataset.meta = load_dataset_meta(root / "meta.json");
  dataset.calibration = geometry::load_calibration(root / "calibration.json");
  for (int k = 0; k < dataset.meta.frame_count; ++k) {
    const auto dir = root / frame_dir_name(k);
    if (!std::filesystem::is_directory(dir))
      throw DataError("dataset: missing frame directory " + dir.string());
    dataset.frame_dirs.push_back(dir);
  }
  if (std::filesystem::exists(root / "poses_gt.csv")) {
    dataset.gt_poses = load_poses_csv(root / "poses_gt.csv");
    if (dataset.gt_poses.size() != dataset.frame_dirs.size())
      throw DataError("dataset: pose count does not match frame count");
  }
  return dataset;
}

CaptureStack read_capture_stack(const std::filesystem::path& frame_dir, const DatasetMeta& meta,
                                const geometry::CalibrationPair& calibration) {
  std::ifstream manifest(frame_dir / "stack.txt");
  if (!manifest) throw DataError("missing manifest: " + (frame_dir / "stack.txt").string());

  CaptureStack stack;
  stack.phase = meta.phase;
  stack.periods = phase::period_count(calibration.projector.width, meta.phase.fringe_width);

  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string role;
    row >> role;
    if (role == "phase") {
      int index;
      std::string file;
      row >> index >> file;
      if (index != static_cast<int>(stack.phase_captures.size()))
        throw DataError("manifest: phase captures out of order");
      stack.phase_captures.push_back(
          {read_pgm(frame_dir / file), index,
           2.0 * std::numbers::pi * index / meta.phase.steps});
    } else if (role == "gray") {
      int index;
      std::string file;
      row >> index >> file;
      if (index != static_cast<int>(stack.gray_captures.size()))
        throw DataError("manifest: gray captures out of order");
      stack.gray_captures.push_back(read_pgm(frame_dir / file));
    } else if (role == "black") {
      std::string file;
      row >> file;
      stack.black = read_pgm(frame_dir / file);
    } else if (role == "white") {
      std::string file;
      row >> file;
      stack.white = read_pgm(frame_dir / file);
    } else if (role == "texture") {
      std::string file;
      row >> file;
      stack.texture = read_ppm(frame_dir / file);
    }
    // depth_gt and depth_preview are ground truth, not part of the stack.
  }
  if (static_cast<int>(stack.phase_captures.size()) != meta.phase.steps)
    throw DataError("manifest: phase capture count does not match meta");
  if (stack.black.empty() || stack.white.empty() || stack.texture.empty())
    throw DataError("manifest: missing black, white, or texture entry");
  return stack;
}

Image<double> read_ground_truth_depth(const std::filesystem::path& frame_dir) {
  return read_pfm(frame_dir / "depth_gt.pfm");
}

}  // namespace fringeslam::sim
