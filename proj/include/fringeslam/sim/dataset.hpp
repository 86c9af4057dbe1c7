#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fringeslam/sim/render.hpp"

namespace fringeslam::sim {

// One directory per dataset:
//   calibration.json, meta.json, poses_gt.csv, frame_0000/ ... frame_NNNN/
// Each frame directory holds the capture stack as 16-bit graymaps, an RGB
// texture, full-precision ground-truth depth (pfm), and stack.txt listing
// the role of every file.
struct DatasetMeta {
  PhasePatternParams phase;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  int frame_count = 0;
  std::string preset;
};

struct TurntableParams {
  int views_per_turn = 13;
  int turns = 3;
  double orbit_radius = 600.0;  // distance from the sensor to the spin axis
  double noise_sigma = 0.0;
  std::uint64_t seed = 20260816;
};

struct CorridorParams {
  int frames = 20;
  double overlap = 1.0 / 3.0;  // fraction of the view shared by neighbors
  double noise_sigma = 0.0;
  std::uint64_t seed = 20260816;
};

// Desk-scale defaults shared by both presets: 480x300 camera, 456x570
// projector offset 150 mm to the sensor's right and toed in on the subject.
geometry::CalibrationPair default_desk_calibration();
Scene default_turntable_scene();
Scene default_corridor_scene(int frames, double step);

// Sensor orbit around the vertical axis through the subject; pose k rotates
// 2*pi*k/views_per_turn, so pose views_per_turn coincides with pose 0.
geometry::RigidTransform turntable_pose(const TurntableParams& params, int frame);

// Lateral track along +x; the step length realizes the overlap fraction.
double corridor_step(const geometry::CalibrationPair& calibration, double overlap,
                     double wall_distance);
geometry::RigidTransform corridor_pose(double step, int frame);

struct DatasetPaths {
  std::filesystem::path root;
  std::filesystem::path calibration;
  std::filesystem::path meta;
  std::filesystem::path poses;
  std::vector<std::filesystem::path> frames;
};

DatasetPaths generate_turntable_dataset(const std::filesystem::path& out_dir,
                                        const TurntableParams& params = {},
                                        const PhasePatternParams& phase = {});
DatasetPaths generate_corridor_dataset(const std::filesystem::path& out_dir,
                                       const CorridorParams& params = {},
                                       const PhasePatternParams& phase = {});

// Reader side.
struct Dataset {
  std::filesystem::path root;
  DatasetMeta meta;
  geometry::CalibrationPair calibration;
  std::vector<std::filesystem::path> frame_dirs;
  std::vector<geometry::RigidTransform> gt_poses;  // empty when absent
};

Dataset open_dataset(const std::filesystem::path& root);

// Reads one frame's stack back at disk precision (16-bit quantized).
CaptureStack read_capture_stack(const std::filesystem::path& frame_dir,
                                const DatasetMeta& meta,
                                const geometry::CalibrationPair& calibration);

Image<double> read_ground_truth_depth(const std::filesystem::path& frame_dir);

// Shared by generators and tests that need frame data without a directory.
void write_capture_stack(const std::filesystem::path& frame_dir, const CaptureStack& stack,
                         const GroundTruthFrame& ground_truth);

void save_poses_csv(const std::filesystem::path& path,
                    const std::vector<geometry::RigidTransform>& poses);
std::vector<geometry::RigidTransform> load_poses_csv(const std::filesystem::path& path);

void save_dataset_meta(const std::filesystem::path& path, const DatasetMeta& meta);
DatasetMeta load_dataset_meta(const std::filesystem::path& path);

}  // namespace fringeslam::sim
