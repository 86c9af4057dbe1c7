#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fringeslam/core/image.hpp"
#include "fringeslam/geometry/types.hpp"

namespace fringeslam::registration {

using geometry::Vec3;

// Organized cloud: every point keeps its source pixel, and pixel_index maps
// pixels back to point indices (-1 where reconstruction failed).
struct FramePointCloud {
  int frame_id = 0;
  std::vector<Vec3> points;   // rig-frame coordinates, mm
  std::vector<Rgb8> colors;
  Image<std::int32_t> pixel_index;

  int width() const { return pixel_index.width(); }
  int height() const { return pixel_index.height(); }
};

void validate(const FramePointCloud& cloud);

// One survivor per occupied voxel: the member nearest the voxel centroid
// (lowest index on ties), deterministic ordering. Used to thin dense clouds
// before ICP; survivors are actual input points, so per-point attributes can
// be carried through via the index variant.
std::vector<Vec3> voxel_downsample(const std::vector<Vec3>& points, double voxel_mm);
std::vector<std::size_t> voxel_downsample_indices(const std::vector<Vec3>& points,
                                                  double voxel_mm);

// Median nearest-neighbor distance over a deterministic point subsample;
// the natural length scale of a cloud's sampling density.
double median_point_spacing(const std::vector<Vec3>& points, int sample_limit = 2000);

// Binary little-endian PLY. frame_ids may be empty (omits the property).
void write_ply(const std::filesystem::path& path, const std::vector<Vec3>& points,
               const std::vector<Rgb8>& colors, const std::vector<std::int32_t>& frame_ids = {});

}  // namespace fringeslam::registration
