#include "fringeslam/registration/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/registration/kdtree.hpp"

namespace fringeslam::registration {

void validate(const FramePointCloud& cloud) {
  if (cloud.points.size() != cloud.colors.size())
    throw DataError("cloud: point/color count mismatch");
  std::size_t mapped = 0;
  for (std::size_t i = 0; i < cloud.pixel_index.size(); ++i) {
    const std::int32_t idx = cloud.pixel_index[i];
    if (idx < 0) continue;
    if (static_cast<std::size_t>(idx) >= cloud.points.size())
      throw DataError("cloud: pixel index out of range");
    ++mapped;
  }
  if (mapped != cloud.points.size())
    throw DataError("cloud: every point needs exactly one source pixel");
}

std::vector<std::size_t> voxel_downsample_indices(const std::vector<Vec3>& points,
                                                  double voxel_mm) {
  if (!(voxel_mm > 0)) throw ConfigError("voxel_downsample: voxel size must be positive");
  using Key = std::tuple<long long, long long, long long>;
  struct Cell {
    Vec3 sum = Vec3::Zero();  // explicit: default Vec3 is uninitialized
    int count = 0;
    int medoid = -1;
    double medoid_distance = 0;
  };
  const auto key_of = [voxel_mm](const Vec3& p) {
    return Key{static_cast<long long>(std::floor(p.x() / voxel_mm)),
               static_cast<long long>(std::floor(p.y() / voxel_mm)),
               static_cast<long long>(std::floor(p.z() / voxel_mm))};
  };
  // std::map keeps key order deterministic regardless of insertion order.
  std::map<Key, Cell> cells;
  for (const Vec3& p : points) {
    Cell& cell = cells[key_of(p)];
    cell.sum += p;
    cell.count += 1;
  }
  // Keep the member nearest its cell centroid rather than the centroid itself:
  // the survivors are actual measured surface points, and a cloud downsampled
  // against itself stays a subset of itself.
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    Cell& cell = cells[key_of(points[i])];
    const double d = (points[i] - cell.sum / cell.count).squaredNorm();
    if (cell.medoid < 0 || d < cell.medoid_distance) {
      cell.medoid = i;
      cell.medoid_distance = d;
    }
  }
  std::vector<std::size_t> result;
  result.reserve(cells.size());
  for (const auto& [key, cell] : cells) result.push_back(static_cast<std::size_t>(cell.medoid));
  return result;
}

std::vector<Vec3> voxel_downsample(const std::vector<Vec3>& points, double voxel_mm) {
  std::vector<Vec3> result;
  const auto indices = voxel_downsample_indices(points, voxel_mm);
  result.reserve(indices.size());
  for (std::size_t i : indices) result.push_back(points[i]);
  return result;
}

double median_point_spacing(const std::vector<Vec3>& points, int sample_limit) {
  if (points.size() < 2) throw DegeneracyError("point spacing: need at least 2 points");
  const KdTree tree(points);
  const std::size_t stride = std::max<std::size_t>(1, points.size() / sample_limit);
  std::vector<double> distances;
  for (std::size_t i = 0; i < points.size(); i += stride) {
    const auto nn = tree.nearest_excluding(points[i], static_cast<int>(i));
    distances.push_back(std::sqrt(nn.squared_distance));
  }
  std::sort(distances.begin(), distances.end());
  return distances[distances.size() / 2];
}

void write_ply(const std::filesystem::path& path, const std::vector<Vec3>& points,
               const std::vector<Rgb8>& colors, const std::vector<std::int32_t>& frame_ids) {
  if (points.size() != colors.size()) throw DataError("ply: point/color count mismatch");
  if (!frame_ids.empty() && frame_ids.size() != points.size())
    throw DataError("ply: point/frame_id count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write ply: " + path.string());

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (!frame_ids.empty()) out << "property int frame_id\n";
  out << "end_header\n";

  for (std::size_t i = 0; i < points.size(); ++i) {
    const float xyz[3] = {static_cast<float>(points[i].x()), static_cast<float>(points[i].y()),
                          static_cast<float>(points[i].z())};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    out.write(reinterpret_cast<const char*>(&colors[i]), 3);
    if (!frame_ids.empty()) {
      const std::int32_t id = frame_ids[i];
      out.write(reinterpret_cast<const char*>(&id), sizeof(id));
    }
  }
  if (!out) throw DataError("short write: " + path.string());
}

}  // namespace fringeslam::registration
