#include "fringeslam/registration/icp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/parallel.hpp"
#include "fringeslam/registration/point_cloud.hpp"
#include "fringeslam/registration/rigid_estimation.hpp"

namespace fringeslam::registration {

std::vector<KdTree::Neighbor> associate_nearest(const KdTree& tree,
                                                const std::vector<Vec3>& queries,
                                                double gate_squared) {
  std::vector<KdTree::Neighbor> slots(queries.size());
  parallel_for(static_cast<std::int64_t>(queries.size()), [&](std::int64_t i) {
    auto n = tree.nearest(queries[static_cast<std::size_t>(i)]);
    if (n.index >= 0 && n.squared_distance <= gate_squared) slots[static_cast<std::size_t>(i)] = n;
  });
  return slots;
}

std::vector<KdTree::Neighbor> associate_nearest_serial(const KdTree& tree,
                                                       const std::vector<Vec3>& queries,
                                                       double gate_squared) {
  std::vector<KdTree::Neighbor> slots(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto n = tree.nearest(queries[i]);
    if (n.index >= 0 && n.squared_distance <= gate_squared) slots[i] = n;
  }
  return slots;
}

namespace {

struct Pair {
  int source_index;
  double squared_residual;  // distance to the associated target point or foot
  Vec3 anchor;              // associated target point
  Vec3 normal;              // fit direction (surface-referenced runs only)
};

IcpResult icp_run(const std::vector<Vec3>& source, const std::vector<Vec3>* source_normals,
                  const std::vector<Vec3>& target, const std::vector<Vec3>* normals,
                  const RigidTransform& init, const IcpParams& params) {
  if (static_cast<int>(source.size()) < params.min_points ||
      static_cast<int>(target.size()) < params.min_points)
    throw DegeneracyError("icp_refine: clouds too small");

  const KdTree target_tree(target);
  const double spacing = median_point_spacing(target);
  double gate = params.gate_start_factor * spacing;
  const double gate_floor = params.gate_floor_factor * spacing;
  const double clamp_radius = params.foot_clamp_factor * spacing;
  const double residual_floor_end = params.residual_floor_factor * spacing;
  double residual_floor = params.residual_floor_start_factor > 0
                              ? params.residual_floor_start_factor * spacing
                              : residual_floor_end;

  IcpResult result;
  result.transform = init;
  double best_rms = std::numeric_limits<double>::infinity();
  double previous_rms = std::numeric_limits<double>::infinity();

  std::vector<Vec3> moved(source.size());
  RigidTransform current = init;
  for (int it = 0; it < params.max_iterations; ++it) {
    for (std::size_t i = 0; i < source.size(); ++i) moved[i] = current.apply(source[i]);

    const auto forward = associate_nearest(target_tree, moved, gate * gate);
    std::vector<char> keep(moved.size(), 1);
    if (params.mutual) {
      const KdTree moved_tree(moved);
      parallel_for(static_cast<std::int64_t>(moved.size()), [&](std::int64_t ii) {
        const auto i = static_cast<std::size_t>(ii);
        if (forward[i].index < 0) return;
        if (moved_tree.nearest(target[forward[i].index]).index != static_cast<int>(i)) keep[i] = 0;
      });
    }

    const auto foot_of = [&](const Vec3& m, const Pair& p) {
      Vec3 foot = m - p.normal * p.normal.dot(m - p.anchor);
      const Vec3 lateral = foot - p.anchor;
      const double lateral_norm = lateral.norm();
      if (lateral_norm > clamp_radius) foot = p.anchor + lateral * (clamp_radius / lateral_norm);
      return foot;
    };

    std::vector<Pair> pairs;
    pairs.reserve(moved.size());
    for (int i = 0; i < static_cast<int>(moved.size()); ++i) {
      if (forward[i].index < 0 || !keep[i]) continue;
      const Vec3& anchor = target[forward[i].index];
      if (!normals) {
        pairs.push_back({i, forward[i].squared_distance, anchor, Vec3::Zero()});
        continue;
      }
      Vec3 n = (*normals)[forward[i].index];
      if (source_normals) {
        // Bisector of the two surface normals: the first-order curvature sag
        // of the anchor sample cancels against the sag seen from the source
        // side, so curved surfaces constrain the fit as cleanly as planes.
        const Vec3 rotated = current.rotation() * (*source_normals)[i];
        const Vec3 bisector = rotated.dot(n) >= 0 ? Vec3(rotated + n) : Vec3(rotated - n);
        const double norm = bisector.norm();
        if (norm > 1e-9) n = bisector / norm;
      }
      Pair pair{i, 0.0, anchor, n};
      const Vec3 foot = moved[i] - n * n.dot(moved[i] - anchor);
      if (params.lateral_reject_factor > 0 &&
          (foot - anchor).norm() > params.lateral_reject_factor * spacing)
        continue;
      pair.squared_residual = (moved[i] - foot_of(moved[i], pair)).squaredNorm();
      pairs.push_back(pair);
    }

    if (params.residual_reject_k > 0 && pairs.size() > 3) {
      std::vector<double> squared(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) squared[i] = pairs[i].squared_residual;
      std::nth_element(squared.begin(), squared.begin() + squared.size() / 2, squared.end());
      const double k_sq = params.residual_reject_k * params.residual_reject_k;
      const double cut =
          std::max(k_sq * squared[squared.size() / 2], residual_floor * residual_floor);
      std::erase_if(pairs, [&](const Pair& p) { return p.squared_residual > cut; });
    } else if (params.trim_fraction > 0 && pairs.size() > 3) {
      std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.squared_residual != b.squared_residual)
          return a.squared_residual < b.squared_residual;
        return a.source_index < b.source_index;
      });
      const auto kept = static_cast<std::size_t>(
          std::ceil((1.0 - params.trim_fraction) * static_cast<double>(pairs.size())));
      pairs.resize(std::max<std::size_t>(kept, 3));
    }

    if (static_cast<int>(pairs.size()) < params.min_points)
      throw DegeneracyError("icp_refine: insufficient overlap between clouds");

    // Absolute re-fit from the original source points: the iterate is always a
    // single estimate, never a product of incremental updates.
    std::vector<Correspondence3D> corrs(pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j) corrs[j].source = source[pairs[j].source_index];
    if (!normals) {
      for (std::size_t j = 0; j < pairs.size(); ++j) corrs[j].target = pairs[j].anchor;
      current = umeyama_rigid(corrs);
    } else {
      // Inner fit-reproject rounds on the frozen association: recompute each
      // foot under the latest pose and fit again. This reaches the tangent
      // plane optimum of the current correspondence set instead of taking one
      // damped step, which matters along weakly constrained directions.
      for (int round = 0; round < 30; ++round) {
        for (std::size_t j = 0; j < pairs.size(); ++j)
          corrs[j].target = foot_of(current.apply(corrs[j].source), pairs[j]);
        const RigidTransform next = umeyama_rigid(corrs);
        const auto step = geometry::transform_delta(next, current);
        current = next;
        if (step.angle_rad < 1e-12 && step.translation_mm < 1e-12) break;
      }
      for (std::size_t j = 0; j < pairs.size(); ++j)
        corrs[j].target = foot_of(current.apply(corrs[j].source), pairs[j]);
    }

    double sum_sq = 0;
    for (const Correspondence3D& c : corrs)
      sum_sq += (c.target - current.apply(c.source)).squaredNorm();
    const double rms = std::sqrt(sum_sq / static_cast<double>(corrs.size()));
    result.rms_history.push_back(rms);
    result.iterations = it + 1;
    if (rms < best_rms) {
      best_rms = rms;
      result.transform = current;
      result.rms = rms;
      result.final_correspondences = static_cast<int>(pairs.size());
    }

    const bool schedule_settled =
        gate <= gate_floor + 1e-12 && residual_floor <= residual_floor_end + 1e-12;
    if (schedule_settled && std::abs(previous_rms - rms) < params.tolerance) break;
    previous_rms = rms;
    gate = std::max(0.5 * gate, gate_floor);
    residual_floor = std::max(0.5 * residual_floor, residual_floor_end);
  }
  return result;
}

}  // namespace

IcpResult icp_refine(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                     const RigidTransform& init, const IcpParams& params) {
  return icp_run(source, nullptr, target, nullptr, init, params);
}

IcpResult icp_refine(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                     const std::vector<Vec3>& target_normals, const RigidTransform& init,
                     const IcpParams& params) {
  if (target_normals.size() != target.size())
    throw DataError("icp_refine: normals must pair with target points");
  return icp_run(source, nullptr, target, &target_normals, init, params);
}

IcpResult icp_refine(const std::vector<Vec3>& source, const std::vector<Vec3>& source_normals,
                     const std::vector<Vec3>& target, const std::vector<Vec3>& target_normals,
                     const RigidTransform& init, const IcpParams& params) {
  if (source_normals.size() != source.size() || target_normals.size() != target.size())
    throw DataError("icp_refine: normals must pair with their points");
  return icp_run(source, &source_normals, target, &target_normals, init, params);
}

}  // namespace fringeslam::registration
