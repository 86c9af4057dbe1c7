#pragma once

#include <vector>

#include "fringeslam/geometry/types.hpp"
#include "fringeslam/registration/kdtree.hpp"

namespace fringeslam::registration {

using geometry::RigidTransform;
using geometry::Vec3;

struct IcpParams {
  int max_iterations = 50;
  double tolerance = 1e-6;  // stop once the per-iteration rms improves less than this (mm)
  // Association gate, in multiples of the target cloud's median point spacing.
  // Starts wide to survive a coarse initialization and halves each iteration
  // down to the floor, so late iterations only see tight correspondences.
  double gate_start_factor = 10.0;
  double gate_floor_factor = 2.0;
  int min_points = 100;        // gated correspondences required per iteration
  double trim_fraction = 0.1;  // fraction of worst residual pairs dropped
  bool mutual = true;          // require mutual nearest neighbors
  // Adaptive residual rejection, used instead of the fixed trim when > 0: a
  // pair survives while its squared residual stays below
  // max(k^2 * median squared residual, (residual_floor_factor * spacing)^2).
  // The absolute floor keeps near-exact pairs in consensus when the median
  // collapses toward zero, which otherwise ejects the very surfaces that pin
  // the weakly constrained degrees of freedom.
  double residual_reject_k = -1.0;
  double residual_floor_factor = 0.0;
  // Optional admission schedule: the floor starts at this multiple of the
  // spacing and halves per iteration down to residual_floor_factor, so early
  // iterations keep distant-but-honest surfaces in consensus while the final
  // ones reject everything that is not already near-exact.
  double residual_floor_start_factor = -1.0;
  // Tangent-disc radius for the surface-referenced variant, in multiples of
  // the target spacing; feet farther than this from the anchor point are
  // pulled back so planes never extrapolate past their own neighborhood.
  double foot_clamp_factor = 1.5;
  // When > 0, surface-referenced pairs whose foot lies farther than this many
  // spacings from the anchor are dropped instead of clamped. Such a source
  // point projects beyond the neighborhood the target actually sampled, so it
  // has no honest counterpart (coverage boundary). Geometric rejection keeps
  // the residual cut free to stay loose, which matters because near a slightly
  // wrong pose the highest-residual pairs are the constraint carriers.
  double lateral_reject_factor = -1.0;
};

struct IcpResult {
  RigidTransform transform;  // maps source into the target frame
  double rms = 0;            // rms residual of the kept pairs at the returned iterate
  int iterations = 0;
  int final_correspondences = 0;
  std::vector<double> rms_history;  // one entry per iteration, matched-set rms
};

// Point-to-point ICP. Each iteration re-associates via a kd-tree, gates and
// trims the pairs, and re-fits the absolute transform from the original source
// points, so errors never accumulate across iterations. The returned iterate
// is the one with the lowest matched-set rms. Throws DegeneracyError when the
// clouds never produce enough gated correspondences (insufficient overlap).
IcpResult icp_refine(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                     const RigidTransform& init, const IcpParams& params = {});

// Surface-referenced variant: the kd-tree association is kept, but each gated
// pair is replaced by the foot of the source point on the target point's
// tangent disc (per-point unit normals, clamped laterally). The closed-form
// update then runs on the foot pairs. On clean data the true pose is an exact
// fixed point: every source point already lies on the target surface, so all
// feet coincide with the sources and the update is the identity.
IcpResult icp_refine(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                     const std::vector<Vec3>& target_normals, const RigidTransform& init,
                     const IcpParams& params = {});

// As above, but with normals on both clouds. The foot is taken along the
// bisector of the (rotated) source normal and the target normal, which cancels
// the curvature sag of sampled curved surfaces to third order in the anchor
// distance; on planes the bisector equals the shared normal and nothing
// changes. This is the high-precision path used for the final polish.
IcpResult icp_refine(const std::vector<Vec3>& source, const std::vector<Vec3>& source_normals,
                     const std::vector<Vec3>& target, const std::vector<Vec3>& target_normals,
                     const RigidTransform& init, const IcpParams& params = {});

// Gated nearest-neighbor association of queries against a prebuilt tree.
// Returns one slot per query; misses hold index -1. The parallel version
// splits the queries across threads; both produce identical slots.
std::vector<KdTree::Neighbor> associate_nearest(const KdTree& tree,
                                                const std::vector<Vec3>& queries,
                                                double gate_squared);
std::vector<KdTree::Neighbor> associate_nearest_serial(const KdTree& tree,
                                                       const std::vector<Vec3>& queries,
                                                       double gate_squared);

}  // namespace fringeslam::registration
