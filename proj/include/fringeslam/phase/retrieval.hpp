#pragma once

#include <vector>

#include "fringeslam/phase/maps.hpp"
#include "fringeslam/phase/patterns.hpp"

namespace fringeslam::phase {

struct RetrievalParams {
  // Minimum modulation amplitude (same scale as intensities) for a pixel to
  // count as fringe-lit; shadows and dark albedo fall below it.
  double modulation_threshold = 0.02;
};

// Least-squares wrapped phase from >= 3 equally shifted captures:
//   phi = atan2(sum I_n sin d_n, sum I_n cos d_n),
//   modulation = (2/N) * sqrt((sum I sin)^2 + (sum I cos)^2).
// Exact for noiseless captures of the canonical fringe model. The _serial
// variant is the reference implementation; the default runs rows in
// parallel and produces bit-identical output.
PhaseMap compute_wrapped_phase(const std::vector<FringePattern>& captures,
                               const RetrievalParams& params = {});
PhaseMap compute_wrapped_phase_serial(const std::vector<FringePattern>& captures,
                                      const RetrievalParams& params = {});

struct DecodeParams {
  int periods = 1;
  // Minimum |capture - threshold| relative to full scale for a confident bit.
  double contrast_floor = 0.01;
};

// Per-pixel Gray-code decode against the per-pixel threshold
// (black + white) / 2. Pixels with any low-contrast bit, insufficient
// black/white separation, or a decoded period >= periods are invalid.
FringeOrderMap decode_fringe_order(const std::vector<Image<double>>& gray_captures,
                                   const Image<double>& black, const Image<double>& white,
                                   const DecodeParams& params = {});

struct AlignParams {
  // Half-width of the wrapped-phase bands around 0 and +-pi where decoded
  // orders are cross-checked against neighbors.
  double boundary_guard = 0.2;
  // In-row search radius for a confident reference pixel.
  int reference_radius = 8;
  // A pixel is only snapped when its unwrapped value sits within this window
  // of exactly one period off the reference; keeps depth edges intact.
  double snap_window = 0.5;
};

// Converts floor-convention period indices into unwrap-ready effective
// orders. The Gray transition sits mid-fringe (wrapped phase 0), so the raw
// index is incremented wherever phi < 0; near the transitions, where noise
// can flip the decoded bit, orders are reconciled with confident in-row
// neighbors. Noiseless input passes through bit-identically.
FringeOrderMap align_fringe_orders(const FringeOrderMap& decoded, const PhaseMap& wrapped,
                                   FringeAxis axis = FringeAxis::kColumns,
                                   const AlignParams& params = {});

// Phi = phi + 2*pi*K on the intersection of the validity masks. Negative
// results (possible only for misaligned orders) are marked invalid.
AbsolutePhaseMap unwrap_phase(const PhaseMap& wrapped, const FringeOrderMap& orders,
                              double fringe_width);

// Projector coordinate encoded by an absolute phase value.
double phase_to_projector_coord(double absolute_phase, double fringe_width);

// Map-level version; pixels outside [0, projector_extent) are invalidated.
Image<double> projector_coord_map(const AbsolutePhaseMap& absolute, int projector_extent,
                                  MaskImage* valid_out);

}  // namespace fringeslam::phase
