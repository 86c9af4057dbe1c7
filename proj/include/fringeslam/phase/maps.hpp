#pragma once

#include <cstdint>

#include "fringeslam/core/image.hpp"

namespace fringeslam::phase {

// Wrapped phase in (-pi, pi] with per-pixel validity and modulation
// amplitude. Pixels below the modulation threshold are invalid and carry
// phase 0.
struct PhaseMap {
  Image<double> wrapped;
  Image<double> modulation;
  MaskImage valid;
};

// Fringe period index per pixel. Raw decode output satisfies
// 0 <= order < periods on valid pixels; after half-period alignment the
// effective order may reach periods.
struct FringeOrderMap {
  Image<std::int32_t> order;
  MaskImage valid;
  int periods = 1;
};

// Unwrapped phase, non-negative on valid pixels.
struct AbsolutePhaseMap {
  Image<double> phase;
  MaskImage valid;
  double fringe_width = 0;
};

}  // namespace fringeslam::phase
