#pragma once

#include <cstdint>
#include <vector>

#include "fringeslam/core/image.hpp"

namespace fringeslam::phase {

// Axis along which the pattern coordinate runs. Columns means vertical
// fringes: intensity varies with x, which is the default for a projector
// mounted beside the camera.
enum class FringeAxis { kColumns, kRows };

struct FringePattern {
  Image<double> intensity;  // [0, 1]
  int shift_index = 0;      // n in 0..steps-1
  double phase_shift = 0;   // 2*pi*n/steps
};

// Equal-step sinusoidal fringe set:
//   I_n(x) = background + amplitude * cos(2*pi*x/fringe_width - shift_n).
// Requires steps >= 3, 0 < amplitude <= background, background + amplitude <= 1.
std::vector<FringePattern> generate_phase_patterns(int width, int height,
                                                   double fringe_width, int steps,
                                                   double background, double amplitude,
                                                   FringeAxis axis = FringeAxis::kColumns);

// Binary Gray-code set indexing the fringe period floor(x/fringe_width),
// most significant bit first. ceil(log2(periods)) patterns; empty when a
// single period covers the full extent.
std::vector<Image<std::uint8_t>> generate_gray_code_patterns(int width, int height,
                                                             double fringe_width,
                                                             FringeAxis axis = FringeAxis::kColumns);

// Number of fringe periods needed to cover extent pixels.
int period_count(int extent, double fringe_width);

// Patterns required for the given period count: ceil(log2(periods)), 0 for 1.
int gray_pattern_count(int periods);

std::uint32_t binary_to_gray(std::uint32_t value);
std::uint32_t gray_to_binary(std::uint32_t gray);

// Continuous-coordinate pattern values; the sampled images above are these
// functions evaluated at integer coordinates. The simulator shares them so
// projected light and uploaded patterns agree exactly.
double fringe_value(double coord, double fringe_width, int shift_index, int steps,
                    double background, double amplitude);
bool gray_bit(double coord, double fringe_width, int bit, int pattern_count);

}  // namespace fringeslam::phase
