#include "fringeslam/phase/patterns.hpp"

#include <cmath>
#include <numbers>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/parallel.hpp"

namespace fringeslam::phase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_pattern_geometry(int width, int height, double fringe_width) {
  if (width <= 0 || height <= 0) throw ConfigError("patterns: dimensions must be positive");
  if (!(fringe_width > 0) || !std::isfinite(fringe_width))
    throw ConfigError("patterns: fringe width must be positive");
}

}  // namespace

double fringe_value(double coord, double fringe_width, int shift_index, int steps,
                    double background, double amplitude) {
  const double shift = kTwoPi * shift_index / steps;
  return background + amplitude * std::cos(kTwoPi * coord / fringe_width - shift);
}

bool gray_bit(double coord, double fringe_width, int bit, int pattern_count) {
  const double p = std::floor(coord / fringe_width);
  const auto period = p > 0 ? static_cast<std::uint32_t>(p) : 0u;
  const std::uint32_t code = binary_to_gray(period);
  return (code >> (pattern_count - 1 - bit)) & 1u;
}

std::vector<FringePattern> generate_phase_patterns(int width, int height,
                                                   double fringe_width, int steps,
                                                   double background, double amplitude,
                                                   FringeAxis axis) {
  check_pattern_geometry(width, height, fringe_width);
  if (steps < 3) throw ConfigError("patterns: need at least 3 phase shifts");
  if (!(amplitude > 0) || amplitude > background || background + amplitude > 1.0)
    throw ConfigError("patterns: need 0 < amplitude <= background, background + amplitude <= 1");

  std::vector<FringePattern> patterns;
  patterns.reserve(steps);
  for (int n = 0; n < steps; ++n) {
    FringePattern p{Image<double>(width, height), n, kTwoPi * n / steps};
    parallel_for(height, [&](std::int64_t y) {
      for (int x = 0; x < width; ++x) {
        const double coord = axis == FringeAxis::kColumns ? x : static_cast<double>(y);
        p.intensity(x, static_cast<int>(y)) =
            fringe_value(coord, fringe_width, n, steps, background, amplitude);
      }
    });
    patterns.push_back(std::move(p));
  }
  return patterns;
}

int period_count(int extent, double fringe_width) {
  if (extent <= 0) throw ConfigError("patterns: extent must be positive");
  if (!(fringe_width > 0)) throw ConfigError("patterns: fringe width must be positive");
  return static_cast<int>(std::ceil(extent / fringe_width));
}

int gray_pattern_count(int periods) {
  if (periods <= 0) throw ConfigError("patterns: period count must be positive");
  int bits = 0;
  while ((1 << bits) < periods) ++bits;
  return bits;
}

std::uint32_t binary_to_gray(std::uint32_t value) { return value ^ (value >> 1); }

std::uint32_t gray_to_binary(std::uint32_t gray) {
  std::uint32_t value = 0;
  for (; gray; gray >>= 1) value ^= gray;
  return value;
}

std::vector<Image<std::uint8_t>> generate_gray_code_patterns(int width, int height,
                                                             double fringe_width,
                                                             FringeAxis axis) {
  check_pattern_geometry(width, height, fringe_width);
  const int extent = axis == FringeAxis::kColumns ? width : height;
  const int periods = period_count(extent, fringe_width);
  const int count = gray_pattern_count(periods);

  std::vector<Image<std::uint8_t>> patterns;
  patterns.reserve(count);
  for (int bit = 0; bit < count; ++bit) {
    Image<std::uint8_t> img(width, height);
    parallel_for(height, [&](std::int64_t y) {
      for (int x = 0; x < width; ++x) {
        const double coord = axis == FringeAxis::kColumns ? x : static_cast<double>(y);
        img(x, static_cast<int>(y)) = gray_bit(coord, fringe_width, bit, count) ? 1 : 0;
      }
    });
    patterns.push_back(std::move(img));
  }
  return patterns;
}

}  // namespace fringeslam::phase
