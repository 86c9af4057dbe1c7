#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/phase/patterns.hpp"
#include "fringeslam/phase/retrieval.hpp"

using namespace fringeslam;
using namespace fringeslam::phase;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_to_pi(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// Builds a 1xN capture stack for a single true phase value; independent of
// the pattern generator so retrieval is tested against the model directly.
std::vector<FringePattern> single_pixel_stack(double phi, int steps, double background,
                                              double amplitude) {
  std::vector<FringePattern> captures;
  for (int n = 0; n < steps; ++n) {
    FringePattern p{Image<double>(1, 1), n, kTwoPi * n / steps};
    p.intensity(0, 0) = background + amplitude * std::cos(phi - p.phase_shift);
    captures.push_back(std::move(p));
  }
  return captures;
}

}  // namespace

TEST_CASE("four-step pattern values at coordinate zero") {
  const auto patterns = generate_phase_patterns(8, 2, 16.0, 4, 0.5, 0.4);
  REQUIRE(patterns.size() == 4);
  const double expected[] = {0.9, 0.5, 0.1, 0.5};
  for (int n = 0; n < 4; ++n) {
    CHECK(patterns[n].shift_index == n);
    CHECK(patterns[n].phase_shift == doctest::Approx(kTwoPi * n / 4).epsilon(1e-15));
    CHECK(patterns[n].intensity(0, 0) == doctest::Approx(expected[n]).epsilon(1e-12));
    CHECK(patterns[n].intensity(0, 1) == patterns[n].intensity(0, 0));
  }
}

TEST_CASE("patterns are periodic in the fringe width and bounded") {
  const double lambda = 18.0;
  const auto patterns = generate_phase_patterns(90, 1, lambda, 5, 0.5, 0.45);
  for (const auto& p : patterns)
    for (int x = 0; x < 90; ++x) {
      const double v = p.intensity(x, 0);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (x + lambda < 90)
        CHECK(v == doctest::Approx(p.intensity(x + 18, 0)).epsilon(1e-12));
    }
}

TEST_CASE("pattern generation rejects bad parameters") {
  CHECK_THROWS_AS(generate_phase_patterns(8, 8, 16, 2, 0.5, 0.4), ConfigError);
  CHECK_THROWS_AS(generate_phase_patterns(8, 8, 16, 4, 0.4, 0.5), ConfigError);
  CHECK_THROWS_AS(generate_phase_patterns(8, 8, 16, 4, 0.7, 0.4), ConfigError);
  CHECK_THROWS_AS(generate_phase_patterns(8, 8, 0.0, 4, 0.5, 0.4), ConfigError);
  CHECK_THROWS_AS(generate_phase_patterns(0, 8, 16, 4, 0.5, 0.4), ConfigError);
}

TEST_CASE("wrapped phase: canonical four-step example") {
  std::vector<FringePattern> captures;
  const double values[] = {0.9, 0.5, 0.1, 0.5};
  for (int n = 0; n < 4; ++n) {
    FringePattern p{Image<double>(1, 1), n, kTwoPi * n / 4};
    p.intensity(0, 0) = values[n];
    captures.push_back(std::move(p));
  }
  const PhaseMap map = compute_wrapped_phase(captures);
  CHECK(map.valid(0, 0) == 1);
  CHECK(map.wrapped(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(map.modulation(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("wrapped phase retrieval is exact for the fringe model") {
  std::mt19937_64 rng(8101);
  std::uniform_real_distribution<double> phase(-kPi + 1e-6, kPi);
  std::uniform_real_distribution<double> amp(0.05, 0.45);
  for (int steps : {3, 4, 5, 8, 12}) {
    for (int trial = 0; trial < 400; ++trial) {
      const double phi = phase(rng);
      const double b = amp(rng);
      const double a = 0.5;
      const PhaseMap map = compute_wrapped_phase(single_pixel_stack(phi, steps, a, b));
      REQUIRE(map.valid(0, 0) == 1);
      CHECK(std::abs(wrap_to_pi(map.wrapped(0, 0) - phi)) < 1e-10);
      CHECK(map.modulation(0, 0) == doctest::Approx(b).epsilon(1e-9));
    }
  }
}

TEST_CASE("generated patterns round-trip through retrieval per column") {
  const double lambda = 18.0;
  const auto patterns = generate_phase_patterns(54, 2, lambda, 4, 0.5, 0.4);
  const PhaseMap map = compute_wrapped_phase(patterns);
  for (int x = 0; x < 54; ++x) {
    const double expected = wrap_to_pi(kTwoPi * x / lambda);
    CHECK(map.valid(x, 0) == 1);
    CHECK(std::abs(wrap_to_pi(map.wrapped(x, 0) - expected)) < 1e-10);
  }
}

TEST_CASE("low modulation pixels are masked") {
  auto captures = single_pixel_stack(1.0, 4, 0.5, 0.4);
  for (auto& p : captures) p.intensity(0, 0) = 0.5;  // no fringe signal at all
  const PhaseMap map = compute_wrapped_phase(captures);
  CHECK(map.valid(0, 0) == 0);
  CHECK(map.wrapped(0, 0) == 0.0);
}

TEST_CASE("wrapped phase error shrinks with more steps under noise") {
  std::mt19937_64 rng(8102);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::uniform_real_distribution<double> phase(-kPi + 0.01, kPi - 0.01);
  double previous_mae = 1e9;
  for (int steps : {3, 4, 8, 12}) {
    double mae = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      const double phi = phase(rng);
      auto captures = single_pixel_stack(phi, steps, 0.5, 0.4);
      for (auto& p : captures) p.intensity(0, 0) += noise(rng);
      const PhaseMap map = compute_wrapped_phase(captures);
      mae += std::abs(wrap_to_pi(map.wrapped(0, 0) - phi));
    }
    mae /= trials;
    CHECK(mae < previous_mae);
    previous_mae = mae;
  }
}

TEST_CASE("Gray pattern counts") {
  CHECK(period_count(912, 18.0) == 51);
  CHECK(gray_pattern_count(51) == 6);
  CHECK(period_count(8, 2.0) == 4);
  CHECK(gray_pattern_count(4) == 2);
  CHECK(gray_pattern_count(1) == 0);
  CHECK(generate_gray_code_patterns(912, 1, 18.0).size() == 6);
  CHECK(generate_gray_code_patterns(16, 1, 16.0).empty());
  CHECK(generate_gray_code_patterns(16, 1, 20.0).empty());
}

TEST_CASE("Gray sequence for four periods is 00 01 11 10") {
  const auto patterns = generate_gray_code_patterns(8, 1, 2.0);
  REQUIRE(patterns.size() == 2);
  const int msb[] = {0, 0, 0, 0, 1, 1, 1, 1};
  const int lsb[] = {0, 0, 1, 1, 1, 1, 0, 0};
  for (int x = 0; x < 8; ++x) {
    CHECK(patterns[0](x, 0) == msb[x]);
    CHECK(patterns[1](x, 0) == lsb[x]);
  }
}

TEST_CASE("consecutive Gray codes differ in exactly one bit") {
  for (std::uint32_t v = 0; v + 1 < 512; ++v) {
    const std::uint32_t diff = binary_to_gray(v) ^ binary_to_gray(v + 1);
    CHECK((diff & (diff - 1)) == 0);
    CHECK(diff != 0);
    CHECK(gray_to_binary(binary_to_gray(v)) == v);
  }
}

TEST_CASE("decode recovers the period index from rendered bits") {
  const int width = 64;
  const double lambda = 4.0;  // 16 periods, 4 bits
  const auto patterns = generate_gray_code_patterns(width, 1, lambda);
  REQUIRE(patterns.size() == 4);
  std::vector<Image<double>> captures;
  for (const auto& p : patterns) {
    Image<double> c(width, 1);
    for (int x = 0; x < width; ++x) c(x, 0) = p(x, 0) ? 0.8 : 0.05;
    captures.push_back(std::move(c));
  }
  const Image<double> black(width, 1, 0.05), white(width, 1, 0.8);
  const FringeOrderMap map = decode_fringe_order(captures, black, white, {16, 0.01});
  for (int x = 0; x < width; ++x) {
    CHECK(map.valid(x, 0) == 1);
    CHECK(map.order(x, 0) == x / 4);
  }
}

TEST_CASE("decode canonical two-bit cases") {
  const Image<double> black(1, 1, 0.0), white(1, 1, 1.0);
  auto bits = [&](double b0, double b1) {
    std::vector<Image<double>> captures{Image<double>(1, 1, b0), Image<double>(1, 1, b1)};
    return decode_fringe_order(captures, black, white, {4, 0.01});
  };
  CHECK(bits(0, 0).order(0, 0) == 0);
  CHECK(bits(0, 1).order(0, 0) == 1);
  CHECK(bits(1, 1).order(0, 0) == 2);
  CHECK(bits(1, 0).order(0, 0) == 3);
}

TEST_CASE("decode masks low contrast and out-of-range codes") {
  const Image<double> black(1, 1, 0.4), white(1, 1, 0.42);  // almost no light
  std::vector<Image<double>> captures{Image<double>(1, 1, 0.41)};
  CHECK(decode_fringe_order(captures, black, white, {2, 0.01}).valid(0, 0) == 0);

  const Image<double> black2(1, 1, 0.0), white2(1, 1, 1.0);
  std::vector<Image<double>> captures2{Image<double>(1, 1, 1.0), Image<double>(1, 1, 0.0)};
  // Code 10 decodes to period 3; with only 3 encoded periods that is invalid.
  CHECK(decode_fringe_order(captures2, black2, white2, {3, 0.01}).valid(0, 0) == 0);
  CHECK(decode_fringe_order(captures2, black2, white2, {4, 0.01}).valid(0, 0) == 1);
}

TEST_CASE("unwrap combines wrapped phase and fringe order") {
  PhaseMap wrapped{Image<double>(1, 1, -kPi / 2), Image<double>(1, 1, 0.4), MaskImage(1, 1, 1)};
  FringeOrderMap orders{Image<std::int32_t>(1, 1, 2), MaskImage(1, 1, 1), 4};
  const AbsolutePhaseMap abs = unwrap_phase(wrapped, orders, 18.0);
  CHECK(abs.valid(0, 0) == 1);
  CHECK(abs.phase(0, 0) == doctest::Approx(2 * kTwoPi - kPi / 2).epsilon(1e-15));

  PhaseMap zero{Image<double>(1, 1, 0.0), Image<double>(1, 1, 0.4), MaskImage(1, 1, 1)};
  FringeOrderMap zeroth{Image<std::int32_t>(1, 1, 0), MaskImage(1, 1, 1), 4};
  CHECK(unwrap_phase(zero, zeroth, 18.0).phase(0, 0) == 0.0);

  // Masked inputs stay masked; negative results are rejected.
  FringeOrderMap invalid{Image<std::int32_t>(1, 1, 0), MaskImage(1, 1, 0), 4};
  CHECK(unwrap_phase(wrapped, invalid, 18.0).valid(0, 0) == 0);
  CHECK(unwrap_phase(wrapped, zeroth, 18.0).valid(0, 0) == 0);
}

TEST_CASE("projector coordinate from absolute phase") {
  CHECK(phase_to_projector_coord(0.0, 18.0) == 0.0);
  CHECK(phase_to_projector_coord(4 * kPi, 18.0) == doctest::Approx(36.0).epsilon(1e-15));
  // Identity across the panel: u = phi * lambda / (2 pi).
  for (double u = 0; u < 456; u += 7.3)
    CHECK(phase_to_projector_coord(kTwoPi * u / 18.0, 18.0) == doctest::Approx(u).epsilon(1e-12));
}

TEST_CASE("full chain recovers continuous projector coordinates exactly") {
  // Synthetic camera-side observation of a sloped surface: each image column
  // sees a non-integer projector coordinate. Covers second half-periods where
  // the raw floor-convention order must be shifted.
  const int width = 300;
  const double lambda = 16.0;
  const int panel = 456;
  const int periods = period_count(panel, lambda);
  const int bits = gray_pattern_count(periods);

  auto coord_of = [&](int x) { return 0.17 + x * 1.483; };

  std::vector<FringePattern> phase_captures;
  for (int n = 0; n < 4; ++n) {
    FringePattern p{Image<double>(width, 1), n, kTwoPi * n / 4};
    for (int x = 0; x < width; ++x)
      p.intensity(x, 0) = fringe_value(coord_of(x), lambda, n, 4, 0.5, 0.4);
    phase_captures.push_back(std::move(p));
  }
  std::vector<Image<double>> gray_captures;
  for (int b = 0; b < bits; ++b) {
    Image<double> c(width, 1);
    for (int x = 0; x < width; ++x)
      c(x, 0) = gray_bit(coord_of(x), lambda, b, bits) ? 1.0 : 0.0;
    gray_captures.push_back(std::move(c));
  }
  const Image<double> black(width, 1, 0.0), white(width, 1, 1.0);

  const PhaseMap wrapped = compute_wrapped_phase(phase_captures);
  const FringeOrderMap raw = decode_fringe_order(gray_captures, black, white, {periods, 0.01});
  const FringeOrderMap aligned = align_fringe_orders(raw, wrapped);
  const AbsolutePhaseMap absolute = unwrap_phase(wrapped, aligned, lambda);

  for (int x = 0; x < width; ++x) {
    REQUIRE(absolute.valid(x, 0) == 1);
    const double u = phase_to_projector_coord(absolute.phase(x, 0), lambda);
    CHECK(std::abs(u - coord_of(x)) < 1e-9);
    CHECK(raw.order(x, 0) == static_cast<int>(coord_of(x) / lambda));
  }
}

TEST_CASE("alignment survives noisy transition bits") {
  // Place every pixel near a Gray transition (wrapped phase ~ 0) and flip a
  // few decoded orders by one, as bit noise would; alignment must restore
  // them from in-row neighbors that sit mid-period.
  const int width = 40;
  const double lambda = 10.0;
  PhaseMap wrapped{Image<double>(width, 1), Image<double>(width, 1, 0.4), MaskImage(width, 1, 1)};
  FringeOrderMap raw{Image<std::int32_t>(width, 1), MaskImage(width, 1, 1), 8};

  auto coord_of = [&](int x) { return 20.0 + x * 0.05; };  // crosses x=20..22, phi near 0
  for (int x = 0; x < width; ++x) {
    const double u = coord_of(x);
    wrapped.wrapped(x, 0) = wrap_to_pi(kTwoPi * u / lambda);
    raw.order(x, 0) = static_cast<int>(u / lambda);
  }
  // Corrupt three pixels right at the boundary (wrapped phase < 0.2): noise
  // flipped the decode to the neighboring period.
  for (int x : {1, 2, 5}) raw.order(x, 0) += (x % 2 == 0) ? 1 : -1;

  const FringeOrderMap aligned = align_fringe_orders(raw, wrapped);
  const AbsolutePhaseMap absolute = unwrap_phase(wrapped, aligned, lambda);
  for (int x = 0; x < width; ++x) {
    REQUIRE(absolute.valid(x, 0) == 1);
    CHECK(std::abs(phase_to_projector_coord(absolute.phase(x, 0), lambda) - coord_of(x)) < 1e-9);
  }
}

TEST_CASE("alignment leaves genuine depth discontinuities alone") {
  const int width = 20;
  const double lambda = 10.0;
  PhaseMap wrapped{Image<double>(width, 1), Image<double>(width, 1, 0.4), MaskImage(width, 1, 1)};
  FringeOrderMap raw{Image<std::int32_t>(width, 1), MaskImage(width, 1, 1), 12};
  // Left half sits mid-period; right half jumps 3.2 periods and lands in a
  // guard band. The jump is nowhere near one period, so no snapping.
  auto coord_of = [&](int x) { return x < 10 ? 22.5 + 0.1 * x : 55.1 + 0.1 * (x - 10); };
  for (int x = 0; x < width; ++x) {
    const double u = coord_of(x);
    wrapped.wrapped(x, 0) = wrap_to_pi(kTwoPi * u / lambda);
    raw.order(x, 0) = static_cast<int>(u / lambda);
  }
  const FringeOrderMap aligned = align_fringe_orders(raw, wrapped);
  const AbsolutePhaseMap absolute = unwrap_phase(wrapped, aligned, lambda);
  for (int x = 0; x < width; ++x)
    CHECK(std::abs(phase_to_projector_coord(absolute.phase(x, 0), lambda) - coord_of(x)) < 1e-9);
}

TEST_CASE("projector coordinate map flags out-of-panel pixels") {
  AbsolutePhaseMap absolute{Image<double>(3, 1), MaskImage(3, 1, 1), 18.0};
  absolute.phase(0, 0) = 0.0;
  absolute.phase(1, 0) = kTwoPi * 10;                    // u = 180
  absolute.phase(2, 0) = kTwoPi * 500;                   // u = 9000, off panel
  MaskImage valid;
  const Image<double> coords = projector_coord_map(absolute, 456, &valid);
  CHECK(coords(1, 0) == doctest::Approx(180.0).epsilon(1e-12));
  CHECK(valid(0, 0) == 1);
  CHECK(valid(1, 0) == 1);
  CHECK(valid(2, 0) == 0);
}

TEST_CASE("retrieval input validation") {
  std::vector<FringePattern> two = single_pixel_stack(0.3, 4, 0.5, 0.4);
  two.resize(2);
  CHECK_THROWS_AS(compute_wrapped_phase(two), ConfigError);

  auto mismatched = single_pixel_stack(0.3, 4, 0.5, 0.4);
  mismatched[2].intensity = Image<double>(2, 2);
  CHECK_THROWS_AS(compute_wrapped_phase(mismatched), DataError);

  auto shifted = single_pixel_stack(0.3, 4, 0.5, 0.4);
  shifted[1].phase_shift += 0.01;
  CHECK_THROWS_AS(compute_wrapped_phase(shifted), DataError);
}
