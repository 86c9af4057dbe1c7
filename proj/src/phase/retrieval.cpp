#include "fringeslam/phase/retrieval.hpp"

#include <cmath>
#include <numbers>

#include "fringeslam/core/errors.hpp"
#include "fringeslam/core/parallel.hpp"

namespace fringeslam::phase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_capture_stack(const std::vector<FringePattern>& captures) {
  if (captures.size() < 3)
    throw ConfigError("wrapped phase: need at least 3 phase-shifted captures");
  const int n = static_cast<int>(captures.size());
  for (int i = 0; i < n; ++i) {
    if (!captures[i].intensity.same_size(captures[0].intensity))
      throw DataError("wrapped phase: capture dimensions differ");
    if (captures[i].shift_index != i ||
        std::abs(captures[i].phase_shift - kTwoPi * i / n) > 1e-9)
      throw DataError("wrapped phase: captures must carry canonical equal shifts");
  }
}

struct ShiftTables {
  std::vector<double> sin_shift, cos_shift;
  explicit ShiftTables(int n) : sin_shift(n), cos_shift(n) {
    for (int i = 0; i < n; ++i) {
      sin_shift[i] = std::sin(kTwoPi * i / n);
      cos_shift[i] = std::cos(kTwoPi * i / n);
    }
  }
};

// Single-row kernel shared by the serial reference and the parallel driver,
// so the two variants are bit-identical by construction.
void wrapped_phase_row(const std::vector<FringePattern>& captures, const ShiftTables& tables,
                       const RetrievalParams& params, int y, PhaseMap& out) {
  const int width = captures[0].intensity.width();
  const int n = static_cast<int>(captures.size());
  for (int x = 0; x < width; ++x) {
    double s = 0, c = 0;
    for (int i = 0; i < n; ++i) {
      const double intensity = captures[i].intensity(x, y);
      s += intensity * tables.sin_shift[i];
      c += intensity * tables.cos_shift[i];
    }
    const double modulation = 2.0 / n * std::sqrt(s * s + c * c);
    out.modulation(x, y) = modulation;
    if (modulation >= params.modulation_threshold) {
      out.wrapped(x, y) = std::atan2(s, c);
      out.valid(x, y) = 1;
    } else {
      out.wrapped(x, y) = 0;
      out.valid(x, y) = 0;
    }
  }
}

PhaseMap make_phase_map(int width, int height) {
  return {Image<double>(width, height), Image<double>(width, height), MaskImage(width, height)};
}

}  // namespace

PhaseMap compute_wrapped_phase(const std::vector<FringePattern>& captures,
                               const RetrievalParams& params) {
  check_capture_stack(captures);
  const ShiftTables tables(static_cast<int>(captures.size()));
  PhaseMap out = make_phase_map(captures[0].intensity.width(), captures[0].intensity.height());
  parallel_for(out.wrapped.height(), [&](std::int64_t y) {
    wrapped_phase_row(captures, tables, params, static_cast<int>(y), out);
  });
  return out;
}

PhaseMap compute_wrapped_phase_serial(const std::vector<FringePattern>& captures,
                                      const RetrievalParams& params) {
  check_capture_stack(captures);
  const ShiftTables tables(static_cast<int>(captures.size()));
  PhaseMap out = make_phase_map(captures[0].intensity.width(), captures[0].intensity.height());
  for (int y = 0; y < out.wrapped.height(); ++y) wrapped_phase_row(captures, tables, params, y, out);
  return out;
}

FringeOrderMap decode_fringe_order(const std::vector<Image<double>>& gray_captures,
                                   const Image<double>& black, const Image<double>& white,
                                   const DecodeParams& params) {
  if (!black.same_size(white)) throw DataError("decode: black/white dimensions differ");
  for (const auto& capture : gray_captures)
    if (!capture.same_size(black)) throw DataError("decode: capture dimensions differ");
  if (params.periods < 1) throw ConfigError("decode: period count must be positive");
  const int needed = gray_pattern_count(params.periods);
  if (static_cast<int>(gray_captures.size()) < needed)
    throw ConfigError("decode: too few Gray patterns for the period count");

  const int bits = static_cast<int>(gray_captures.size());
  FringeOrderMap out{Image<std::int32_t>(black.width(), black.height()),
                     MaskImage(black.width(), black.height()), params.periods};
  parallel_for(black.height(), [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < black.width(); ++x) {
      const double lo = black(x, y), hi = white(x, y);
      const double mid = 0.5 * (lo + hi);
      bool ok = hi - lo >= 2.0 * params.contrast_floor;
      std::uint32_t code = 0;
      for (int b = 0; b < bits && ok; ++b) {
        const double v = gray_captures[b](x, y);
        if (std::abs(v - mid) < params.contrast_floor) ok = false;
        code = code << 1 | (v > mid ? 1u : 0u);
      }
      const std::uint32_t period = gray_to_binary(code);
      if (ok && period < static_cast<std::uint32_t>(params.periods)) {
        out.order(x, y) = static_cast<std::int32_t>(period);
        out.valid(x, y) = 1;
      } else {
        out.order(x, y) = 0;
        out.valid(x, y) = 0;
      }
    }
  });
  return out;
}

FringeOrderMap align_fringe_orders(const FringeOrderMap& decoded, const PhaseMap& wrapped,
                                   FringeAxis axis, const AlignParams& params) {
  if (!decoded.order.same_size(wrapped.wrapped))
    throw DataError("align: order/phase dimensions differ");
  const int width = decoded.order.width();
  const int height = decoded.order.height();
  constexpr double kPi = std::numbers::pi;

  FringeOrderMap aligned{Image<std::int32_t>(width, height), MaskImage(width, height),
                         decoded.periods};

  // Pass 1: shift the floor-convention index wherever the wrapped phase is
  // negative, and record which pixels sit inside the fragile bands.
  MaskImage guarded(width, height);
  parallel_for(height, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < width; ++x) {
      const bool ok = decoded.valid(x, y) && wrapped.valid(x, y);
      aligned.valid(x, y) = ok ? 1 : 0;
      const double phi = wrapped.wrapped(x, y);
      aligned.order(x, y) = ok ? decoded.order(x, y) + (phi < 0 ? 1 : 0) : 0;
      guarded(x, y) =
          ok && (std::abs(phi) < params.boundary_guard || std::abs(phi) > kPi - params.boundary_guard)
              ? 1
              : 0;
    }
  });

  // Pass 2: a guarded pixel whose provisional unwrap sits one full period off
  // the nearest confident neighbor in the same fringe row had its transition
  // bit flipped by noise; snap it back. Reads pass-1 state only, so the scan
  // is order-independent and parallel-safe.
  const std::int64_t lines = axis == FringeAxis::kColumns ? height : width;
  parallel_for(lines, [&](std::int64_t line) {
    const int extent = axis == FringeAxis::kColumns ? width : height;
    auto order_at = [&](int i) -> std::int32_t {
      return axis == FringeAxis::kColumns ? aligned.order(i, static_cast<int>(line))
                                          : aligned.order(static_cast<int>(line), i);
    };
    auto phi_at = [&](int i) {
      return axis == FringeAxis::kColumns ? wrapped.wrapped(i, static_cast<int>(line))
                                          : wrapped.wrapped(static_cast<int>(line), i);
    };
    auto flag_at = [&](MaskImage& m, int i) -> std::uint8_t& {
      return axis == FringeAxis::kColumns ? m(i, static_cast<int>(line))
                                          : m(static_cast<int>(line), i);
    };
    for (int i = 0; i < extent; ++i) {
      if (!flag_at(guarded, i)) continue;
      // Nearest valid, unguarded pixel along the line.
      int ref = -1;
      for (int d = 1; d <= params.reference_radius && ref < 0; ++d) {
        if (i - d >= 0 && flag_at(aligned.valid, i - d) && !flag_at(guarded, i - d)) ref = i - d;
        else if (i + d < extent && flag_at(aligned.valid, i + d) && !flag_at(guarded, i + d))
          ref = i + d;
      }
      if (ref < 0) continue;
      const double here = phi_at(i) + kTwoPi * order_at(i);
      const double there = phi_at(ref) + kTwoPi * order_at(ref);
      const double offset = here - there;
      for (int sign : {-1, 1}) {
        if (std::abs(offset - sign * kTwoPi) < params.snap_window) {
          auto& slot = axis == FringeAxis::kColumns
                           ? aligned.order(i, static_cast<int>(line))
                           : aligned.order(static_cast<int>(line), i);
          slot -= sign;
          break;
        }
      }
    }
  });

  // Effective orders outside [0, periods] cannot come from a real coordinate.
  parallel_for(height, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < width; ++x)
      if (aligned.valid(x, y) &&
          (aligned.order(x, y) < 0 || aligned.order(x, y) > decoded.periods)) {
        aligned.valid(x, y) = 0;
        aligned.order(x, y) = 0;
      }
  });
  return aligned;
}

AbsolutePhaseMap unwrap_phase(const PhaseMap& wrapped, const FringeOrderMap& orders,
                              double fringe_width) {
  if (!wrapped.wrapped.same_size(orders.order))
    throw DataError("unwrap: phase/order dimensions differ");
  if (!(fringe_width > 0)) throw ConfigError("unwrap: fringe width must be positive");
  AbsolutePhaseMap out{Image<double>(wrapped.wrapped.width(), wrapped.wrapped.height()),
                       MaskImage(wrapped.wrapped.width(), wrapped.wrapped.height()),
                       fringe_width};
  parallel_for(out.phase.height(), [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < out.phase.width(); ++x) {
      if (wrapped.valid(x, y) && orders.valid(x, y)) {
        const double phi = wrapped.wrapped(x, y) + kTwoPi * orders.order(x, y);
        out.phase(x, y) = phi >= 0 ? phi : 0;
        out.valid(x, y) = phi >= 0 ? 1 : 0;
      } else {
        out.phase(x, y) = 0;
        out.valid(x, y) = 0;
      }
    }
  });
  return out;
}

double phase_to_projector_coord(double absolute_phase, double fringe_width) {
  return absolute_phase * fringe_width / kTwoPi;
}

Image<double> projector_coord_map(const AbsolutePhaseMap& absolute, int projector_extent,
                                  MaskImage* valid_out) {
  if (projector_extent <= 0) throw ConfigError("projector coord: extent must be positive");
  Image<double> coords(absolute.phase.width(), absolute.phase.height());
  if (valid_out) *valid_out = MaskImage(absolute.phase.width(), absolute.phase.height());
  parallel_for(absolute.phase.height(), [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < absolute.phase.width(); ++x) {
      const double u = phase_to_projector_coord(absolute.phase(x, y), absolute.fringe_width);
      coords(x, y) = u;
      if (valid_out)
        (*valid_out)(x, y) = absolute.valid(x, y) && u >= 0 && u < projector_extent ? 1 : 0;
    }
  });
  return coords;
}

}  // namespace fringeslam::phase
