#pragma once

#include <filesystem>

#include "fringeslam/core/image.hpp"

namespace fringeslam {

// Grayscale portable graymap (P5). Values are clamped to [0, 1] and scaled
// to maxval; 16-bit samples use the standard big-endian byte order.
void write_pgm(const std::filesystem::path& path, const Image<double>& image,
               int maxval = 65535);

// Reads an 8- or 16-bit P5 graymap, normalized back to [0, 1].
Image<double> read_pgm(const std::filesystem::path& path);

// 8-bit color portable pixmap (P6).
void write_ppm(const std::filesystem::path& path, const Image<Rgb>& image);
Image<Rgb> read_ppm(const std::filesystem::path& path);

// Grayscale PFM, float32 little-endian, rows bottom-to-top per convention.
void write_pfm(const std::filesystem::path& path, const Image<double>& image);
Image<double> read_pfm(const std::filesystem::path& path);

}  // namespace fringeslam
