#include "fringeslam/core/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "fringeslam/core/errors.hpp"

namespace fringeslam {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  return in;
}

// Skips whitespace and '#' comment lines between netpbm header tokens.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(in.get()));
      return tok;
    }
  }
  throw DataError("truncated netpbm header");
}

int parse_dim(const std::string& tok, const char* what) {
  try {
    const int v = std::stoi(tok);
    if (v <= 0 || v > 1 << 20) throw DataError(std::string("bad netpbm ") + what);
    return v;
  } catch (const std::logic_error&) {
    throw DataError(std::string("bad netpbm ") + what);
  }
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Image<double>& image, int maxval) {
  if (maxval != 255 && maxval != 65535) throw ConfigError("pgm maxval must be 255 or 65535");
  auto out = open_out(path);
  out << "P5\n" << image.width() << " " << image.height() << "\n" << maxval << "\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width()) * (maxval > 255 ? 2 : 1));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double v = std::clamp(image(x, y), 0.0, 1.0);
      const unsigned q = static_cast<unsigned>(std::lround(v * maxval));
      if (maxval > 255) {
        row[2 * x] = static_cast<unsigned char>(q >> 8);
        row[2 * x + 1] = static_cast<unsigned char>(q & 0xff);
      } else {
        row[x] = static_cast<unsigned char>(q);
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("short write: " + path.string());
}

Image<double> read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (next_token(in) != "P5") throw DataError("not a P5 graymap: " + path.string());
  const int w = parse_dim(next_token(in), "width");
  const int h = parse_dim(next_token(in), "height");
  const int maxval = parse_dim(next_token(in), "maxval");
  if (maxval != 255 && maxval != 65535) throw DataError("unsupported pgm maxval");
  in.get();  // single whitespace byte after maxval
  Image<double> image(w, h);
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * bytes);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw DataError("truncated pgm payload: " + path.string());
    for (int x = 0; x < w; ++x) {
      const unsigned q = bytes == 2 ? (unsigned(row[2 * x]) << 8 | row[2 * x + 1]) : row[x];
      image(x, y) = static_cast<double>(q) / maxval;
    }
  }
  return image;
}

void write_ppm(const std::filesystem::path& path, const Image<Rgb>& image) {
  auto out = open_out(path);
  out << "P6\n" << image.width() << " " << image.height() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width()) * 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb& c = image(x, y);
      row[3 * x] = static_cast<unsigned char>(std::lround(std::clamp(c.r, 0.0, 1.0) * 255));
      row[3 * x + 1] = static_cast<unsigned char>(std::lround(std::clamp(c.g, 0.0, 1.0) * 255));
      row[3 * x + 2] = static_cast<unsigned char>(std::lround(std::clamp(c.b, 0.0, 1.0) * 255));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("short write: " + path.string());
}

Image<Rgb> read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (next_token(in) != "P6") throw DataError("not a P6 pixmap: " + path.string());
  const int w = parse_dim(next_token(in), "width");
  const int h = parse_dim(next_token(in), "height");
  if (parse_dim(next_token(in), "maxval") != 255) throw DataError("unsupported ppm maxval");
  in.get();
  Image<Rgb> image(w, h);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw DataError("truncated ppm payload: " + path.string());
    for (int x = 0; x < w; ++x)
      image(x, y) = {row[3 * x] / 255.0, row[3 * x + 1] / 255.0, row[3 * x + 2] / 255.0};
  }
  return image;
}

void write_pfm(const std::filesystem::path& path, const Image<double>& image) {
  auto out = open_out(path);
  out << "Pf\n" << image.width() << " " << image.height() << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(image.width()));
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) row[x] = static_cast<float>(image(x, y));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw DataError("short write: " + path.string());
}

Image<double> read_pfm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (next_token(in) != "Pf") throw DataError("not a grayscale pfm: " + path.string());
  const int w = parse_dim(next_token(in), "width");
  const int h = parse_dim(next_token(in), "height");
  const double scale = std::stod(next_token(in));
  if (scale >= 0) throw DataError("big-endian pfm not supported");
  in.get();
  Image<double> image(w, h);
  std::vector<float> row(static_cast<std::size_t>(w));
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw DataError("truncated pfm payload: " + path.string());
    for (int x = 0; x < w; ++x) image(x, y) = row[x];
  }
  return image;
}

}  // namespace fringeslam
