#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ped {

// Canonical raster size of the corpus: 35 rows x 100 columns.
inline constexpr int kImageWidth = 100;
inline constexpr int kImageHeight = 35;

// 2-D grayscale raster, row-major, intensities in [0,1].
// Convention: ink is dark (near 0), paper background is light (near 1).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // size == width * height

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int row, int col) {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
  double at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }

  bool same_dims(const GrayImage& o) const {
    return width == o.width && height == o.height;
  }

  void validate() const {
    if (pixels.size() != static_cast<std::size_t>(width) * height)
      throw std::invalid_argument("GrayImage: pixel count does not match dims");
    for (double p : pixels)
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("GrayImage: intensity outside [0,1]");
  }
};

// Number of pixels on which two images differ (exact comparison).
inline int pixel_diff_count(const GrayImage& a, const GrayImage& b) {
  if (!a.same_dims(b))
    throw std::invalid_argument("pixel_diff_count: dimension mismatch");
  int n = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    if (a.pixels[i] != b.pixels[i]) ++n;
  return n;
}

// Peak signal-to-noise ratio in dB with peak 1.0.
// Identical images map to +infinity.
inline double psnr(const GrayImage& a, const GrayImage& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("psnr: dimension mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

// Binary PGM (P5), maxval 255; intensity i stored as round(i*255).
inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> bytes(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround(img.pixels[i] * 255.0));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write_pgm: write failed " + path.string());
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path.string());

  auto next_token = [&in, &path]() -> std::string {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {  // comment to end of line
        while ((c = in.get()) != EOF && c != '\n') {}
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    if (tok.empty())
      throw std::runtime_error("read_pgm: truncated header " + path.string());
    return tok;
  };

  if (next_token() != "P5")
    throw std::runtime_error("read_pgm: not a binary PGM: " + path.string());
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error("read_pgm: unsupported header in " + path.string());

  GrayImage img(w, h);
  std::vector<unsigned char> bytes(img.pixels.size());
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error("read_pgm: truncated pixel data " + path.string());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    img.pixels[i] = static_cast<double>(bytes[i]) / 255.0;
  return img;
}

}  // namespace ped
