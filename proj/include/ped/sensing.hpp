#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ped/image.hpp"
#include "ped/rng.hpp"
#include "ped/wavelet.hpp"

namespace ped {

enum class MeasureDomain { Pixel, Wavelet };

inline std::string to_string(MeasureDomain d) {
  return d == MeasureDomain::Pixel ? "pixel" : "wavelet";
}

// The "key": a seeded M x N Bernoulli(1/2) matrix over {0,1}, bit-packed
// row-major. Regeneration from (seed, rows, cols) is bitwise identical.
class SensingMatrix {
 public:
  SensingMatrix(int rows, int cols, std::uint64_t seed,
                MeasureDomain domain = MeasureDomain::Wavelet)
      : rows_(rows), cols_(cols), seed_(seed), domain_(domain) {
    if (rows <= 0 || cols <= 0)
      throw std::invalid_argument("SensingMatrix: dims must be positive");
    if (rows >= cols)
      throw std::invalid_argument(
          "SensingMatrix: need M < N (undersampling is the point)");
    words_per_row_ = (cols + 63) / 64;
    bits_.resize(static_cast<std::size_t>(rows) * words_per_row_);
    std::mt19937_64 rng(seed);
    for (int r = 0; r < rows; ++r) {
      for (int w = 0; w < words_per_row_; ++w)
        bits_[static_cast<std::size_t>(r) * words_per_row_ + w] = rng();
      // mask tail bits so row popcounts are well-defined
      const int tail = cols % 64;
      if (tail != 0)
        bits_[static_cast<std::size_t>(r) * words_per_row_ + words_per_row_ -
              1] &= (~0ULL >> (64 - tail));
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::uint64_t seed() const { return seed_; }
  MeasureDomain domain() const { return domain_; }

  bool entry(int r, int c) const {
    const std::uint64_t w =
        bits_[static_cast<std::size_t>(r) * words_per_row_ + c / 64];
    return (w >> (c % 64)) & 1ULL;
  }

  double ones_fraction() const {
    std::int64_t n = 0;
    for (std::uint64_t w : bits_) n += __builtin_popcountll(w);
    return static_cast<double>(n) /
           (static_cast<double>(rows_) * static_cast<double>(cols_));
  }

  // y = phi * x, double accumulators.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != cols_)
      throw std::invalid_argument("SensingMatrix::apply: length mismatch");
    Eigen::VectorXd y(rows_);
    for (int r = 0; r < rows_; ++r) {
      double acc = 0.0;
      const std::uint64_t* row =
          &bits_[static_cast<std::size_t>(r) * words_per_row_];
      for (int w = 0; w < words_per_row_; ++w) {
        std::uint64_t bitsw = row[w];
        while (bitsw) {
          const int b = __builtin_ctzll(bitsw);
          acc += x[w * 64 + b];
          bitsw &= bitsw - 1;
        }
      }
      y[r] = acc;
    }
    return y;
  }

  // x = phi^T * y.
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& y) const {
    if (y.size() != rows_)
      throw std::invalid_argument(
          "SensingMatrix::apply_adjoint: length mismatch");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cols_);
    for (int r = 0; r < rows_; ++r) {
      const double v = y[r];
      if (v == 0.0) continue;
      const std::uint64_t* row =
          &bits_[static_cast<std::size_t>(r) * words_per_row_];
      for (int w = 0; w < words_per_row_; ++w) {
        std::uint64_t bitsw = row[w];
        while (bitsw) {
          const int b = __builtin_ctzll(bitsw);
          x[w * 64 + b] += v;
          bitsw &= bitsw - 1;
        }
      }
    }
    return x;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) m(r, c) = entry(r, c) ? 1.0 : 0.0;
    return m;
  }

  bool operator==(const SensingMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && bits_ == o.bits_;
  }

 private:
  int rows_, cols_;
  std::uint64_t seed_;
  MeasureDomain domain_;
  int words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct Measurement {
  Eigen::VectorXd values;
  std::uint64_t matrix_seed = 0;
  MeasureDomain domain = MeasureDomain::Wavelet;
  std::string image_id;
};

inline SensingMatrix gen_sensing_matrix(int m, int n, std::uint64_t seed,
                                        MeasureDomain domain) {
  return SensingMatrix(m, n, seed, domain);
}

// Hardware path: y = phi * vec(x) on raw pixels.
inline Measurement measure_pixels(const SensingMatrix& mat,
                                  const GrayImage& img,
                                  const std::string& image_id = {}) {
  if (mat.domain() != MeasureDomain::Pixel)
    throw std::invalid_argument("measure_pixels: matrix is not pixel-domain");
  if (mat.cols() != img.width * img.height)
    throw std::invalid_argument("measure_pixels: dimension mismatch");
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
      img.pixels.data(), static_cast<Eigen::Index>(img.pixels.size()));
  return {mat.apply(x), mat.seed(), MeasureDomain::Pixel, image_id};
}

// Experiment path: y = phi * dwt2(pad(x)).
inline Measurement measure_coeffs(const SensingMatrix& mat,
                                  const GrayImage& img,
                                  const std::string& image_id = {},
                                  int levels = kDefaultLevels) {
  if (mat.domain() != MeasureDomain::Wavelet)
    throw std::invalid_argument(
        "measure_coeffs: matrix is not wavelet-domain");
  const WaveletCoeffs wc = image_to_coeffs(img, levels);
  if (mat.cols() != static_cast<int>(wc.coeffs.size()))
    throw std::invalid_argument("measure_coeffs: dimension mismatch");
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
      wc.coeffs.data(), static_cast<Eigen::Index>(wc.coeffs.size()));
  return {mat.apply(w), mat.seed(), MeasureDomain::Wavelet, image_id};
}

}  // namespace ped
