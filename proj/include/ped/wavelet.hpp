#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ped/image.hpp"

namespace ped {

// Orthonormal Daubechies-10 (20-tap) filter pair. Taps were produced by
// spectral factorization at 60-digit precision and are checked against
// the orthogonality identities at first use rather than trusted.
struct Db10Filter {
  static constexpr int kTaps = 20;

  // Scaling (lowpass) filter h, minimum phase.
  static constexpr std::array<double, kTaps> lowpass = {
      2.6670057900555554e-02,  1.8817680007769148e-01,
      5.2720118893172558e-01,  6.8845903945360357e-01,
      2.8117234366057746e-01,  -2.4984642432731538e-01,
      -1.9594627437737704e-01, 1.2736934033579326e-01,
      9.3057364603572351e-02,  -7.1394147166397087e-02,
      -2.9457536821875813e-02, 3.3212674059341002e-02,
      3.6065535669561697e-03,  -1.0733175483330575e-02,
      1.3953517470529012e-03,  1.9924052951850561e-03,
      -6.8585669495971163e-04, -1.1646685512928545e-04,
      9.3588670320069591e-05,  -1.3264202894521245e-05};

  // Quadrature mirror highpass g[n] = (-1)^n h[L-1-n].
  static std::array<double, kTaps> highpass_taps() {
    std::array<double, kTaps> g{};
    for (int n = 0; n < kTaps; ++n)
      g[n] = (n % 2 == 0 ? 1.0 : -1.0) * lowpass[kTaps - 1 - n];
    return g;
  }

  // Verifies sum = sqrt(2), unit energy, and shifted orthogonality.
  static void verify() {
    double sum = 0.0, energy = 0.0;
    for (double h : lowpass) {
      sum += h;
      energy += h * h;
    }
    if (std::abs(sum - std::sqrt(2.0)) > 1e-12)
      throw std::logic_error("db10: tap sum != sqrt(2)");
    if (std::abs(energy - 1.0) > 1e-12)
      throw std::logic_error("db10: tap energy != 1");
    for (int k = 1; k < kTaps / 2; ++k) {
      double dot = 0.0;
      for (int n = 0; n + 2 * k < kTaps; ++n)
        dot += lowpass[n] * lowpass[n + 2 * k];
      if (std::abs(dot) > 1e-10)
        throw std::logic_error("db10: shifted orthogonality violated");
    }
  }
};

// Padded dims: smallest dyadic superset of 35x100.
inline constexpr int kPaddedWidth = 128;
inline constexpr int kPaddedHeight = 64;
inline constexpr int kPaddedSize = kPaddedWidth * kPaddedHeight;
// Deep enough that the approximation band of a 64x128 raster shrinks to
// 1x2, so near-constant images are genuinely sparse in this basis.
inline constexpr int kDefaultLevels = 6;

struct PaddedRaster {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // row-major

  double& at(int r, int c) {
    return data[static_cast<std::size_t>(r) * width + c];
  }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * width + c];
  }
};

// Coefficients of the separable periodized 2-D DWT, stored in the usual
// nested quad layout inside a padded_width x padded_height array.
struct WaveletCoeffs {
  int padded_width = 0;
  int padded_height = 0;
  int levels = 0;
  std::vector<double> coeffs;

  void validate() const {
    if (coeffs.size() !=
        static_cast<std::size_t>(padded_width) * padded_height)
      throw std::invalid_argument("WaveletCoeffs: size/dims mismatch");
    if (levels < 1 || (padded_width >> levels) < 1 ||
        (padded_height >> levels) < 1 || padded_width % (1 << levels) != 0 ||
        padded_height % (1 << levels) != 0)
      throw std::invalid_argument("WaveletCoeffs: bad band layout");
  }
};

// Mirror extension of a 35x100 image into 64x128. The original sits at
// the top-left; crop_image inverts it exactly.
inline PaddedRaster pad_image(const GrayImage& img) {
  if (img.width > kPaddedWidth || img.height > kPaddedHeight)
    throw std::invalid_argument("pad_image: image exceeds padded dims");
  PaddedRaster p{kPaddedWidth, kPaddedHeight,
                 std::vector<double>(kPaddedSize, 0.0)};
  auto reflect = [](int i, int n) {
    // symmetric (half-point) extension: ... 2 1 0 | 0 1 2 ...
    if (i < n) return i;
    int j = 2 * n - 1 - i;
    if (j < 0) throw std::logic_error("pad_image: dims too small to mirror");
    return j;
  };
  for (int r = 0; r < kPaddedHeight; ++r)
    for (int c = 0; c < kPaddedWidth; ++c)
      p.at(r, c) = img.at(reflect(r, img.height), reflect(c, img.width));
  return p;
}

inline GrayImage crop_image(const PaddedRaster& p, int width = kImageWidth,
                            int height = kImageHeight) {
  GrayImage img(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) img.at(r, c) = p.at(r, c);
  return img;
}

namespace detail {

// One periodized analysis step along a length-n vector with stride.
// a[k] = sum_m h[m] x[(2k+m) mod n], d[k] likewise with g.
inline void dwt_step(std::vector<double>& buf, const double* x, int n,
                     int stride) {
  const auto& h = Db10Filter::lowpass;
  static const auto g = Db10Filter::highpass_taps();
  const int half = n / 2;
  buf.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (int m = 0; m < Db10Filter::kTaps; ++m) {
      const double v = x[((2 * k + m) % n) * static_cast<std::size_t>(stride)];
      a += h[m] * v;
      d += g[m] * v;
    }
    buf[static_cast<std::size_t>(k)] = a;
    buf[static_cast<std::size_t>(half + k)] = d;
  }
}

// Inverse of dwt_step: x[(2k+m) mod n] += h[m] a[k] + g[m] d[k].
inline void idwt_step(std::vector<double>& buf, const double* c, int n,
                      int stride) {
  const auto& h = Db10Filter::lowpass;
  static const auto g = Db10Filter::highpass_taps();
  const int half = n / 2;
  buf.assign(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < half; ++k) {
    const double a = c[static_cast<std::size_t>(k) * stride];
    const double d = c[static_cast<std::size_t>(half + k) * stride];
    for (int m = 0; m < Db10Filter::kTaps; ++m)
      buf[static_cast<std::size_t>((2 * k + m) % n)] += h[m] * a + g[m] * d;
  }
}

}  // namespace detail

// Separable periodized 2-D DWT, `levels` deep on the approximation band.
inline WaveletCoeffs dwt2(const PaddedRaster& p, int levels = kDefaultLevels) {
  if (p.width < 2 || p.height < 2 || (p.width & (p.width - 1)) != 0 ||
      (p.height & (p.height - 1)) != 0)
    throw std::invalid_argument("dwt2: dims must be dyadic");
  if (levels < 1 || (p.width >> levels) < 1 || (p.height >> levels) < 1)
    throw std::invalid_argument("dwt2: infeasible level count");

  WaveletCoeffs wc{p.width, p.height, levels, p.data};
  std::vector<double> buf;
  int w = p.width, h = p.height;
  for (int lev = 0; lev < levels; ++lev) {
    // rows
    for (int r = 0; r < h; ++r) {
      double* row = &wc.coeffs[static_cast<std::size_t>(r) * p.width];
      detail::dwt_step(buf, row, w, 1);
      for (int c = 0; c < w; ++c) row[c] = buf[static_cast<std::size_t>(c)];
    }
    // columns
    for (int c = 0; c < w; ++c) {
      double* col = &wc.coeffs[static_cast<std::size_t>(c)];
      detail::dwt_step(buf, col, h, p.width);
      for (int r = 0; r < h; ++r)
        col[static_cast<std::size_t>(r) * p.width] =
            buf[static_cast<std::size_t>(r)];
    }
    w /= 2;
    h /= 2;
  }
  return wc;
}

inline PaddedRaster idwt2(const WaveletCoeffs& wc) {
  wc.validate();
  PaddedRaster p{wc.padded_width, wc.padded_height, wc.coeffs};
  std::vector<double> buf;
  for (int lev = wc.levels - 1; lev >= 0; --lev) {
    const int w = wc.padded_width >> lev;
    const int h = wc.padded_height >> lev;
    // columns first (inverse order of analysis)
    for (int c = 0; c < w; ++c) {
      double* col = &p.data[static_cast<std::size_t>(c)];
      detail::idwt_step(buf, col, h, wc.padded_width);
      for (int r = 0; r < h; ++r)
        col[static_cast<std::size_t>(r) * wc.padded_width] =
            buf[static_cast<std::size_t>(r)];
    }
    for (int r = 0; r < h; ++r) {
      double* row = &p.data[static_cast<std::size_t>(r) * wc.padded_width];
      detail::idwt_step(buf, row, w, 1);
      for (int c = 0; c < w; ++c) row[c] = buf[static_cast<std::size_t>(c)];
    }
  }
  return p;
}

// Convenience: full sparsifying transform of a 35x100 image.
inline WaveletCoeffs image_to_coeffs(const GrayImage& img,
                                     int levels = kDefaultLevels) {
  return dwt2(pad_image(img), levels);
}

inline GrayImage coeffs_to_image(const WaveletCoeffs& wc) {
  return crop_image(idwt2(wc));
}

}  // namespace ped
