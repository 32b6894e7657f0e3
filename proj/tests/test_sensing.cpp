#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "ped/dataset.hpp"
#include "ped/sensing.hpp"

using namespace ped;

TEST_CASE("bernoulli density near one half") {
  const SensingMatrix m(200, 3500, 7, MeasureDomain::Pixel);
  // binomial(700000, 1/2) tail outside +-2% is < 1e-6
  REQUIRE(m.ones_fraction() > 0.48);
  REQUIRE(m.ones_fraction() < 0.52);
}

TEST_CASE("bit-exact regeneration from the key") {
  const SensingMatrix a(10, 3500, 99, MeasureDomain::Pixel);
  const SensingMatrix b(10, 3500, 99, MeasureDomain::Pixel);
  REQUIRE(a == b);
}

TEST_CASE("M >= N is rejected") {
  REQUIRE_THROWS_AS(SensingMatrix(3500, 3500, 1, MeasureDomain::Pixel),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(SensingMatrix(4000, 3500, 1, MeasureDomain::Pixel),
                    std::invalid_argument);
}

TEST_CASE("measure_pixels row sums and zero image") {
  const SensingMatrix m(20, 3500, 3, MeasureDomain::Pixel);

  GrayImage zero(100, 35, 0.0);
  const Measurement y0 = measure_pixels(m, zero);
  REQUIRE(y0.values.norm() == 0.0);

  GrayImage ones(100, 35, 1.0);
  const Measurement y1 = measure_pixels(m, ones);
  for (int r = 0; r < 20; ++r) {
    int popcount = 0;
    for (int c = 0; c < 3500; ++c) popcount += m.entry(r, c) ? 1 : 0;
    REQUIRE(y1.values[r] == Catch::Approx(popcount).margin(1e-9));
  }
}

TEST_CASE("matches a naive triple-loop oracle on a toy matrix") {
  // 3x4 via a tiny image; oracle computes dot products by hand
  const SensingMatrix m(3, 4, 11, MeasureDomain::Pixel);
  GrayImage img(2, 2);
  img.pixels = {0.1, 0.7, 0.3, 0.9};
  const Measurement y = measure_pixels(m, img);
  for (int r = 0; r < 3; ++r) {
    double expect = 0.0;
    for (int c = 0; c < 4; ++c)
      if (m.entry(r, c)) expect += img.pixels[static_cast<std::size_t>(c)];
    REQUIRE(y.values[r] == Catch::Approx(expect).margin(1e-12));
  }
}

TEST_CASE("dimension mismatch rejected") {
  const SensingMatrix m(3, 4, 11, MeasureDomain::Pixel);
  GrayImage img(3, 2, 0.5);
  REQUIRE_THROWS_AS(measure_pixels(m, img), std::invalid_argument);

  const SensingMatrix wm(4, 100, 11, MeasureDomain::Wavelet);
  REQUIRE_THROWS_AS(measure_coeffs(wm, render_word("AAA")),
                    std::invalid_argument);
}

TEST_CASE("wavelet path equals explicit basis-matrix path on a toy size") {
  // Explicitly materialize the 1-level 8x8 transform matrix Psi via unit
  // impulses, then check phi*dwt(x) == (phi*Psi)*x.
  const int n = 64;
  Eigen::MatrixXd psi(n, n);
  for (int j = 0; j < n; ++j) {
    PaddedRaster p{8, 8, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    p.data[static_cast<std::size_t>(j)] = 1.0;
    const WaveletCoeffs wc = dwt2(p, 1);
    for (int i = 0; i < n; ++i)
      psi(i, j) = wc.coeffs[static_cast<std::size_t>(i)];
  }

  const SensingMatrix phi(8, n, 5, MeasureDomain::Wavelet);
  const Eigen::MatrixXd phi_psi = phi.to_dense() * psi;

  std::mt19937_64 rng(31);
  PaddedRaster p{8, 8, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  for (double& v : p.data) v = uniform01(rng);
  const WaveletCoeffs wc = dwt2(p, 1);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
      wc.coeffs.data(), static_cast<Eigen::Index>(wc.coeffs.size()));
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
      p.data.data(), static_cast<Eigen::Index>(p.data.size()));

  const Eigen::VectorXd via_transform = phi.apply(w);
  const Eigen::VectorXd via_matrix = phi_psi * x;
  REQUIRE((via_transform - via_matrix).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("measurement linearity") {
  const SensingMatrix m(30, kPaddedSize, 13, MeasureDomain::Wavelet);
  const GrayImage x1 = render_word("ABC");
  const GrayImage x2 = render_word("XYZ");
  const double a = 0.4, b = 0.6;
  GrayImage mix(kImageWidth, kImageHeight);
  for (std::size_t i = 0; i < mix.pixels.size(); ++i)
    mix.pixels[i] = a * x1.pixels[i] + b * x2.pixels[i];

  const Eigen::VectorXd ymix = measure_coeffs(m, mix).values;
  const Eigen::VectorXd ysum =
      a * measure_coeffs(m, x1).values + b * measure_coeffs(m, x2).values;
  REQUIRE((ymix - ysum).norm() / ysum.norm() < 1e-9);

  // zero image -> zero vector
  GrayImage zero(kImageWidth, kImageHeight, 0.0);
  REQUIRE(measure_coeffs(m, zero).values.norm() == 0.0);
}

TEST_CASE("key sensitivity across seeds") {
  const GrayImage img = render_word("KEY");
  const SensingMatrix base(50, kPaddedSize, 1000, MeasureDomain::Wavelet);
  const Eigen::VectorXd y0 = measure_coeffs(base, img).values;
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const SensingMatrix other(50, kPaddedSize, 1000 + s,
                              MeasureDomain::Wavelet);
    const Eigen::VectorXd y1 = measure_coeffs(other, img).values;
    REQUIRE((y1 - y0).norm() / y0.norm() > 1e-3);
  }
}
