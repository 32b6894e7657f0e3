#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ped/image.hpp"

namespace fs = std::filesystem;
using namespace ped;

TEST_CASE("pgm round trip is lossless after quantization") {
  GrayImage img(100, 35);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = static_cast<double>(i % 256) / 255.0;

  const fs::path tmp = fs::temp_directory_path() / "ped_test_roundtrip.pgm";
  write_pgm(img, tmp);
  const GrayImage back = read_pgm(tmp);

  REQUIRE(back.width == 100);
  REQUIRE(back.height == 35);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    REQUIRE(std::abs(back.pixels[i] - img.pixels[i]) <= 1.0 / 255.0);

  // second cycle is exact
  write_pgm(back, tmp);
  const GrayImage again = read_pgm(tmp);
  REQUIRE(again.pixels == back.pixels);
  fs::remove(tmp);
}

TEST_CASE("pgm endpoint quantization") {
  GrayImage img(2, 1);
  img.pixels = {0.0, 1.0};
  const fs::path tmp = fs::temp_directory_path() / "ped_test_endpoints.pgm";
  write_pgm(img, tmp);

  std::ifstream in(tmp, std::ios::binary);
  std::string magic, dims_w, dims_h, maxval;
  in >> magic >> dims_w >> dims_h >> maxval;
  REQUIRE(magic == "P5");
  REQUIRE(maxval == "255");
  in.get();  // single whitespace after maxval
  REQUIRE(in.get() == 0);
  REQUIRE(in.get() == 255);
  fs::remove(tmp);
}

TEST_CASE("psnr examples") {
  GrayImage a(10, 10, 0.3);
  REQUIRE(std::isinf(psnr(a, a)));

  GrayImage zero(10, 10, 0.0), one(10, 10, 1.0), half(10, 10, 0.5);
  REQUIRE(psnr(zero, one) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(psnr(zero, half) == Catch::Approx(10.0 * std::log10(4.0)));

  GrayImage wrong(5, 5, 0.0);
  REQUIRE_THROWS_AS(psnr(a, wrong), std::invalid_argument);
}

TEST_CASE("validate rejects bad rasters") {
  GrayImage img(4, 4, 0.5);
  img.validate();
  img.pixels[3] = 1.5;
  REQUIRE_THROWS_AS(img.validate(), std::invalid_argument);
  img.pixels.pop_back();
  REQUIRE_THROWS_AS(img.validate(), std::invalid_argument);
}
