#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "dentalreg/image_io.hpp"
#include "dentalreg/regfit.hpp"
#include "dentalreg/rng.hpp"

using namespace dentalreg;
namespace fs = std::filesystem;

TEST_CASE("PNG write/read round trip") {
  RgbImage img(37, 23);
  Rng rng(1);
  for (auto& byte : img.pixels) byte = static_cast<std::uint8_t>(rng.below(256));
  const fs::path p = fs::temp_directory_path() / "roundtrip.png";
  write_png_rgb(img, p);
  const RgbImage back = read_png_rgb(p);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("segmentation encode/decode round trip") {
  Rng rng(2);
  SegmentationImage seg;
  seg.width = 64;
  seg.height = 48;
  seg.roi = Bitmask(64, 48);
  seg.occlusion = Bitmask(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const double r = rng.uniform();
      if (r < 0.3)
        seg.roi.set(x, y);
      else if (r < 0.5)
        seg.occlusion.set(x, y);
    }
  const SegmentationImage back = decode_segmentation(encode_segmentation(seg));
  CHECK(count_xor(back.roi, seg.roi) == 0);
  CHECK(count_xor(back.occlusion, seg.occlusion) == 0);
}

TEST_CASE("segmentation decode tolerates lossy channel values") {
  RgbImage img(3, 1);
  img.put(0, 0, 250, 247, 246);  // near-white -> ROI
  img.put(1, 0, 252, 8, 3);      // near-red -> occlusion
  img.put(2, 0, 128, 128, 128);  // background
  const SegmentationImage seg = decode_segmentation(img);
  CHECK(seg.roi.get(0, 0));
  CHECK_FALSE(seg.occlusion.get(0, 0));
  CHECK(seg.occlusion.get(1, 0));
  CHECK_FALSE(seg.roi.get(2, 0));
  CHECK_FALSE(seg.occlusion.get(2, 0));
}

TEST_CASE("missing or malformed PNG raises") {
  CHECK_THROWS_AS(read_png_rgb("/nonexistent/x.png"), IoError);
  const fs::path p = fs::temp_directory_path() / "notapng.png";
  {
    std::ofstream out(p);
    out << "this is not a png";
  }
  CHECK_THROWS_AS(read_png_rgb(p), ParseError);
}
