#include <doctest.h>

#include <filesystem>

#include "gen.hpp"
#include "textcue/error.hpp"
#include "textcue/image.hpp"

using namespace textcue;

namespace {

Image random_image(tc_test::Rng& rng, std::size_t w, std::size_t h, std::size_t ch) {
  Image img{w, h, ch, std::vector<std::uint8_t>(w * h * ch)};
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform(0, 255));
  return img;
}

}  // namespace

TEST_CASE("rotation is a permutation") {
  tc_test::Rng rng(4);
  const auto img = random_image(rng, 7, 3, 3);
  const auto r90 = rotate_clockwise(img, 90);
  CHECK(r90.width == 3);
  CHECK(r90.height == 7);
  // Top-left goes to the top-right corner.
  CHECK(std::equal(img.at(0, 0), img.at(0, 0) + 3, r90.at(2, 0)));
  // Bottom-left goes to the top-left corner.
  CHECK(std::equal(img.at(0, 2), img.at(0, 2) + 3, r90.at(0, 0)));

  auto x = img;
  for (int i = 0; i < 4; ++i) x = rotate_clockwise(x, 90);
  CHECK(x == img);
  CHECK(rotate_clockwise(rotate_clockwise(img, 180), 180) == img);
  CHECK(rotate_clockwise(rotate_clockwise(img, 90), 270) == img);
  CHECK(rotate_clockwise(img, 180) == rotate_clockwise(rotate_clockwise(img, 90), 90));
}

TEST_CASE("unsupported angles") {
  tc_test::Rng rng(4);
  const auto img = random_image(rng, 2, 2, 1);
  for (int deg : {0, 45, -90, 360}) {
    try {
      rotate_clockwise(img, deg);
      FAIL("expected UnsupportedAngle");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnsupportedAngle);
    }
  }
}

TEST_CASE("lossless formats round trip") {
  tc_test::Rng rng(12);
  const auto dir = std::filesystem::temp_directory_path();
  for (const auto& [name, ch] : std::vector<std::pair<std::string, std::size_t>>{
           {"tc_img.png", 3}, {"tc_img_rgba.png", 4}, {"tc_img.ppm", 3}, {"tc_img.pgm", 1}}) {
    const auto img = random_image(rng, 9, 5, ch);
    save_image(img, dir / name);
    CHECK(load_image(dir / name) == img);
    std::filesystem::remove(dir / name);
  }
}

TEST_CASE("jpeg round trip keeps dimensions") {
  tc_test::Rng rng(12);
  const auto path = std::filesystem::temp_directory_path() / "tc_img.jpg";
  const auto img = random_image(rng, 16, 8, 3);
  save_image(img, path);
  const auto back = load_image(path);
  CHECK(back.width == 16);
  CHECK(back.height == 8);
  CHECK(back.channels == 3);
  std::filesystem::remove(path);
}

TEST_CASE("draw box outlines and clips") {
  Image img{10, 10, 3, std::vector<std::uint8_t>(300, 0)};
  draw_box(img, BoxPx{2, 2, 8, 8}, {255, 0, 0}, 1);
  CHECK(img.at(2, 2)[0] == 255);
  CHECK(img.at(7, 5)[0] == 255);
  CHECK(img.at(5, 5)[0] == 0);
  CHECK_NOTHROW(draw_box(img, BoxPx{-5, -5, 50, 50}, {0, 255, 0}));
}

TEST_CASE("unknown image bytes") {
  const auto path = std::filesystem::temp_directory_path() / "tc_img.bin";
  std::FILE* f = std::fopen(path.c_str(), "wb");
  std::fputs("not an image at all", f);
  std::fclose(f);
  try {
    load_image(path);
    FAIL("expected FormatError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }
  std::filesystem::remove(path);
}
