#include <doctest.h>

#include "pathgls/error.hpp"
#include "pathgls/tessellate.hpp"

using namespace pathgls;

TEST_CASE("grid arithmetic") {
  const Image big = Image::blank(2048, 2048, 200, 150, 180);

  SUBCASE("patch 512, stride 512") {
    const PatchBag bag = tessellate(big, 512, 512);
    CHECK(bag.size() == 16);
  }
  SUBCASE("patch 512, stride 224: 7 per axis") {
    const PatchBag bag = tessellate(big, 512, 224);
    CHECK(bag.size() == 49);
    // Cross-check by explicit enumeration of valid offsets.
    std::size_t expected = 0;
    for (int y = 0; y + 512 <= 2048; y += 224)
      for (int x = 0; x + 512 <= 2048; x += 224) ++expected;
    CHECK(bag.size() == expected);
    // Row-major order, first tile at the origin.
    CHECK(bag.patches[0].x == 0);
    CHECK(bag.patches[0].y == 0);
    CHECK(bag.patches[1].x == 224);
    CHECK(bag.patches[1].y == 0);
    CHECK(bag.patches[48].x == 6 * 224);
    CHECK(bag.patches[48].y == 6 * 224);
  }
}

TEST_CASE("single-tile case") {
  const Image img = Image::blank(512, 512, 10, 20, 30);
  const PatchBag bag = tessellate(img, 512, 97);
  REQUIRE(bag.size() == 1);
  CHECK(bag.patches[0].x == 0);
  CHECK(bag.patches[0].y == 0);
  CHECK(bag.patches[0].tile.width == 512);
}

TEST_CASE("trailing margins are dropped") {
  const Image img = Image::blank(700, 600, 10, 20, 30);
  const PatchBag bag = tessellate(img, 512, 100);
  // x in {0, 100}; y in {0}.
  CHECK(bag.size() == 2);
}

TEST_CASE("tessellate errors") {
  const Image small = Image::blank(100, 100, 0, 0, 0);
  CHECK_THROWS_WITH_AS(tessellate(small, 512, 224), doctest::Contains("image-too-small"), Error);
  const Image ok = Image::blank(512, 512, 0, 0, 0);
  CHECK_THROWS_AS(tessellate(ok, 512, 0), Error);
}

TEST_CASE("tile content matches source region") {
  Image img = Image::blank(8, 8, 0, 0, 0);
  *img.px(5, 6) = 200;  // red channel of one pixel
  const PatchBag bag = tessellate(img, 4, 4);
  REQUIRE(bag.size() == 4);
  // (5,6) lands in the bottom-right tile at local (1,2).
  CHECK(bag.patches[3].tile.px(1, 2)[0] == 200);
  CHECK(bag.patches[3].tile.px(0, 0)[0] == 0);
}

TEST_CASE("tissue fraction: white vs saturated tiles") {
  const Image white = Image::blank(16, 16, 255, 255, 255);
  CHECK(tissue_fraction(white, 0.1) == 0.0);
  const Image pink = Image::blank(16, 16, 230, 120, 170);
  CHECK(tissue_fraction(pink, 0.1) == 1.0);
}

TEST_CASE("background filtering") {
  const Image big = Image::blank(8, 8, 255, 255, 255);
  PatchBag bag = tessellate(big, 4, 4);
  REQUIRE(bag.size() == 4);

  SUBCASE("all white: single-tile fallback") {
    const PatchBag kept = filter_background(bag, 0.1, 0.5);
    CHECK(kept.size() == 1);
  }
  SUBCASE("one pink tile among whites is the survivor") {
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        auto* p = bag.patches[2].tile.px(x, y);
        p[0] = 230;
        p[1] = 120;
        p[2] = 170;
      }
    const PatchBag kept = filter_background(bag, 0.1, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept.patches[0].x == bag.patches[2].x);
    CHECK(kept.patches[0].y == bag.patches[2].y);
  }
  SUBCASE("zero thresholds keep everything") {
    const PatchBag kept = filter_background(bag, 0.0, 0.0);
    CHECK(kept.size() == bag.size());
  }
}
