#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "veinforge/raster.hpp"
#include "veinforge/random.hpp"

using namespace veinforge;

namespace {

double tv_oracle(const GrayImage& img) {
  double s = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (x + 1 < img.width()) s += std::abs(img.at(x + 1, y) - img.at(x, y));
      if (y + 1 < img.height()) s += std::abs(img.at(x, y + 1) - img.at(x, y));
    }
  return s;
}

VeinNetwork horizontal_edge(double radius = 2.0) {
  VeinNetwork n;
  n.nodes = {{0.1, 0.5}, {0.9, 0.5}};
  n.edges = {{0, 1, 1.0, 1.0, radius}};
  n.source = 0;
  n.sink = 1;
  return n;
}

GrayImage noise(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(w, h);
  for (double& v : img.pixels()) v = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("empty network renders white") {
  const auto img = rasterize(VeinNetwork{});
  CHECK(img.width() == 128);
  for (double v : img.pixels()) CHECK(v == 1.0);
}

TEST_CASE("a single edge renders a darker band") {
  const auto img = rasterize(horizontal_edge(), 128, 128);
  double band = 0.0, rest = 0.0;
  int nb = 0, nr = 0;
  const int row = static_cast<int>(std::lround((1.0 - 0.5) * 127));
  for (int y = 0; y < 128; ++y)
    for (int x = 20; x < 108; ++x) {
      if (std::abs(y - row) <= 1) {
        band += img.at(x, y);
        ++nb;
      } else {
        rest += img.at(x, y);
        ++nr;
      }
    }
  CHECK(band / nb < rest / nr);
  CHECK(img.min() >= 0.0);
  CHECK(img.min() < 0.5);
  CHECK(rasterize(horizontal_edge()) == img);
  // Thicker strokes cover more pixels.
  CHECK(rasterize(horizontal_edge(4.0)).mean() < img.mean());
}

TEST_CASE("aggregate rendering darkens occupied cells") {
  Aggregate a(33);
  a.add(a.center());
  a.add({a.center().x + 1, a.center().y});
  const auto img = rasterize(a, 64, 64);
  CHECK(img.min() < 1.0);
  CHECK(img.max() == 1.0);
  CHECK(img.at(32, 32) < img.at(2, 2));
}

TEST_CASE("enhance brightens then blurs") {
  EnhanceConfig c;
  c.brightness_factor = 1.5;
  for (int r : {3, 4, 5}) {
    c.blur_radius = r;
    const auto out = enhance(GrayImage(40, 30, 0.5), c);
    for (double v : out.pixels()) CHECK(v == doctest::Approx(0.75).epsilon(1e-12));
  }
  c.brightness_factor = 1.8;
  c.blur_passes = 1;
  c.blur_radius = 3;
  const auto sat = enhance(GrayImage(10, 10, 0.9), c);
  for (double v : sat.pixels()) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("box blur does not add variation or extend the range") {
  const auto img = noise(50, 40, 2);
  CHECK(total_variation(img) == doctest::Approx(tv_oracle(img)).epsilon(1e-12));
  for (int passes : {1, 3}) {
    const auto b = box_blur(img, 3, passes);
    CHECK(tv_oracle(b) <= tv_oracle(img));
    CHECK(b.max() <= img.max());
    CHECK(b.min() >= img.min());
    CHECK(b.mean() == doctest::Approx(img.mean()).epsilon(1e-2));
  }
  EnhanceConfig c;
  c.brightness_factor = 1.2;
  const auto bright = enhance(img, c);
  GrayImage gained = img;
  for (double& v : gained.pixels()) v = std::min(1.0, v * 1.2);
  CHECK(tv_oracle(bright) <= tv_oracle(gained));
}

TEST_CASE("enhance parameters are drawn inside their ranges") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto c = EnhanceConfig::draw(s);
    CHECK(c.brightness_factor >= 1.2);
    CHECK(c.brightness_factor <= 1.8);
    CHECK(c.blur_radius >= 3);
    CHECK(c.blur_radius <= 5);
    CHECK_NOTHROW(c.validate());
  }
  EnhanceConfig bad;
  bad.brightness_factor = 2.0;
  CHECK_THROWS(bad.validate());
  bad = {};
  bad.blur_radius = 6;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("texture contract") {
  const auto a = gen_texture(128, 128, 1);
  CHECK(a == gen_texture(128, 128, 1));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = gen_texture(128, 128, s);
    CHECK(t.mean() >= 0.55);
    CHECK(t.mean() <= 0.8);
    CHECK(t.min() >= 0.0);
    CHECK(t.max() <= 1.0);
  }
  const auto b = gen_texture(128, 128, 2);
  const auto ba = a.to_bytes(), bb = b.to_bytes();
  std::size_t differ = 0;
  for (std::size_t i = 0; i < ba.size(); ++i) differ += ba[i] != bb[i];
  CHECK(static_cast<double>(differ) / ba.size() >= 0.5);
}

TEST_CASE("multiplicative blend") {
  const auto tex = gen_texture(64, 64, 5);
  CHECK(blend(GrayImage(64, 64, 1.0), tex) == tex);
  const auto veins = rasterize(horizontal_edge(3.0), 64, 64);
  CHECK(blend(veins, GrayImage(64, 64, 1.0)) == veins);
  CHECK_THROWS_AS(blend(veins, GrayImage(32, 64, 1.0)), std::invalid_argument);

  const auto out = blend(veins, tex);
  double in = 0.0, outside = 0.0;
  int ni = 0, no = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (veins.pixels()[i] < 0.9) {
      in += out.pixels()[i];
      ++ni;
    } else {
      outside += out.pixels()[i];
      ++no;
    }
  }
  REQUIRE(ni > 0);
  CHECK(in / ni < outside / no);

  // Darkening a vein pixel never brightens the output.
  GrayImage darker = veins;
  darker.at(10, 10) *= 0.5;
  const auto out2 = blend(darker, tex);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out2.pixels()[i] <= out.pixels()[i]);
}
