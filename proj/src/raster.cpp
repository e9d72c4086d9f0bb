#include "veinforge/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "veinforge/random.hpp"

namespace veinforge {
namespace {

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

// Darkness buffer: per-pixel coverage in [0, 1], combined by max.
void stroke(std::vector<double>& cover, int width, int height, double ax, double ay, double bx,
            double by, double half_width) {
  const double reach = half_width + 1.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - reach)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(ax, bx) + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - reach)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(ay, by) + reach)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = segment_distance(x + 0.5, y + 0.5, ax, ay, bx, by);
      const double c = std::clamp(half_width + 0.5 - d, 0.0, 1.0);
      auto& slot = cover[static_cast<std::size_t>(y) * width + x];
      slot = std::max(slot, c);
    }
  }
}

GrayImage from_cover(const std::vector<double>& cover, int width, int height) {
  GrayImage img(width, height, 1.0);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = 1.0 - kVeinDarkness * cover[i];
  return img;
}

// Half-sample symmetric reflection: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) ...
int reflect(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

void blur_line(const double* in, double* out, int n, std::ptrdiff_t stride, int radius) {
  const double norm = 1.0 / (2 * radius + 1);
  double acc = 0.0;
  for (int k = -radius; k <= radius; ++k) acc += in[reflect(k, n) * stride];
  for (int i = 0; i < n; ++i) {
    out[i * stride] = acc * norm;
    acc += in[reflect(i + radius + 1, n) * stride] - in[reflect(i - radius, n) * stride];
  }
}

// Smooth lattice value noise with a hashed lattice.
double lattice_value(std::uint64_t seed, int ix, int iy) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
                                                       static_cast<std::uint32_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, double x, double y) {
  const int ix = static_cast<int>(std::floor(x));
  const int iy = static_cast<int>(std::floor(y));
  const double fx = x - ix, fy = y - iy;
  const double sx = fx * fx * (3.0 - 2.0 * fx);
  const double sy = fy * fy * (3.0 - 2.0 * fy);
  const double v00 = lattice_value(seed, ix, iy);
  const double v10 = lattice_value(seed, ix + 1, iy);
  const double v01 = lattice_value(seed, ix, iy + 1);
  const double v11 = lattice_value(seed, ix + 1, iy + 1);
  const double top = v00 + (v10 - v00) * sx;
  const double bottom = v01 + (v11 - v01) * sx;
  return top + (bottom - top) * sy;
}

}  // namespace

GrayImage rasterize(const VeinNetwork& network, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("rasterize: empty canvas");
  std::vector<double> cover(static_cast<std::size_t>(width) * height, 0.0);
  const double scale = width / 128.0;
  for (const auto& e : network.edges) {
    const Point& a = network.nodes.at(e.a);
    const Point& b = network.nodes.at(e.b);
    const double half = std::max(0.5, e.radius * scale);
    stroke(cover, width, height, a.x * width, (1.0 - a.y) * height, b.x * width,
           (1.0 - b.y) * height, half);
  }
  return from_cover(cover, width, height);
}

GrayImage rasterize(const Aggregate& aggregate, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("rasterize: empty canvas");
  std::vector<double> cover(static_cast<std::size_t>(width) * height, 0.0);
  const double sx = static_cast<double>(width) / aggregate.lattice_size();
  const double sy = static_cast<double>(height) / aggregate.lattice_size();
  const double half = std::max(0.75, 1.0 * width / 128.0);
  for (const auto& c : aggregate.cells()) {
    const double x = (c.x + 0.5) * sx;
    const double y = (c.y + 0.5) * sy;
    stroke(cover, width, height, x, y, x, y, half);
  }
  return from_cover(cover, width, height);
}

EnhanceConfig EnhanceConfig::draw(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xe4a));
  EnhanceConfig cfg;
  cfg.brightness_factor = rng.uniform(kMinBrightness, kMaxBrightness);
  cfg.blur_radius = static_cast<int>(rng.uniform_int(kMinBlurRadius, kMaxBlurRadius));
  return cfg;
}

void EnhanceConfig::validate() const {
  if (!(brightness_factor >= kMinBrightness && brightness_factor <= kMaxBrightness)) {
    throw std::invalid_argument("enhance: brightness_factor must lie in [1.2, 1.8]");
  }
  if (blur_radius < kMinBlurRadius || blur_radius > kMaxBlurRadius) {
    throw std::invalid_argument("enhance: blur_radius must lie in [3, 5]");
  }
  if (blur_passes < 1) throw std::invalid_argument("enhance: blur_passes must be >= 1");
}

GrayImage box_blur(const GrayImage& image, int radius, int passes) {
  if (radius <= 0 || image.empty()) return image;
  const int w = image.width(), h = image.height();
  GrayImage a = image, b(w, h);
  for (int p = 0; p < passes; ++p) {
    for (int y = 0; y < h; ++y) {
      blur_line(&a.pixels()[static_cast<std::size_t>(y) * w], &b.pixels()[static_cast<std::size_t>(y) * w], w, 1, radius);
    }
    for (int x = 0; x < w; ++x) blur_line(&b.pixels()[x], &a.pixels()[x], h, w, radius);
  }
  return a;
}

GrayImage enhance(const GrayImage& image, const EnhanceConfig& config) {
  config.validate();
  GrayImage out = image;
  for (double& v : out.pixels()) v = std::clamp(v * config.brightness_factor, 0.0, 1.0);
  out = box_blur(out, config.blur_radius, config.blur_passes);
  out.clamp();
  return out;
}

GrayImage gen_texture(int width, int height, std::uint64_t rng_seed) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("gen_texture: empty canvas");
  Rng rng(derive_seed(rng_seed, 0x7e87));
  const std::uint64_t noise_seed = rng.next();
  const double target_mean = rng.uniform(0.6, 0.75);
  const double grain = rng.uniform(0.10, 0.16);

  GrayImage tex(width, height);
  const double base_freq = 4.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width, v = (y + 0.5) / height;
      double sum = 0.0, amp = 1.0, norm = 0.0, freq = base_freq;
      for (int octave = 0; octave < 5; ++octave) {
        sum += amp * value_noise(noise_seed + octave, u * freq, v * freq);
        norm += amp;
        amp *= 0.55;
        freq *= 2.0;
      }
      tex.at(x, y) = grain * (sum / norm - 0.5) * 2.0;
    }
  }

  // Palm creases: a few long, gently curved dark lines.
  const int creases = static_cast<int>(rng.uniform_int(2, 4));
  for (int c = 0; c < creases; ++c) {
    const double angle = rng.uniform(-0.6, 0.6) + (rng.uniform() < 0.5 ? 0.0 : std::numbers::pi / 2);
    const double cx = rng.uniform(0.2, 0.8) * width, cy = rng.uniform(0.2, 0.8) * height;
    const double bend = rng.uniform(-0.004, 0.004);
    const double depth = rng.uniform(0.02, 0.045);
    const double half = rng.uniform(1.2, 2.4) * width / 128.0;
    const double dx = std::cos(angle), dy = std::sin(angle);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double rx = x - cx, ry = y - cy;
        const double along = rx * dx + ry * dy;
        const double across = -rx * dy + ry * dx - bend * along * along;
        const double fall = std::exp(-0.5 * (across * across) / (half * half));
        const double fade = std::exp(-0.5 * along * along / (0.35 * width * 0.35 * width));
        tex.at(x, y) -= depth * fall * fade;
      }
    }
  }

  // Grain and crease amplitudes keep every pixel inside (0, 1) after the shift.
  const double shift = target_mean - tex.mean();
  for (double& v : tex.pixels()) v = std::clamp(v + shift, 0.0, 1.0);
  return tex;
}

GrayImage blend(const GrayImage& vein_image, const GrayImage& texture) {
  if (vein_image.width() != texture.width() || vein_image.height() != texture.height()) {
    throw std::invalid_argument("blend: image dimensions differ");
  }
  GrayImage out = vein_image;
  auto o = out.pixels();
  auto t = texture.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= t[i];
  return out;
}

double total_variation(const GrayImage& image) {
  double tv = 0.0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (x + 1 < image.width()) tv += std::abs(image.at(x + 1, y) - image.at(x, y));
      if (y + 1 < image.height()) tv += std::abs(image.at(x, y + 1) - image.at(x, y));
    }
  }
  return tv;
}

}  // namespace veinforge
