#include "veinforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "veinforge/random.hpp"
#include "veinforge/raster.hpp"

namespace veinforge {

AugmentConfig AugmentConfig::identity() {
  AugmentConfig cfg;
  cfg.contrast_gain = {1.0, 1.0};
  cfg.brightness_offset = {0.0, 0.0};
  cfg.blur_radius_max = 0;
  cfg.translation_px = {0.0, 0.0};
  cfg.rotation_deg = {0.0, 0.0};
  cfg.crop_margin_px = {0.0, 0.0};
  cfg.shear = {0.0, 0.0};
  return cfg;
}

bool AugmentConfig::is_identity() const {
  return contrast_gain.lo == 1.0 && contrast_gain.hi == 1.0 && brightness_offset.lo == 0.0 &&
         brightness_offset.hi == 0.0 && blur_radius_max == 0 && translation_px.lo == 0.0 &&
         translation_px.hi == 0.0 && rotation_deg.lo == 0.0 && rotation_deg.hi == 0.0 &&
         crop_margin_px.lo == 0.0 && crop_margin_px.hi == 0.0 && shear.lo == 0.0 && shear.hi == 0.0;
}

void AugmentConfig::validate() const {
  for (const Range* r : {&contrast_gain, &brightness_offset, &translation_px, &rotation_deg,
                         &crop_margin_px, &shear}) {
    if (!(r->lo <= r->hi) || !std::isfinite(r->lo) || !std::isfinite(r->hi)) {
      throw std::invalid_argument("augment: range must satisfy lo <= hi");
    }
  }
  if (contrast_gain.lo <= 0.0) throw std::invalid_argument("augment: contrast gain must be positive");
  if (std::max(std::abs(rotation_deg.lo), std::abs(rotation_deg.hi)) > kMaxRotationDeg) {
    throw std::invalid_argument("augment: rotation bound exceeds 15 degrees");
  }
  if (crop_margin_px.lo < 0.0) throw std::invalid_argument("augment: crop margin must be >= 0");
  if (blur_radius_max < 0) throw std::invalid_argument("augment: blur radius must be >= 0");
}

GrayImage warp_affine(const GrayImage& image, const Affine& m, int width, int height) {
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out.at(x, y) = image.sample(m.a * x + m.b * y + m.c, m.d * x + m.e * y + m.f);
    }
  }
  return out;
}

namespace {

struct SampleDraw {
  double gain, offset;
  int blur;
  double tx, ty, angle, shear;
  double crop_l, crop_r, crop_t, crop_b;
};

SampleDraw draw_sample(const AugmentConfig& cfg, Rng& rng) {
  auto pick = [&](const Range& r) { return r.degenerate() ? r.lo : rng.uniform(r.lo, r.hi); };
  SampleDraw s{};
  s.gain = pick(cfg.contrast_gain);
  s.offset = pick(cfg.brightness_offset);
  s.blur = cfg.blur_radius_max > 0 ? static_cast<int>(rng.uniform_int(0, cfg.blur_radius_max)) : 0;
  s.tx = pick(cfg.translation_px);
  s.ty = pick(cfg.translation_px);
  s.angle = pick(cfg.rotation_deg) * std::numbers::pi / 180.0;
  s.shear = pick(cfg.shear);
  s.crop_l = pick(cfg.crop_margin_px);
  s.crop_r = pick(cfg.crop_margin_px);
  s.crop_t = pick(cfg.crop_margin_px);
  s.crop_b = pick(cfg.crop_margin_px);
  return s;
}

// Output pixel -> source pixel: undo translation, rotation and shear about the
// centre, then map the full frame onto the cropped window.
Affine sample_affine(const SampleDraw& s, int w, int h) {
  const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
  const double sx = (w - 1 - s.crop_l - s.crop_r) / std::max(1.0, w - 1.0);
  const double sy = (h - 1 - s.crop_t - s.crop_b) / std::max(1.0, h - 1.0);
  const double ox = s.crop_l + cx * sx - cx;  // crop window centre offset
  const double oy = s.crop_t + cy * sy - cy;
  const double co = std::cos(s.angle), si = std::sin(s.angle);
  // source = C + Crop * Shear^-1 * Rot^-1 * (out - C - t)
  // Rot^-1 = [co si; -si co], Shear^-1 = [1 -k; 0 1]
  const double r00 = co - s.shear * -si, r01 = si - s.shear * co;
  const double r10 = -si, r11 = co;
  Affine m;
  m.a = sx * r00;
  m.b = sx * r01;
  m.d = sy * r10;
  m.e = sy * r11;
  const double px = -cx - s.tx, py = -cy - s.ty;
  m.c = cx + ox + m.a * px + m.b * py;
  m.f = cy + oy + m.d * px + m.e * py;
  return m;
}

GrayImage apply_sample(const GrayImage& primary, const SampleDraw& s) {
  GrayImage out = warp_affine(primary, sample_affine(s, primary.width(), primary.height()),
                              primary.width(), primary.height());
  const double mean = out.mean();
  for (double& v : out.pixels()) v = std::clamp((v - mean) * s.gain + mean + s.offset, 0.0, 1.0);
  if (s.blur > 0) out = box_blur(out, s.blur, 1);
  return out;
}

}  // namespace

std::vector<GrayImage> vsa_augment(const GrayImage& primary, const AugmentConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.rng_seed, 0x45a));
  const bool identity = config.is_identity();
  const auto primary_bytes = primary.to_bytes();
  std::vector<GrayImage> samples;
  std::vector<std::vector<unsigned char>> seen{primary_bytes};
  constexpr int kMaxRedraws = 64;
  for (int k = 0; k < AugmentConfig::kSamplesPerSubject; ++k) {
    GrayImage sample;
    for (int attempt = 0;; ++attempt) {
      sample = apply_sample(primary, draw_sample(config, rng));
      if (identity) break;
      const auto bytes = sample.to_bytes();
      if (std::find(seen.begin(), seen.end(), bytes) == seen.end()) {
        seen.push_back(bytes);
        break;
      }
      if (attempt >= kMaxRedraws) throw std::runtime_error("vsa_augment: ranges too narrow for distinct samples");
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

int roi_crop_count(const RoiAugmentParams& p) {
  const int per_axis = p.shift_step > 0 ? 2 * (p.shift_extent / p.shift_step) + 1 : 1;
  const int rotations = p.angle_step > 0 ? 2 * (p.angle_max / p.angle_step) : 0;
  return per_axis * per_axis + rotations;
}

std::vector<GrayImage> roi_augment(const GrayImage& raw, const RoiAugmentParams& p) {
  if (p.roi_side < 1 || p.shift_step < 1 || p.angle_step < 1 || p.shift_extent < 0 || p.angle_max < 0) {
    throw std::invalid_argument("roi_augment: invalid parameters");
  }
  if (raw.width() < p.roi_side + 2 * p.shift_extent || raw.height() < p.roi_side + 2 * p.shift_extent) {
    throw std::invalid_argument("roi_augment: raw image smaller than roi_side + 2*shift_extent");
  }
  const double cx = 0.5 * (raw.width() - 1), cy = 0.5 * (raw.height() - 1);
  const double half = 0.5 * (p.roi_side - 1);

  auto crop = [&](double dx, double dy, double degrees) {
    const double th = degrees * std::numbers::pi / 180.0;
    const double co = std::cos(th), si = std::sin(th);
    Affine m{co, -si, 0.0, si, co, 0.0};
    m.c = cx + dx - (co * half - si * half);
    m.f = cy + dy - (si * half + co * half);
    for (const auto& [u, v] : {std::pair{0.0, 0.0}, {2 * half, 0.0}, {0.0, 2 * half}, {2 * half, 2 * half}}) {
      const double sx = m.a * u + m.b * v + m.c, sy = m.d * u + m.e * v + m.f;
      if (sx < -1e-9 || sy < -1e-9 || sx > raw.width() - 1 + 1e-9 || sy > raw.height() - 1 + 1e-9) {
        throw std::invalid_argument("roi_augment: ROI exceeds image bounds");
      }
    }
    return warp_affine(raw, m, p.roi_side, p.roi_side);
  };

  std::vector<GrayImage> out;
  out.reserve(roi_crop_count(p));
  const int steps = p.shift_extent / p.shift_step;
  for (int j = -steps; j <= steps; ++j) {
    for (int i = -steps; i <= steps; ++i) out.push_back(crop(i * p.shift_step, j * p.shift_step, 0.0));
  }
  for (int k = 1; k * p.angle_step <= p.angle_max; ++k) {
    out.push_back(crop(0.0, 0.0, k * p.angle_step));
    out.push_back(crop(0.0, 0.0, -k * p.angle_step));
  }
  return out;
}

}  // namespace veinforge
