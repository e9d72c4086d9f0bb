#pragma once

#include <cstdint>
#include <vector>

#include "veinforge/image.hpp"

namespace veinforge {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate() const { return lo == hi; }
};

/// Sampling ranges for the per-subject sample augmentation.
struct AugmentConfig {
  // photometric
  Range contrast_gain{0.9, 1.1};
  Range brightness_offset{-0.05, 0.05};
  int blur_radius_max = 1;  // box radius drawn from {0, ..., blur_radius_max}
  // geometric
  Range translation_px{-3.0, 3.0};
  Range rotation_deg{-3.0, 3.0};
  Range crop_margin_px{0.0, 2.0};
  Range shear{-0.03, 0.03};
  std::uint64_t rng_seed = 0;

  static constexpr int kSamplesPerSubject = 6;
  static constexpr double kMaxRotationDeg = 15.0;

  /// All ranges collapsed onto the identity transform.
  static AugmentConfig identity();
  bool is_identity() const;
  void validate() const;
};

/// 2x3 affine map from output pixel coordinates to source pixel coordinates.
struct Affine {
  double a = 1, b = 0, c = 0;
  double d = 0, e = 1, f = 0;
};

/// Bilinear resampling through `to_source`; out-of-frame samples clamp to the edge.
GrayImage warp_affine(const GrayImage& image, const Affine& to_source, int width, int height);

/// Six samples, each a random photometric transform of a random affine
/// transform of the primary. Samples are pairwise distinct (8-bit) unless
/// every range is degenerate.
std::vector<GrayImage> vsa_augment(const GrayImage& primary, const AugmentConfig& config);

struct RoiAugmentParams {
  int roi_side = 128;
  int shift_step = 5;
  int shift_extent = 20;
  int angle_step = 5;
  int angle_max = 15;
};

/// Number of crops roi_augment produces for the given parameters.
int roi_crop_count(const RoiAugmentParams& params);

/// Square crops around the raw image centre: a (2E/step + 1)^2 grid of
/// translated crops followed by rotated centre crops at +-step, +-2*step, ...
/// up to +-angle_max. Throws std::invalid_argument when a crop leaves the image.
std::vector<GrayImage> roi_augment(const GrayImage& raw, const RoiAugmentParams& params = {});

}  // namespace veinforge
