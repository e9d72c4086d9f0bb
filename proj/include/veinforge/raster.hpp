#pragma once

#include <cstdint>

#include "veinforge/dla.hpp"
#include "veinforge/image.hpp"
#include "veinforge/network.hpp"

namespace veinforge {

/// Intensity removed at the centre of a fully covered vein stroke.
inline constexpr double kVeinDarkness = 0.75;

/// Draws the network on a white canvas. Stroke width is 2 * radius scaled
/// from the 128 px reference to `width`; edges are anti-aliased by coverage.
GrayImage rasterize(const VeinNetwork& network, int width = 128, int height = 128);

/// Draws each occupied aggregate cell as a soft dot scaled into the canvas.
GrayImage rasterize(const Aggregate& aggregate, int width = 128, int height = 128);

struct EnhanceConfig {
  double brightness_factor = 1.5;
  int blur_radius = 4;
  int blur_passes = 3;

  static constexpr double kMinBrightness = 1.2;
  static constexpr double kMaxBrightness = 1.8;
  static constexpr int kMinBlurRadius = 3;
  static constexpr int kMaxBlurRadius = 5;

  /// Brightness in [1.2, 1.8] and blur radius in {3, 4, 5}, drawn from the seed.
  static EnhanceConfig draw(std::uint64_t seed);
  void validate() const;
};

/// Box blur with half-sample symmetric borders, separable, repeated `passes` times.
GrayImage box_blur(const GrayImage& image, int radius, int passes = 1);

/// Brightness gain with clamping, followed by the box-blur cascade.
GrayImage enhance(const GrayImage& image, const EnhanceConfig& config);

/// Procedural palm texture: multi-octave value noise plus faint crease lines.
/// Mean intensity lies in [0.55, 0.8].
GrayImage gen_texture(int width, int height, std::uint64_t rng_seed);

/// Multiplicative blend. Throws std::invalid_argument on a size mismatch.
GrayImage blend(const GrayImage& vein_image, const GrayImage& texture);

/// Anisotropic total variation, sum of |dx| + |dy| over neighbouring pixels.
double total_variation(const GrayImage& image);

}  // namespace veinforge
