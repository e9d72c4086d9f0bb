#pragma once

#include <cstdint>
#include <vector>

#include "veinforge/image.hpp"

namespace veinforge {

/// Binary one-pixel-wide vein skeleton used for identity matching.
struct VeinMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;
  std::vector<int> on;  // linear indices of set cells

  bool operator==(const VeinMap&) const = default;
};

struct VeinMapParams {
  int local_radius = 1;        // box radius of the local intensity estimate
  int background_radius = 7;   // box radius of the background estimate (two passes)
  double darkness = 0.02;      // required drop below background
  int border = 6;              // ignored frame, px
};

/// Adaptive-threshold binarization followed by Zhang-Suen thinning.
VeinMap vein_map(const GrayImage& image, const VeinMapParams& params = {});

/// Zhang-Suen thinning of a binary mask (row-major, 0/1).
std::vector<std::uint8_t> thin(std::vector<std::uint8_t> mask, int width, int height);

inline constexpr int kMatchShift = 4;

/// Max normalized cross-correlation over translations within +-max_shift,
/// clamped to [0, 1]. Symmetric; 1 for identical non-empty maps; 0 if either is empty.
double map_similarity(const VeinMap& a, const VeinMap& b, int max_shift = kMatchShift);

/// map_similarity of the two images' vein maps. Throws on a size mismatch.
double similarity_score(const GrayImage& a, const GrayImage& b);

}  // namespace veinforge
