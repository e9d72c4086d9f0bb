#pragma once

#include <cstdint>
#include <vector>

#include "veinforge/network.hpp"

namespace veinforge {

struct ColonizationConfig {
  int attractor_count = 400;
  double attraction_distance = 0.15;
  double kill_distance = 0.03;
  double segment_length = 0.02;
  Point root_position{0.5, 0.0};
  int max_steps = 1000;
  double terminal_radius = 0.5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Uniform attractor cloud over the unit square.
std::vector<Point> scatter_attractors(const ColonizationConfig& config);

struct GrowthState {
  VeinTree tree;
  std::vector<Point> attractors;
};

/// One space-colonization iteration. Attractors already inside the kill zone
/// are removed before they can steer growth; the kill pass is repeated
/// against the extended tree. Equidistant attractors go to the lowest node index.
GrowthState grow_step(const VeinTree& tree, const std::vector<Point>& attractors,
                      const ColonizationConfig& config);

/// Murray's law with exponent 3: leaves take terminal_radius and each parent
/// segment the cube root of the summed cubes of its children.
/// Throws std::invalid_argument on a cyclic or multi-rooted parent table.
VeinTree assign_radii(const VeinTree& tree, double terminal_radius);

VeinTree run_colonization(const ColonizationConfig& config);

/// Same as run_colonization but also returns the attractors left at termination.
GrowthState run_colonization_state(const ColonizationConfig& config);

}  // namespace veinforge
