#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "veinforge/random.hpp"

namespace veinforge {

struct DlaConfig {
  int particle_count = 3000;
  int lattice_size = 257;
  double sticking_probability = 0.6;
  int launch_radius_margin = 5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

/// On-lattice aggregate grown from the centre cell.
class Aggregate {
 public:
  explicit Aggregate(int lattice_size);

  int lattice_size() const { return size_; }
  Cell center() const { return {size_ / 2, size_ / 2}; }
  bool occupied(int x, int y) const;
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < size_ && y < size_; }
  /// True when a 4-neighbour of (x, y) is occupied.
  bool touches(int x, int y) const;
  void add(Cell c);

  std::size_t count() const { return cells_.size(); }
  const std::vector<Cell>& cells() const { return cells_; }
  /// Largest Euclidean distance of an occupied cell from the centre.
  double radius() const { return radius_; }
  double radius_of_gyration() const;

  bool truncated = false;

 private:
  int size_;
  std::vector<std::uint8_t> grid_;
  std::vector<Cell> cells_;
  double radius_ = 0.0;
};

/// Walks from `start` until the walker sticks; relaunches on escape.
Cell walk_from(const Aggregate& aggregate, Cell start, const DlaConfig& config, Rng& rng);

/// Launches one walker on the circle of radius (aggregate radius + margin).
Cell random_walk(const Aggregate& aggregate, const DlaConfig& config, Rng& rng);

Aggregate run_dla(const DlaConfig& config);

/// Plain PBM (P1) dump; 1 marks an occupied cell.
void write_pbm(std::ostream& out, const Aggregate& aggregate);

}  // namespace veinforge
