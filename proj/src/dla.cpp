#include "veinforge/dla.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace veinforge {

void DlaConfig::validate() const {
  if (particle_count < 0) throw std::invalid_argument("dla: particle_count must be >= 0");
  if (lattice_size < 3 || lattice_size % 2 == 0) throw std::invalid_argument("dla: lattice_size must be odd and >= 3");
  if (!(sticking_probability > 0.0 && sticking_probability <= 1.0)) {
    throw std::invalid_argument("dla: sticking_probability must be in (0, 1]");
  }
  if (launch_radius_margin < 1) throw std::invalid_argument("dla: launch_radius_margin must be >= 1");
}

Aggregate::Aggregate(int lattice_size)
    : size_(lattice_size), grid_(static_cast<std::size_t>(lattice_size) * lattice_size, 0) {
  add(center());
}

bool Aggregate::occupied(int x, int y) const {
  return inside(x, y) && grid_[static_cast<std::size_t>(y) * size_ + x] != 0;
}

bool Aggregate::touches(int x, int y) const {
  return occupied(x + 1, y) || occupied(x - 1, y) || occupied(x, y + 1) || occupied(x, y - 1);
}

void Aggregate::add(Cell c) {
  if (!inside(c.x, c.y)) throw std::out_of_range("aggregate cell outside lattice");
  auto& slot = grid_[static_cast<std::size_t>(c.y) * size_ + c.x];
  if (slot) return;
  slot = 1;
  cells_.push_back(c);
  const Cell o = center();
  radius_ = std::max(radius_, std::hypot(c.x - o.x, c.y - o.y));
}

double Aggregate::radius_of_gyration() const {
  double mx = 0.0, my = 0.0;
  for (const auto& c : cells_) {
    mx += c.x;
    my += c.y;
  }
  mx /= cells_.size();
  my /= cells_.size();
  double s = 0.0;
  for (const auto& c : cells_) s += (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
  return std::sqrt(s / cells_.size());
}

namespace {

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

Cell launch_cell(const Aggregate& aggregate, const DlaConfig& config, Rng& rng) {
  const Cell o = aggregate.center();
  const double r = aggregate.radius() + config.launch_radius_margin;
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Cell c{static_cast<int>(std::lround(o.x + r * std::cos(theta))),
         static_cast<int>(std::lround(o.y + r * std::sin(theta)))};
  const int hi = aggregate.lattice_size() - 1;
  c.x = std::clamp(c.x, 0, hi);
  c.y = std::clamp(c.y, 0, hi);
  return c;
}

}  // namespace

Cell walk_from(const Aggregate& aggregate, Cell start, const DlaConfig& config, Rng& rng) {
  const Cell o = aggregate.center();
  const double escape = 2.0 * (aggregate.radius() + config.launch_radius_margin);
  const double escape2 = escape * escape;
  Cell w = start;
  for (;;) {
    if (aggregate.touches(w.x, w.y) && !aggregate.occupied(w.x, w.y)) {
      if (config.sticking_probability >= 1.0 || rng.uniform() < config.sticking_probability) return w;
    }
    const auto dir = static_cast<int>(rng.next() >> 62);
    const Cell n{w.x + kDx[dir], w.y + kDy[dir]};
    const double ddx = n.x - o.x, ddy = n.y - o.y;
    if (!aggregate.inside(n.x, n.y) || ddx * ddx + ddy * ddy > escape2) {
      w = launch_cell(aggregate, config, rng);
      continue;
    }
    if (!aggregate.occupied(n.x, n.y)) w = n;
  }
}

Cell random_walk(const Aggregate& aggregate, const DlaConfig& config, Rng& rng) {
  return walk_from(aggregate, launch_cell(aggregate, config, rng), config, rng);
}

Aggregate run_dla(const DlaConfig& config) {
  config.validate();
  Aggregate agg(config.lattice_size);
  Rng rng(derive_seed(config.rng_seed, 0xd1a));
  const int hi = config.lattice_size - 1;
  for (int i = 0; i < config.particle_count; ++i) {
    const Cell c = random_walk(agg, config, rng);
    agg.add(c);
    if (c.x == 0 || c.y == 0 || c.x == hi || c.y == hi) {
      agg.truncated = i + 1 < config.particle_count;
      break;
    }
  }
  return agg;
}

void write_pbm(std::ostream& out, const Aggregate& aggregate) {
  const int n = aggregate.lattice_size();
  out << "P1\n" << n << ' ' << n << '\n';
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      out << (aggregate.occupied(x, y) ? '1' : '0') << (x + 1 < n ? " " : "");
    }
    out << '\n';
  }
}

}  // namespace veinforge
