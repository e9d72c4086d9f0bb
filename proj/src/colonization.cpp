#include "veinforge/colonization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "veinforge/random.hpp"

namespace veinforge {

void ColonizationConfig::validate() const {
  if (attractor_count < 1) throw std::invalid_argument("colonization: attractor_count must be >= 1");
  if (!(kill_distance > 0.0) || !(kill_distance < attraction_distance)) {
    throw std::invalid_argument("colonization: need 0 < kill_distance < attraction_distance");
  }
  if (!(segment_length > 0.0)) throw std::invalid_argument("colonization: segment_length must be > 0");
  if (root_position.x < 0.0 || root_position.x > 1.0 || root_position.y < 0.0 || root_position.y > 1.0) {
    throw std::invalid_argument("colonization: root must lie inside the unit square");
  }
  if (max_steps < 0) throw std::invalid_argument("colonization: max_steps must be >= 0");
  if (!(terminal_radius > 0.0)) throw std::invalid_argument("colonization: terminal_radius must be > 0");
}

std::vector<Point> scatter_attractors(const ColonizationConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.rng_seed, 0xa77c));
  std::vector<Point> pts(config.attractor_count);
  for (auto& p : pts) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  return pts;
}

namespace {

std::vector<Point> kill_reached(const VeinTree& tree, const std::vector<Point>& attractors,
                                double kill_distance, std::size_t first_node = 0) {
  std::vector<Point> kept;
  kept.reserve(attractors.size());
  for (const auto& a : attractors) {
    bool dead = false;
    for (std::size_t i = first_node; i < tree.nodes.size() && !dead; ++i) {
      dead = distance(a, tree.nodes[i]) < kill_distance;
    }
    if (!dead) kept.push_back(a);
  }
  return kept;
}

}  // namespace

GrowthState grow_step(const VeinTree& tree, const std::vector<Point>& attractors,
                      const ColonizationConfig& config) {
  if (tree.nodes.empty()) throw std::invalid_argument("grow_step: tree has no nodes");
  GrowthState next{tree, kill_reached(tree, attractors, config.kill_distance)};

  const std::size_t n = tree.nodes.size();
  std::vector<double> dx(n, 0.0), dy(n, 0.0);
  std::vector<int> influence(n, 0);
  std::vector<int> nearest(n, -1);  // closest influencing attractor per node
  std::vector<double> nearest_d(n, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < next.attractors.size(); ++k) {
    const Point& a = next.attractors[k];
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = distance(a, tree.nodes[i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    if (best < 0 || best_d > config.attraction_distance || best_d == 0.0) continue;
    dx[best] += (a.x - tree.nodes[best].x) / best_d;
    dy[best] += (a.y - tree.nodes[best].y) / best_d;
    ++influence[best];
    if (best_d < nearest_d[best]) {
      nearest_d[best] = best_d;
      nearest[best] = static_cast<int>(k);
    }
  }

  const auto kids = tree.children();
  auto step_toward = [&](std::size_t i, double ux, double uy) {
    const double len = std::hypot(ux, uy);
    if (len < 1e-12) return std::optional<Point>{};
    Point p{tree.nodes[i].x + config.segment_length * ux / len,
            tree.nodes[i].y + config.segment_length * uy / len};
    p.x = std::clamp(p.x, 0.0, 1.0);
    p.y = std::clamp(p.y, 0.0, 1.0);
    bool duplicate = distance(p, tree.nodes[i]) < 1e-12;
    for (int c : kids[i]) duplicate = duplicate || distance(p, tree.nodes[c]) < 1e-9;
    return duplicate ? std::optional<Point>{} : std::optional<Point>{p};
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!influence[i]) continue;
    auto p = step_toward(i, dx[i], dy[i]);
    if (!p) {
      // Pulls cancel, or the mean step repeats an existing child: head for
      // the closest attractor so the node cannot stall.
      const Point& a = next.attractors[static_cast<std::size_t>(nearest[i])];
      p = step_toward(i, a.x - tree.nodes[i].x, a.y - tree.nodes[i].y);
    }
    if (p) next.tree.add_node(*p, static_cast<int>(i));
  }

  if (next.tree.nodes.size() > n) {
    next.attractors = kill_reached(next.tree, next.attractors, config.kill_distance, n);
  }
  return next;
}

VeinTree assign_radii(const VeinTree& tree, double terminal_radius) {
  const int n = static_cast<int>(tree.nodes.size());
  if (static_cast<int>(tree.parent.size()) != n) throw std::invalid_argument("assign_radii: parent table size mismatch");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (tree.parent[i] < 0) ++roots;
    else if (tree.parent[i] >= n) throw std::invalid_argument("assign_radii: parent index out of range");
  }
  if (n > 0 && roots != 1) throw std::invalid_argument("assign_radii: tree must have exactly one root");

  // Depth-first order from the root; a node never reached sits on a cycle.
  const auto kids = tree.children();
  std::vector<int> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (tree.parent[i] >= 0) continue;
    std::vector<int> stack{i};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (int c : kids[u]) stack.push_back(c);
    }
  }
  if (static_cast<int>(order.size()) != n) throw std::invalid_argument("assign_radii: cycle detected");

  VeinTree out = tree;
  out.radius.assign(n, 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int u = *it;
    if (kids[u].empty()) {
      out.radius[u] = terminal_radius;
      continue;
    }
    double cubes = 0.0;
    for (int c : kids[u]) cubes += out.radius[c] * out.radius[c] * out.radius[c];
    out.radius[u] = std::cbrt(cubes);
  }
  return out;
}

GrowthState run_colonization_state(const ColonizationConfig& config) {
  config.validate();
  GrowthState state;
  state.tree.add_node(config.root_position, -1);
  state.attractors = scatter_attractors(config);
  for (int step = 0; step < config.max_steps && !state.attractors.empty(); ++step) {
    const std::size_t nodes_before = state.tree.size();
    const std::size_t attractors_before = state.attractors.size();
    state = grow_step(state.tree, state.attractors, config);
    if (state.tree.size() == nodes_before && state.attractors.size() == attractors_before) break;
  }
  state.tree = assign_radii(state.tree, config.terminal_radius);
  return state;
}

VeinTree run_colonization(const ColonizationConfig& config) {
  return run_colonization_state(config).tree;
}

}  // namespace veinforge
