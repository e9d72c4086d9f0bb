#include "veinforge/physarum.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "veinforge/delaunay.hpp"
#include "veinforge/random.hpp"

namespace veinforge {

double FluxResponse::operator()(double q) const {
  const double a = std::abs(q);
  if (kind == Kind::Linear) return a;
  const double s = exponent == 1.0 ? a : std::pow(a, exponent);
  return s / (1.0 + s);
}

PhysarumConfig PhysarumConfig::with_drawn_iterations(std::uint64_t seed) {
  PhysarumConfig cfg;
  cfg.rng_seed = seed;
  Rng rng(derive_seed(seed, 0x17e7));
  cfg.iterations = static_cast<int>(rng.uniform_int(kMinIterations, kMaxIterations));
  return cfg;
}

void PhysarumConfig::validate() const {
  if (node_count < 4) throw std::invalid_argument("physarum: node_count must be >= 4");
  if (iterations < 0) throw std::invalid_argument("physarum: iterations must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("physarum: dt must be > 0");
  if (!(extraction_fraction > 0.0)) throw std::invalid_argument("physarum: extraction threshold must be > 0");
  if (extra_terminal_pairs < 0) throw std::invalid_argument("physarum: extra_terminal_pairs must be >= 0");
  if (!(total_flux > 0.0)) throw std::invalid_argument("physarum: total_flux must be > 0");
  if (!(initial_conductivity_min > 0.0) || initial_conductivity_max < initial_conductivity_min) {
    throw std::invalid_argument("physarum: bad initial conductivity range");
  }
}

namespace {

bool mesh_connected(const MeshGraph& mesh) {
  const int n = static_cast<int>(mesh.nodes.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : mesh.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

MeshGraph triangulate(std::span<const Point> points) {
  MeshGraph mesh;
  mesh.nodes.assign(points.begin(), points.end());
  const auto tris = delaunay_triangulate(points);
  for (const auto& [a, b] : triangle_edges(tris)) {
    mesh.edges.push_back({a, b, distance(points[a], points[b])});
  }
  return mesh;
}

constexpr int kMeshRetries = 8;

}  // namespace

MeshGraph build_mesh_from_points(std::span<const Point> points) {
  if (points.size() < 3) throw std::invalid_argument("mesh needs at least 3 points");
  std::vector<Point> pts(points.begin(), points.end());
  Rng rng(0x5eedULL ^ pts.size());
  for (int attempt = 0; attempt <= kMeshRetries; ++attempt) {
    MeshGraph mesh = triangulate(pts);
    if (!mesh.edges.empty() && mesh_connected(mesh)) return mesh;
    // Degenerate (collinear) input: jitter interior points and try again,
    // doubling the amplitude so near-collinear sets open up quickly.
    const double amp = 1e-3 * std::ldexp(1.0, attempt);
    for (std::size_t i = 2; i < pts.size(); ++i) {
      pts[i].x = std::clamp(pts[i].x + rng.uniform(-amp, amp), 0.0, 1.0);
      pts[i].y = std::clamp(pts[i].y + rng.uniform(-amp, amp), 0.0, 1.0);
    }
  }
  throw std::runtime_error("mesh triangulation degenerate after " + std::to_string(kMeshRetries) +
                           " retries");
}

std::vector<Terminal> MeshGraph::all_terminals() const {
  std::vector<Terminal> out{{source, 1.0}, {sink, -1.0}};
  out.insert(out.end(), terminals.begin(), terminals.end());
  return out;
}

namespace {

// Point on one side of the unit square: 0 left, 1 right, 2 top, 3 bottom.
Point border_point(int side, double t) {
  switch (side) {
    case 0: return {0.0, t};
    case 1: return {1.0, t};
    case 2: return {t, 1.0};
    default: return {t, 0.0};
  }
}

}  // namespace

MeshGraph build_mesh(int node_count, std::uint64_t rng_seed, int extra_terminal_pairs) {
  if (node_count < 4) throw std::invalid_argument("build_mesh: node_count must be >= 4");
  if (extra_terminal_pairs < 0) throw std::invalid_argument("build_mesh: negative terminal pair count");
  Rng rng(derive_seed(rng_seed, 0x3e54));
  std::vector<Point> pts;
  pts.reserve(node_count + 2 + 2 * extra_terminal_pairs);
  pts.push_back({0.5, 1.0});
  pts.push_back({0.5, 0.0});
  std::vector<Terminal> extra;
  for (int k = 0; k < extra_terminal_pairs; ++k) {
    // Source and sink sit on opposite sides so every pair crosses the ROI.
    const int side = static_cast<int>(rng.uniform_int(0, 3));
    const int opposite = side ^ 1;
    const double share = rng.uniform(0.3, 1.0);
    extra.push_back({static_cast<int>(pts.size()), share});
    pts.push_back(border_point(side, rng.uniform(0.1, 0.9)));
    extra.push_back({static_cast<int>(pts.size()), -share});
    pts.push_back(border_point(opposite, rng.uniform(0.1, 0.9)));
  }
  for (int i = 0; i < node_count; ++i) pts.push_back({rng.uniform(), rng.uniform()});
  MeshGraph mesh = build_mesh_from_points(pts);
  mesh.terminals = std::move(extra);
  return mesh;
}

FlowState solve_flows(const MeshGraph& mesh, std::span<const double> conductivities,
                      double total_flux) {
  const int n = static_cast<int>(mesh.nodes.size());
  if (conductivities.size() != mesh.edges.size()) {
    throw std::invalid_argument("solve_flows: one conductivity per edge required");
  }
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
    if (conductivities[k] < 0.0) throw std::invalid_argument("solve_flows: negative conductivity");
    if (conductivities[k] > 0.0) {
      adj[mesh.edges[k].a].emplace_back(mesh.edges[k].b, static_cast<int>(k));
      adj[mesh.edges[k].b].emplace_back(mesh.edges[k].a, static_cast<int>(k));
    }
  }

  // Only the component attached to the sink carries flow; the rest is left at p = 0.
  std::vector<int> unknown(n, -1);
  std::vector<char> reached(n, 0);
  std::queue<int> frontier;
  frontier.push(mesh.sink);
  reached[mesh.sink] = 1;
  int m = 0;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    if (u != mesh.sink) unknown[u] = m++;
    for (auto [v, k] : adj[u]) {
      if (!reached[v]) {
        reached[v] = 1;
        frontier.push(v);
      }
    }
  }
  const auto terminals = mesh.all_terminals();
  for (const auto& t : terminals) {
    if (!reached[t.node]) {
      throw DisconnectedNetwork("disconnected network: no positive-conductivity path from terminal " +
                                std::to_string(t.node) + " to the sink");
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * mesh.edges.size());
  for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
    const auto& e = mesh.edges[k];
    if (conductivities[k] <= 0.0 || !reached[e.a]) continue;
    const double g = conductivities[k] / e.length;
    const int ia = unknown[e.a];
    const int ib = unknown[e.b];
    if (ia >= 0) triplets.emplace_back(ia, ia, g);
    if (ib >= 0) triplets.emplace_back(ib, ib, g);
    if (ia >= 0 && ib >= 0) {
      triplets.emplace_back(ia, ib, -g);
      triplets.emplace_back(ib, ia, -g);
    }
  }
  Eigen::SparseMatrix<double> lap(m, m);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (const auto& t : terminals) {
    if (unknown[t.node] >= 0) rhs[unknown[t.node]] += t.share * total_flux;
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
  if (solver.info() != Eigen::Success) {
    throw DisconnectedNetwork("disconnected network: singular conservation system");
  }
  Eigen::VectorXd p = solver.solve(rhs);
  // One refinement sweep keeps the conservation residual at round-off level.
  const Eigen::VectorXd r = rhs - lap * p;
  p += solver.solve(r);

  FlowState state;
  state.conductivities.assign(conductivities.begin(), conductivities.end());
  state.pressures.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (unknown[i] >= 0) state.pressures[i] = p[unknown[i]];
  }
  state.flows.assign(mesh.edges.size(), 0.0);
  for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
    const auto& e = mesh.edges[k];
    state.flows[k] = conductivities[k] * (state.pressures[e.a] - state.pressures[e.b]) / e.length;
  }
  return state;
}

std::vector<double> node_residuals(const MeshGraph& mesh, const FlowState& state) {
  std::vector<double> out(mesh.nodes.size(), 0.0);
  for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
    out[mesh.edges[k].a] += state.flows[k];
    out[mesh.edges[k].b] -= state.flows[k];
  }
  return out;
}

FlowState update_conductivity(const FlowState& state, double dt, const FluxResponse& response) {
  if (!(dt > 0.0)) throw std::invalid_argument("update_conductivity: dt must be > 0");
  FlowState next = state;
  for (std::size_t k = 0; k < next.conductivities.size(); ++k) {
    const double d = state.conductivities[k];
    next.conductivities[k] = std::max(0.0, d + dt * (response(state.flows[k]) - d));
  }
  return next;
}

namespace {

VeinNetwork extract_network(const PhysarumConfig& config, const MeshGraph& mesh,
                            const FlowState& state) {
  const auto& d = state.conductivities;
  const double dmax = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
  if (!(dmax > 0.0)) throw DisconnectedNetwork("disconnected network: all conductivities vanished");
  const double threshold = config.extraction_fraction * dmax;

  const int n = static_cast<int>(mesh.nodes.size());
  std::vector<std::vector<int>> adj(n);
  for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
    if (d[k] < threshold) continue;
    adj[mesh.edges[k].a].push_back(static_cast<int>(k));
    adj[mesh.edges[k].b].push_back(static_cast<int>(k));
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack;
  for (const auto& t : mesh.all_terminals()) {
    if (!seen[t.node]) {
      seen[t.node] = 1;
      stack.push_back(t.node);
    }
  }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int k : adj[u]) {
      const int v = mesh.edges[k].a == u ? mesh.edges[k].b : mesh.edges[k].a;
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  {
    std::vector<char> linked(n, 0);
    std::vector<int> todo{mesh.source};
    linked[mesh.source] = 1;
    while (!todo.empty()) {
      const int u = todo.back();
      todo.pop_back();
      for (int k : adj[u]) {
        const int v = mesh.edges[k].a == u ? mesh.edges[k].b : mesh.edges[k].a;
        if (!linked[v]) {
          linked[v] = 1;
          todo.push_back(v);
        }
      }
    }
    if (mesh.terminals.empty() && !linked[mesh.sink]) {
      throw DisconnectedNetwork("disconnected network: extraction removed the source-sink path");
    }
    // With extra terminals the source may drain into any sink; each terminal
    // still has to keep a vessel.
    for (const auto& t : mesh.all_terminals()) {
      if (adj[t.node].empty()) {
        throw DisconnectedNetwork("disconnected network: terminal " + std::to_string(t.node) +
                                  " lost every vessel at extraction");
      }
    }
  }

  VeinNetwork net;
  std::vector<int> remap(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!seen[i]) continue;
    remap[i] = static_cast<int>(net.nodes.size());
    net.nodes.push_back(mesh.nodes[i]);
  }
  net.source = remap[mesh.source];
  net.sink = remap[mesh.sink];
  for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
    const auto& e = mesh.edges[k];
    if (d[k] < threshold || !seen[e.a]) continue;
    VeinEdge ve;
    ve.a = remap[e.a];
    ve.b = remap[e.b];
    ve.conductivity = d[k];
    ve.flow = state.flows[k];
    ve.radius = config.max_radius * std::pow(d[k] / dmax, 0.25);
    net.edges.push_back(ve);
  }
  return net;
}

}  // namespace

PhysarumResult simulate_physarum(const PhysarumConfig& config, const PhysarumObserver& observer) {
  config.validate();
  PhysarumResult result;
  result.mesh = build_mesh(config.node_count, config.rng_seed, config.extra_terminal_pairs);

  Rng rng(derive_seed(config.rng_seed, 0xc0d0));
  std::vector<double> d(result.mesh.edges.size());
  for (double& v : d) v = rng.uniform(config.initial_conductivity_min, config.initial_conductivity_max);

  FlowState state = solve_flows(result.mesh, d, config.total_flux);
  for (int step = 0; step < config.iterations; ++step) {
    if (observer) observer(step, result.mesh, state);
    state = update_conductivity(state, config.dt, config.flux_response);
    state = solve_flows(result.mesh, state.conductivities, config.total_flux);
  }
  if (observer) observer(config.iterations, result.mesh, state);
  result.network = extract_network(config, result.mesh, state);
  result.state = std::move(state);
  return result;
}

VeinNetwork run_physarum(const PhysarumConfig& config) {
  return simulate_physarum(config).network;
}

}  // namespace veinforge
