#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "veinforge/network.hpp"

namespace veinforge {

/// Thrown when the positive-conductivity subgraph no longer links source and sink.
class DisconnectedNetwork : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MeshEdge {
  int a = 0;
  int b = 0;
  double length = 0.0;
  bool operator==(const MeshEdge&) const = default;
};

/// Flux injection point: `share` is the signed fraction of total_flux
/// entering the mesh there (negative for a sink).
struct Terminal {
  int node = 0;
  double share = 0.0;
  bool operator==(const Terminal&) const = default;
};

/// Triangulated transport mesh. Node 0 is the source (top midpoint),
/// node 1 the sink (bottom midpoint). Extra boundary terminals, when present,
/// follow as nodes 2, 3, ...; the sink is the pressure reference.
struct MeshGraph {
  std::vector<Point> nodes;
  std::vector<MeshEdge> edges;
  int source = 0;
  int sink = 1;
  std::vector<Terminal> terminals;
  bool operator==(const MeshGraph&) const = default;

  /// Terminal list with the source/sink pair first; shares sum to zero.
  std::vector<Terminal> all_terminals() const;
};

struct FlowState {
  std::vector<double> conductivities;  // per edge
  std::vector<double> pressures;       // per node, sink held at 0
  std::vector<double> flows;           // per edge, signed a -> b
};

/// Monotone flux response f with f(0) = 0.
struct FluxResponse {
  enum class Kind { Saturating, Linear };
  Kind kind = Kind::Saturating;
  double exponent = 1.0;

  double operator()(double q) const;

  static FluxResponse saturating(double mu = 1.0) { return {Kind::Saturating, mu}; }
  static FluxResponse linear() { return {Kind::Linear, 1.0}; }
};

struct PhysarumConfig {
  int node_count = 300;
  int iterations = 500;
  double dt = 0.05;
  FluxResponse flux_response = FluxResponse::saturating();
  /// Edges with D below this fraction of max(D) are dropped at extraction.
  double extraction_fraction = 0.05;
  double total_flux = 1.0;
  double initial_conductivity_min = 0.5;
  double initial_conductivity_max = 1.0;
  /// Additional source/sink pairs placed on the ROI border. Each pair carries
  /// a share of total_flux drawn from [0.3, 1.0].
  int extra_terminal_pairs = 3;
  /// Stroke radius (px at 128 reference) given to the strongest edge.
  double max_radius = 2.5;
  std::uint64_t rng_seed = 0;

  static constexpr int kMinIterations = 350;
  static constexpr int kMaxIterations = 700;

  /// Default config with the iteration count drawn uniformly in [350, 700].
  static PhysarumConfig with_drawn_iterations(std::uint64_t seed);

  void validate() const;
};

MeshGraph build_mesh(int node_count, std::uint64_t rng_seed, int extra_terminal_pairs = 0);

/// Triangulates the given points; node 0 becomes the source and node 1 the sink.
MeshGraph build_mesh_from_points(std::span<const Point> points);

/// Kirchhoff pressure solve: each terminal injects share * total_flux
/// (+total_flux at the source and -total_flux at the sink for a plain mesh).
FlowState solve_flows(const MeshGraph& mesh, std::span<const double> conductivities,
                      double total_flux);

/// Signed net outflow at each node for the given state.
std::vector<double> node_residuals(const MeshGraph& mesh, const FlowState& state);

/// One explicit Euler step of dD/dt = f(|Q|) - D, clamped at zero.
FlowState update_conductivity(const FlowState& state, double dt, const FluxResponse& response);

/// Called after each flow solve with the step index and the solved state.
using PhysarumObserver = std::function<void(int, const MeshGraph&, const FlowState&)>;

struct PhysarumResult {
  MeshGraph mesh;
  FlowState state;  // conductivities after the final update, flows of the final solve
  VeinNetwork network;
};

PhysarumResult simulate_physarum(const PhysarumConfig& config, const PhysarumObserver& observer = {});

/// Runs the adaptation loop and extracts the source-sink component of the
/// edges whose conductivity survives the extraction threshold.
VeinNetwork run_physarum(const PhysarumConfig& config);

}  // namespace veinforge
