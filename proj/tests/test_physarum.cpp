#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <functional>
#include <sstream>

#include "oracles.hpp"
#include "veinforge/physarum.hpp"
#include "veinforge/random.hpp"

using namespace veinforge;

namespace {

MeshGraph line_mesh(std::vector<Point> pts, std::vector<std::pair<int, int>> pairs) {
  MeshGraph m;
  m.nodes = std::move(pts);
  for (auto [a, b] : pairs) m.edges.push_back({a, b, distance(m.nodes[a], m.nodes[b])});
  return m;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("mesh terminals sit at the top and bottom midpoints") {
  const MeshGraph m = build_mesh(40, 11);
  CHECK(m.nodes[m.source] == Point{0.5, 1.0});
  CHECK(m.nodes[m.sink] == Point{0.5, 0.0});
  CHECK(m.nodes.size() == 42);
}

TEST_CASE("mesh invariants: lengths, no loops or duplicates, connectivity") {
  for (int n : {4, 20, 120}) {
    const MeshGraph m = build_mesh(n, 1234 + n);
    std::set<std::pair<int, int>> seen;
    for (const auto& e : m.edges) {
      CHECK(e.a != e.b);
      CHECK(seen.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second);
      CHECK(e.length == doctest::Approx(distance(m.nodes[e.a], m.nodes[e.b])).epsilon(1e-15));
      CHECK(e.length > 0.0);
    }
    for (const auto& p : m.nodes) {
      CHECK(p.x >= 0.0);
      CHECK(p.x <= 1.0);
      CHECK(p.y >= 0.0);
      CHECK(p.y <= 1.0);
    }
    // Connectivity by union-find.
    std::vector<int> parent(m.nodes.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& e : m.edges) parent[find(e.a)] = find(e.b);
    const int root = find(0);
    for (std::size_t i = 0; i < parent.size(); ++i) CHECK(find(static_cast<int>(i)) == root);
  }
}

TEST_CASE("mesh construction is deterministic in the seed") {
  CHECK(build_mesh(60, 5) == build_mesh(60, 5));
  CHECK_FALSE(build_mesh(60, 5) == build_mesh(60, 6));
  CHECK(build_mesh(60, 5, 3) == build_mesh(60, 5, 3));
}

TEST_CASE("collinear input is perturbed rather than rejected") {
  std::vector<Point> pts{{0.5, 1.0}, {0.5, 0.0}, {0.5, 0.3}, {0.5, 0.6}};
  const MeshGraph m = build_mesh_from_points(pts);
  CHECK(m.nodes.size() == 4);
  CHECK(m.edges.size() >= 3);
}

TEST_CASE("single edge behaves like a unit resistor") {
  MeshGraph m = line_mesh({{0.0, 1.0}, {0.0, 0.0}}, {{0, 1}});
  const FlowState s = solve_flows(m, std::vector<double>{1.0}, 1.0);
  CHECK(s.pressures[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.pressures[1] == 0.0);
  CHECK(s.flows[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two identical parallel paths split the flux evenly") {
  // Source and sink joined through two mirror-image midpoints.
  MeshGraph m = line_mesh({{0.5, 1.0}, {0.5, 0.0}, {0.2, 0.5}, {0.8, 0.5}},
                          {{0, 2}, {2, 1}, {0, 3}, {3, 1}});
  const FlowState s = solve_flows(m, std::vector<double>(4, 1.0), 2.0);
  CHECK(s.flows[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.flows[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sparse Kirchhoff solve matches a dense elimination oracle") {
  for (std::uint64_t seed : {3u, 17u, 99u}) {
    const MeshGraph m = build_mesh(18, seed);  // 20 nodes with terminals
    Rng rng(seed);
    std::vector<double> d(m.edges.size());
    for (auto& v : d) v = rng.uniform(0.1, 2.0);
    const FlowState s = solve_flows(m, d, 1.0);

    // Reduced Laplacian without the sink row/column.
    const int n = static_cast<int>(m.nodes.size());
    std::vector<int> map(n, -1);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (i != m.sink) map[i] = k++;
    }
    std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k, 0.0);
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      const double g = d[e] / m.edges[e].length;
      const int i = map[m.edges[e].a], j = map[m.edges[e].b];
      if (i >= 0) a[i][i] += g;
      if (j >= 0) a[j][j] += g;
      if (i >= 0 && j >= 0) {
        a[i][j] -= g;
        a[j][i] -= g;
      }
    }
    b[map[m.source]] = 1.0;
    const auto p = oracle::dense_solve(a, b);
    for (int i = 0; i < n; ++i) {
      const double expect = i == m.sink ? 0.0 : p[map[i]];
      CHECK(s.pressures[i] == doctest::Approx(expect).epsilon(1e-9));
    }
    const auto r = node_residuals(m, s);
    for (int i = 0; i < n; ++i) {
      if (i == m.source || i == m.sink) continue;
      CHECK(std::abs(r[i]) <= 1e-9);
    }
    CHECK(r[m.source] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r[m.sink] == doctest::Approx(-1.0).epsilon(1e-9));
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      const auto& ed = m.edges[e];
      const double q = d[e] * (s.pressures[ed.a] - s.pressures[ed.b]) / ed.length;
      CHECK(s.flows[e] == doctest::Approx(q).epsilon(1e-12));
    }
  }
}

TEST_CASE("extra terminals inject their shares") {
  const MeshGraph m = build_mesh(60, 8, 2);
  const auto terms = m.all_terminals();
  REQUIRE(terms.size() == 6);
  double total = 0.0;
  for (const auto& t : terms) total += t.share;
  CHECK(std::abs(total) < 1e-12);
  const FlowState s = solve_flows(m, std::vector<double>(m.edges.size(), 1.0), 1.0);
  const auto r = node_residuals(m, s);
  std::vector<double> expect(m.nodes.size(), 0.0);
  for (const auto& t : terms) expect[t.node] += t.share;
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(expect[i]).epsilon(1e-9));
}

TEST_CASE("zero-conductivity cut raises a disconnected-network error") {
  MeshGraph m = line_mesh({{0.5, 1.0}, {0.5, 0.0}, {0.5, 0.5}}, {{0, 2}, {2, 1}});
  CHECK_THROWS_AS(solve_flows(m, std::vector<double>{1.0, 0.0}, 1.0), DisconnectedNetwork);
}

TEST_CASE("conductivity update: fixed points, decay and clamping") {
  const auto lin = FluxResponse::linear();
  SUBCASE("stationary point D = |Q|") {
    FlowState s{{1.0}, {1.0, 0.0}, {1.0}};
    CHECK(update_conductivity(s, 0.1, lin).conductivities[0] == 1.0);
  }
  SUBCASE("held flux 2 converges to D = 2") {
    FlowState s{{0.0}, {0.0, 0.0}, {2.0}};
    for (int i = 0; i < 2000; ++i) {
      s = update_conductivity(s, 0.05, lin);
      s.flows = {2.0};
    }
    CHECK(s.conductivities[0] == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("zero flux decays geometrically") {
    FlowState s{{1.0}, {0.0, 0.0}, {0.0}};
    for (int i = 1; i <= 10; ++i) {
      s = update_conductivity(s, 0.1, lin);
      CHECK(s.conductivities[0] == doctest::Approx(std::pow(0.9, i)).epsilon(1e-12));
    }
  }
  SUBCASE("large steps clamp at zero") {
    FlowState s{{1.0}, {0.0, 0.0}, {0.0}};
    CHECK(update_conductivity(s, 5.0, lin).conductivities[0] == 0.0);
  }
  SUBCASE("saturating response") {
    const auto sat = FluxResponse::saturating();
    CHECK(sat(0.0) == 0.0);
    CHECK(sat(1.0) == doctest::Approx(0.5));
    CHECK(sat(-3.0) == doctest::Approx(0.75));
  }
}

TEST_CASE("drawn iteration counts stay in [350, 700]") {
  int lo = 1000, hi = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const int it = PhysarumConfig::with_drawn_iterations(s).iterations;
    lo = std::min(lo, it);
    hi = std::max(hi, it);
  }
  CHECK(lo >= 350);
  CHECK(hi <= 700);
  CHECK(hi - lo > 300);
}

TEST_CASE("invalid configurations are rejected") {
  PhysarumConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.node_count = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.extraction_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("linear response reaches the D = |Q| fixed point") {
  PhysarumConfig c;
  c.node_count = 40;
  c.extra_terminal_pairs = 0;
  c.flux_response = FluxResponse::linear();
  c.dt = 0.05;
  c.iterations = 3000;
  c.rng_seed = 21;
  double worst_residual = 0.0;
  const auto r = simulate_physarum(c, [&](int, const MeshGraph& m, const FlowState& s) {
    const auto res = node_residuals(m, s);
    for (std::size_t i = 0; i < res.size(); ++i) {
      if (static_cast<int>(i) == m.source || static_cast<int>(i) == m.sink) continue;
      worst_residual = std::max(worst_residual, std::abs(res[i]));
    }
  });
  CHECK(worst_residual <= 1e-9);
  const double dmax = max_abs(r.state.conductivities);
  for (std::size_t e = 0; e < r.state.conductivities.size(); ++e) {
    const double d = r.state.conductivities[e];
    if (d < c.extraction_fraction * dmax) continue;
    CHECK(std::abs(d - std::abs(r.state.flows[e])) <= 1e-3 * dmax);
  }
}

TEST_CASE("conductivities stay non-negative through the run") {
  PhysarumConfig c;
  c.node_count = 60;
  c.iterations = 200;
  c.dt = 0.5;
  c.rng_seed = 4;
  bool ok = true;
  simulate_physarum(c, [&](int, const MeshGraph&, const FlowState& s) {
    for (double d : s.conductivities) ok = ok && d >= 0.0;
  });
  CHECK(ok);
}

TEST_CASE("longer adaptation never keeps more edges") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    PhysarumConfig c;
    c.rng_seed = seed;
    c.node_count = 150;
    c.iterations = 350;
    const auto early = run_physarum(c);
    c.iterations = 700;
    const auto late = run_physarum(c);
    CHECK(late.edges.size() <= early.edges.size());
  }
}

TEST_CASE("run_physarum is deterministic and links the terminals") {
  PhysarumConfig c = PhysarumConfig::with_drawn_iterations(77);
  c.node_count = 120;
  const VeinNetwork a = run_physarum(c);
  const VeinNetwork b = run_physarum(c);
  CHECK(a == b);
  REQUIRE_FALSE(a.edges.empty());
  CHECK(a.source >= 0);
  CHECK(a.sink >= 0);
  for (const auto& e : a.edges) {
    CHECK(e.radius > 0.0);
    CHECK(e.radius <= c.max_radius + 1e-12);
  }
}

TEST_CASE("single-pair extraction keeps a source-to-sink path") {
  PhysarumConfig c;
  c.extra_terminal_pairs = 0;
  c.node_count = 100;
  c.rng_seed = 9;
  const VeinNetwork n = run_physarum(c);
  std::vector<std::vector<int>> adj(n.nodes.size());
  for (const auto& e : n.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<char> seen(n.nodes.size(), 0);
  std::vector<int> stack{n.source};
  seen[n.source] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  CHECK(seen[n.sink]);
}

TEST_CASE("graph dump round-trips") {
  PhysarumConfig c;
  c.node_count = 50;
  c.iterations = 100;
  c.rng_seed = 3;
  const VeinNetwork n = run_physarum(c);
  std::stringstream ss;
  write_graph(ss, n);
  const VeinNetwork back = read_graph(ss);
  REQUIRE(back.nodes.size() == n.nodes.size());
  REQUIRE(back.edges.size() == n.edges.size());
  for (std::size_t i = 0; i < n.edges.size(); ++i) {
    CHECK(back.edges[i].a == n.edges[i].a);
    CHECK(back.edges[i].b == n.edges[i].b);
    CHECK(back.edges[i].radius == doctest::Approx(n.edges[i].radius).epsilon(1e-9));
  }
}
