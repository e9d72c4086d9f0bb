#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace veinforge {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

/// Undirected vessel segment. `radius` is in pixels at the 128 px reference
/// raster; renderers scale it with the output size.
struct VeinEdge {
  int a = 0;
  int b = 0;
  double conductivity = 0.0;
  double flow = 0.0;
  double radius = 1.0;
  bool operator==(const VeinEdge&) const = default;
};

/// Planar vessel graph over the unit-square ROI. y = 1 is the top (distal) edge.
struct VeinNetwork {
  std::vector<Point> nodes;
  std::vector<VeinEdge> edges;
  int source = -1;
  int sink = -1;
  bool operator==(const VeinNetwork&) const = default;
};

/// Rooted tree stored by parent links. Node i > 0 hangs from parent[i] by a
/// segment of radius radius[i]; the root has parent -1.
struct VeinTree {
  std::vector<Point> nodes;
  std::vector<int> parent;
  std::vector<double> radius;
  bool operator==(const VeinTree&) const = default;

  std::size_t size() const { return nodes.size(); }
  int add_node(Point p, int parent_index, double r = 0.0);
  std::vector<std::vector<int>> children() const;
  VeinNetwork to_network() const;
};

/// Line-oriented text dump: `N x y` per node then `E i j D r` per edge.
void write_graph(std::ostream& out, const VeinNetwork& network);
VeinNetwork read_graph(std::istream& in);

}  // namespace veinforge
