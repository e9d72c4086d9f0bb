#include "veinforge/network.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace veinforge {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

int VeinTree::add_node(Point p, int parent_index, double r) {
  nodes.push_back(p);
  parent.push_back(parent_index);
  radius.push_back(r);
  return static_cast<int>(nodes.size()) - 1;
}

std::vector<std::vector<int>> VeinTree::children() const {
  std::vector<std::vector<int>> out(nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (parent[i] >= 0) out[parent[i]].push_back(static_cast<int>(i));
  }
  return out;
}

VeinNetwork VeinTree::to_network() const {
  VeinNetwork net;
  net.nodes = nodes;
  net.source = nodes.empty() ? -1 : 0;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (parent[i] < 0) continue;
    VeinEdge e;
    e.a = parent[i];
    e.b = static_cast<int>(i);
    e.radius = radius[i];
    e.conductivity = std::pow(radius[i], 4.0);
    net.edges.push_back(e);
  }
  return net;
}

void write_graph(std::ostream& out, const VeinNetwork& network) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (const auto& p : network.nodes) buf << "N " << p.x << ' ' << p.y << '\n';
  for (const auto& e : network.edges) {
    buf << "E " << e.a << ' ' << e.b << ' ' << e.conductivity << ' ' << e.radius << '\n';
  }
  out << buf.str();
}

VeinNetwork read_graph(std::istream& in) {
  VeinNetwork net;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    char tag = 0;
    ls >> tag;
    if (tag == 'N') {
      Point p;
      if (!(ls >> p.x >> p.y)) throw std::runtime_error("bad node record at line " + std::to_string(lineno));
      net.nodes.push_back(p);
    } else if (tag == 'E') {
      VeinEdge e;
      if (!(ls >> e.a >> e.b >> e.conductivity >> e.radius)) {
        throw std::runtime_error("bad edge record at line " + std::to_string(lineno));
      }
      net.edges.push_back(e);
    } else {
      throw std::runtime_error("unknown record at line " + std::to_string(lineno));
    }
  }
  const int n = static_cast<int>(net.nodes.size());
  for (const auto& e : net.edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) throw std::runtime_error("edge references missing node");
  }
  return net;
}

}  // namespace veinforge
