#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "veinforge/network.hpp"

namespace veinforge {

/// Bowyer-Watson triangulation. Returns triangles as index triples.
/// An all-collinear input yields no triangles.
std::vector<std::array<int, 3>> delaunay_triangulate(std::span<const Point> points);

/// Unique undirected edges (i < j) of a triangle list, sorted.
std::vector<std::pair<int, int>> triangle_edges(std::span<const std::array<int, 3>> triangles);

}  // namespace veinforge
