#include "veinforge/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace veinforge {
namespace {

struct Triangle {
  std::array<int, 3> v;
  double cx, cy, r2;
};

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool make_triangle(const std::vector<Point>& pts, int a, int b, int c, Triangle& out) {
  const Point& pa = pts[a];
  const Point& pb = pts[b];
  const Point& pc = pts[c];
  const double d = 2.0 * orient(pa, pb, pc);
  if (std::abs(d) < 1e-18) return false;
  const double a2 = pa.x * pa.x + pa.y * pa.y;
  const double b2 = pb.x * pb.x + pb.y * pb.y;
  const double c2 = pc.x * pc.x + pc.y * pc.y;
  const double ux = (a2 * (pb.y - pc.y) + b2 * (pc.y - pa.y) + c2 * (pa.y - pb.y)) / d;
  const double uy = (a2 * (pc.x - pb.x) + b2 * (pa.x - pc.x) + c2 * (pb.x - pa.x)) / d;
  out.v = d > 0 ? std::array<int, 3>{a, b, c} : std::array<int, 3>{a, c, b};
  out.cx = ux;
  out.cy = uy;
  out.r2 = (pa.x - ux) * (pa.x - ux) + (pa.y - uy) * (pa.y - uy);
  return true;
}

}  // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(std::span<const Point> points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) return {};

  double minx = std::numeric_limits<double>::max(), miny = minx;
  double maxx = std::numeric_limits<double>::lowest(), maxy = maxx;
  for (const auto& p : points) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
    maxx = std::max(maxx, p.x);
    maxy = std::max(maxy, p.y);
  }
  const double span = std::max({maxx - minx, maxy - miny, 1e-9});
  const double mx = 0.5 * (minx + maxx);
  const double my = 0.5 * (miny + maxy);

  std::vector<Point> pts(points.begin(), points.end());
  pts.push_back({mx - 40.0 * span, my - 30.0 * span});
  pts.push_back({mx + 40.0 * span, my - 30.0 * span});
  pts.push_back({mx, my + 40.0 * span});

  std::vector<Triangle> tris;
  Triangle super{};
  make_triangle(pts, n, n + 1, n + 2, super);
  tris.push_back(super);

  std::vector<std::pair<int, int>> boundary;
  std::vector<char> bad;
  for (int i = 0; i < n; ++i) {
    const Point& p = pts[i];
    bad.assign(tris.size(), 0);
    boundary.clear();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const double dx = p.x - tris[t].cx;
      const double dy = p.y - tris[t].cy;
      if (dx * dx + dy * dy < tris[t].r2) bad[t] = 1;
    }
    // Hole boundary: edges of bad triangles not shared with another bad triangle.
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!bad[t]) continue;
      for (int k = 0; k < 3; ++k) {
        const int a = tris[t].v[k];
        const int b = tris[t].v[(k + 1) % 3];
        bool shared = false;
        for (std::size_t u = 0; u < tris.size() && !shared; ++u) {
          if (u == t || !bad[u]) continue;
          for (int m = 0; m < 3; ++m) {
            if (tris[u].v[m] == b && tris[u].v[(m + 1) % 3] == a) {
              shared = true;
              break;
            }
          }
        }
        if (!shared) boundary.emplace_back(a, b);
      }
    }
    std::vector<Triangle> kept;
    kept.reserve(tris.size() + boundary.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!bad[t]) kept.push_back(tris[t]);
    }
    for (const auto& [a, b] : boundary) {
      Triangle tri;
      if (make_triangle(pts, a, b, i, tri)) kept.push_back(tri);
    }
    tris = std::move(kept);
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    out.push_back(t.v);
  }
  return out;
}

std::vector<std::pair<int, int>> triangle_edges(std::span<const std::array<int, 3>> triangles) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(triangles.size() * 3);
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace veinforge
