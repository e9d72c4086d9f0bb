#include "veinforge/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "veinforge/raster.hpp"

namespace veinforge {

std::vector<std::uint8_t> thin(std::vector<std::uint8_t> m, int w, int h) {
  auto at = [&](int x, int y) -> int {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0 : m[static_cast<std::size_t>(y) * w + x];
  };
  std::vector<int> doomed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      doomed.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!at(x, y)) continue;
          const int p2 = at(x, y - 1), p3 = at(x + 1, y - 1), p4 = at(x + 1, y);
          const int p5 = at(x + 1, y + 1), p6 = at(x, y + 1), p7 = at(x - 1, y + 1);
          const int p8 = at(x - 1, y), p9 = at(x - 1, y - 1);
          const int neighbours = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (neighbours < 2 || neighbours > 6) continue;
          const int ring[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
          int transitions = 0;
          for (int k = 0; k < 8; ++k) transitions += !ring[k] && ring[k + 1];
          if (transitions != 1) continue;
          const bool keep = sub == 0 ? ((p2 && p4 && p6) || (p4 && p6 && p8))
                                   : ((p2 && p4 && p8) || (p2 && p6 && p8));
          if (keep) continue;
          doomed.push_back(y * w + x);
        }
      }
      for (int i : doomed) m[i] = 0;
      changed = changed || !doomed.empty();
    }
  }
  return m;
}

VeinMap vein_map(const GrayImage& image, const VeinMapParams& params) {
  const int w = image.width(), h = image.height();
  const GrayImage local = box_blur(image, params.local_radius, 1);
  const GrayImage background = box_blur(image, params.background_radius, 2);
  std::vector<std::uint8_t> mask(image.size(), 0);
  for (int y = params.border; y < h - params.border; ++y) {
    for (int x = params.border; x < w - params.border; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      mask[i] = local.pixels()[i] < background.pixels()[i] - params.darkness;
    }
  }
  VeinMap map{w, h, thin(std::move(mask), w, h), {}};
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    if (map.cells[i]) map.on.push_back(static_cast<int>(i));
  }
  return map;
}

namespace {

// Count of set cells of `m` inside [x0, x1) x [y0, y1) via a summed-area table.
class Integral {
 public:
  explicit Integral(const VeinMap& m) : w_(m.width), table_(static_cast<std::size_t>(m.width + 1) * (m.height + 1), 0) {
    for (int y = 0; y < m.height; ++y) {
      int row = 0;
      for (int x = 0; x < m.width; ++x) {
        row += m.cells[static_cast<std::size_t>(y) * m.width + x];
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }
  int count(int x0, int y0, int x1, int y1) const {
    return get(x1, y1) - get(x0, y1) - get(x1, y0) + get(x0, y0);
  }

 private:
  int& at(int x, int y) { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  int get(int x, int y) const { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  int w_;
  std::vector<int> table_;
};

}  // namespace

double map_similarity(const VeinMap& a, const VeinMap& b, int max_shift) {
  if (a.width != b.width || a.height != b.height) throw std::invalid_argument("similarity: map sizes differ");
  if (a.on.empty() || b.on.empty()) return 0.0;
  const int w = a.width, h = a.height;
  const Integral ia(a), ib(b);
  double best = 0.0;
  // Shift (sx, sy) pairs a(x, y) with b(x + sx, y + sy) over the overlap.
  for (int sy = -max_shift; sy <= max_shift; ++sy) {
    for (int sx = -max_shift; sx <= max_shift; ++sx) {
      const int x0 = std::max(0, -sx), x1 = std::min(w, w - sx);
      const int y0 = std::max(0, -sy), y1 = std::min(h, h - sy);
      if (x1 <= x0 || y1 <= y0) continue;
      const double n = static_cast<double>(x1 - x0) * (y1 - y0);
      const double sa = ia.count(x0, y0, x1, y1);
      const double sb = ib.count(x0 + sx, y0 + sy, x1 + sx, y1 + sy);
      if (sa == 0.0 || sb == 0.0 || sa == n || sb == n) continue;
      double sab = 0.0;
      for (int i : a.on) {
        const int x = i % w, y = i / w;
        if (x < x0 || x >= x1 || y < y0 || y >= y1) continue;
        sab += b.cells[static_cast<std::size_t>(y + sy) * w + (x + sx)];
      }
      const double cov = sab - sa * sb / n;
      const double var = (sa - sa * sa / n) * (sb - sb * sb / n);
      best = std::max(best, cov / std::sqrt(var));
    }
  }
  return std::clamp(best, 0.0, 1.0);
}

double similarity_score(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument("similarity_score: image dimensions differ");
  }
  return map_similarity(vein_map(a), vein_map(b));
}

}  // namespace veinforge
