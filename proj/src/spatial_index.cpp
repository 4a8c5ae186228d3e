#include "cdcache/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdcache::geometry {

GridIndex::GridIndex(std::span<const Point> points, Window window, double points_per_cell)
    : points_(points), window_(window) {
  const double n = static_cast<double>(points.size());
  cells_ = std::max(1, static_cast<int>(std::floor(std::sqrt(n / points_per_cell))));
  cells_ = std::min(cells_, 4096);
  cell_side_ = window.side / cells_;
  buckets_.assign(static_cast<std::size_t>(cells_) * cells_, {});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point p = window.wrap(points[i]);
    buckets_[static_cast<std::size_t>(cell_of(p.y)) * cells_ + cell_of(p.x)].push_back(static_cast<int>(i));
  }
}

int GridIndex::cell_of(double coord) const {
  int c = static_cast<int>(coord / cell_side_);
  return std::clamp(c, 0, cells_ - 1);
}

const std::vector<int>& GridIndex::bucket(int cx, int cy) const {
  cx = ((cx % cells_) + cells_) % cells_;
  cy = ((cy % cells_) + cells_) % cells_;
  return buckets_[static_cast<std::size_t>(cy) * cells_ + cx];
}

int GridIndex::nearest(Point q, int exclude) const {
  q = window_.wrap(q);
  const int cx = cell_of(q.x);
  const int cy = cell_of(q.y);
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  auto visit = [&](const std::vector<int>& b) {
    for (int i : b) {
      if (i == exclude) continue;
      const double d2 = window_.distance2(q, points_[static_cast<std::size_t>(i)]);
      if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
        best_d2 = d2;
        best = i;
      }
    }
  };
  for (int r = 0;; ++r) {
    if (2 * r + 1 >= cells_) {
      // The ring wraps onto itself: finish with a scan of every bucket.
      for (const auto& b : buckets_) visit(b);
      return best;
    }
    if (r == 0) {
      visit(bucket(cx, cy));
    } else {
      for (int dx = -r; dx <= r; ++dx) {
        visit(bucket(cx + dx, cy - r));
        visit(bucket(cx + dx, cy + r));
      }
      for (int dy = -r + 1; dy <= r - 1; ++dy) {
        visit(bucket(cx - r, cy + dy));
        visit(bucket(cx + r, cy + dy));
      }
    }
    const double reach = r * cell_side_;
    if (best >= 0 && best_d2 <= reach * reach) return best;
  }
}

void GridIndex::within(Point q, double radius, std::vector<int>& out, int exclude) const {
  q = window_.wrap(q);
  const double r2 = radius * radius;
  auto visit = [&](const std::vector<int>& b) {
    for (int i : b) {
      if (i == exclude) continue;
      if (window_.distance2(q, points_[static_cast<std::size_t>(i)]) <= r2) out.push_back(i);
    }
  };
  const int reach = static_cast<int>(std::ceil(radius / cell_side_));
  if (2 * reach + 1 >= cells_) {
    for (const auto& b : buckets_) visit(b);
    return;
  }
  const int cx = cell_of(q.x);
  const int cy = cell_of(q.y);
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) visit(bucket(cx + dx, cy + dy));
  }
}

}  // namespace cdcache::geometry
