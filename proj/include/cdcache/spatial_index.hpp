#pragma once

#include <span>
#include <vector>

#include "cdcache/geometry.hpp"

namespace cdcache::geometry {

// Uniform bucket grid over a periodic window.
class GridIndex {
 public:
  GridIndex(std::span<const Point> points, Window window, double points_per_cell = 2.0);

  // Index of the nearest point other than `exclude`, or -1.
  int nearest(Point q, int exclude = -1) const;

  // Appends indices of points within `radius` of q (torus metric).
  void within(Point q, double radius, std::vector<int>& out, int exclude = -1) const;

 private:
  int cell_of(double coord) const;
  const std::vector<int>& bucket(int cx, int cy) const;

  std::span<const Point> points_;
  Window window_;
  int cells_ = 1;
  double cell_side_ = 0.0;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace cdcache::geometry
