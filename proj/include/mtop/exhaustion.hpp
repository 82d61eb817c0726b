#pragma once

#include <cmath>
#include <vector>

#include "mtop/geometry.hpp"

namespace mtop {

/// Nested coordinate boxes [-r0*2^i, r0*2^i]^n standing in for the
/// non-compact manifold. Grid resolution decays on the outer levels; probe
/// points are exact tuples folded into every level whose box contains them.
struct CompactExhaustion {
  double r0 = 1.0;
  int top_level = 8;    // levels run 0..top_level
  int base_points = 17; // points per axis on levels 0..3
  std::vector<Point> probes;

  double radius(int level) const { return r0 * std::pow(2.0, level); }

  int axis_points(int level) const {
    int n = base_points - 2 * std::max(0, level - 3);
    int floor_n = std::min(base_points, 7);
    return std::max(n, floor_n);
  }

  bool contains(const Point& p, int level) const {
    double r = radius(level);
    for (double c : p)
      if (std::fabs(c) > r * (1.0 + 1e-12)) return false;
    return true;
  }

  void validate(int dim) const;

  CompactExhaustion with_probes(std::vector<Point> extra) const {
    CompactExhaustion x = *this;
    for (auto& p : extra)
      if (contains(p, top_level)) x.probes.push_back(std::move(p));
    return x;
  }
};

}  // namespace mtop
