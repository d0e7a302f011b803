#pragma once

// Independent reference computations used to check the library. None of
// these share code paths with src/.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iterator>
#include <set>
#include <tuple>
#include <vector>

#include "msairway/grid.hpp"

namespace msairway::oracle {

/// Evaluates the bilinear interpolant at each mapped output coordinate,
/// clamping the continuous source coordinate to the image.
template <class T>
std::vector<double> bilinear_direct(const Grid2D<T>& img, int ir) {
  const auto ny = static_cast<long>(img.ny());
  const auto nx = static_cast<long>(img.nx());
  auto sample = [&](double cy, double cx) {
    cy = std::min(std::max(cy, 0.0), static_cast<double>(ny - 1));
    cx = std::min(std::max(cx, 0.0), static_cast<double>(nx - 1));
    const long y0 = ny == 1 ? 0 : std::min(static_cast<long>(std::floor(cy)), ny - 2);
    const long x0 = nx == 1 ? 0 : std::min(static_cast<long>(std::floor(cx)), nx - 2);
    const long y1 = ny == 1 ? 0 : y0 + 1;
    const long x1 = nx == 1 ? 0 : x0 + 1;
    const double fy = cy - static_cast<double>(y0);
    const double fx = cx - static_cast<double>(x0);
    auto at = [&](long y, long x) {
      return static_cast<double>(img(static_cast<std::size_t>(y), static_cast<std::size_t>(x)));
    };
    return at(y0, x0) * (1 - fy) * (1 - fx) + at(y0, x1) * (1 - fy) * fx +
           at(y1, x0) * fy * (1 - fx) + at(y1, x1) * fy * fx;
  };
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(ny * nx * ir * ir));
  for (long i = 0; i < ny * ir; ++i) {
    for (long j = 0; j < nx * ir; ++j) {
      out.push_back(sample((i + 0.5) / ir - 0.5, (j + 0.5) / ir - 0.5));
    }
  }
  return out;
}

/// Recursive-free flood fill over explicit coordinates; returns the largest
/// component (ties: earliest raster-order seed).
inline Mask3D largest_component_flood(const Mask3D& m, int connectivity) {
  const auto& s = m.shape();
  const long nz = static_cast<long>(s.nz), ny = static_cast<long>(s.ny),
             nx = static_cast<long>(s.nx);
  auto linear = [&](long z, long y, long x) { return static_cast<std::size_t>((z * ny + y) * nx + x); };
  const int max_axes = connectivity == 6 ? 1 : connectivity == 18 ? 2 : 3;

  std::vector<int> comp(m.values().size(), -1);
  std::vector<std::size_t> sizes;
  for (long z = 0; z < nz; ++z) {
    for (long y = 0; y < ny; ++y) {
      for (long x = 0; x < nx; ++x) {
        if (!m(z, y, x) || comp[linear(z, y, x)] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        sizes.push_back(0);
        std::vector<std::tuple<long, long, long>> stack{{z, y, x}};
        comp[linear(z, y, x)] = id;
        while (!stack.empty()) {
          auto [cz, cy, cx] = stack.back();
          stack.pop_back();
          ++sizes[static_cast<std::size_t>(id)];
          for (long dz = -1; dz <= 1; ++dz)
            for (long dy = -1; dy <= 1; ++dy)
              for (long dx = -1; dx <= 1; ++dx) {
                const int axes = (dz != 0) + (dy != 0) + (dx != 0);
                if (axes == 0 || axes > max_axes) continue;
                const long qz = cz + dz, qy = cy + dy, qx = cx + dx;
                if (qz < 0 || qy < 0 || qx < 0 || qz >= nz || qy >= ny || qx >= nx) continue;
                if (!m(qz, qy, qx) || comp[linear(qz, qy, qx)] >= 0) continue;
                comp[linear(qz, qy, qx)] = id;
                stack.emplace_back(qz, qy, qx);
              }
        }
      }
    }
  }
  Mask3D out(s);
  if (sizes.empty()) return out;
  const auto best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (std::size_t i = 0; i < comp.size(); ++i) out.values()[i] = comp[i] == best ? 1 : 0;
  return out;
}

/// Number of connected components by flood fill.
inline std::size_t component_count(const Mask3D& m, int connectivity) {
  std::size_t n = 0;
  Mask3D rest = m;
  while (rest.count() > 0) {
    const auto big = largest_component_flood(rest, connectivity);
    for (std::size_t i = 0; i < rest.values().size(); ++i) {
      if (big.values()[i]) rest.values()[i] = 0;
    }
    ++n;
  }
  return n;
}

struct SetScores {
  double dsc, tpr, fpr;
  bool tpr_defined;
};

/// Set-algebra form of DSC / TPR / FPR on voxel index sets.
inline SetScores set_scores(const Mask3D& pred, const Mask3D& gt) {
  std::set<std::size_t> p, g, all;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    all.insert(i);
    if (pred.values()[i]) p.insert(i);
    if (gt.values()[i]) g.insert(i);
  }
  std::vector<std::size_t> inter, p_minus_g, not_g;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(inter));
  std::set_difference(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(p_minus_g));
  std::set_difference(all.begin(), all.end(), g.begin(), g.end(), std::back_inserter(not_g));
  SetScores s{};
  s.dsc = p.empty() && g.empty() ? 100.0
                                  : 100.0 * 2.0 * static_cast<double>(inter.size()) /
                                        static_cast<double>(p.size() + g.size());
  s.tpr_defined = !g.empty();
  s.tpr = g.empty() ? 0.0 : 100.0 * static_cast<double>(inter.size()) / static_cast<double>(g.size());
  s.fpr = not_g.empty() ? 0.0
                        : 100.0 * static_cast<double>(p_minus_g.size()) /
                              static_cast<double>(not_g.size());
  return s;
}

}  // namespace msairway::oracle
