#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "msairway/connectivity.hpp"
#include "msairway/grid.hpp"
#include "msairway/tiler.hpp"

namespace msairway {

/// Order of thresholding and nearest-neighbour down-sampling when a scale's
/// tile maps are reduced to the original slice grid.
enum class AssembleOrder { BinarizeThenDownsample, DownsampleThenBinarize };

struct EnsembleConfig {
  double threshold = 0.5;
  std::map<int, double> threshold_by_ratio;  // overrides `threshold` per ir
  Connectivity connectivity = Connectivity::TwentySix;
  AssembleOrder order = AssembleOrder::BinarizeThenDownsample;

  double threshold_for(int ir) const;
  void validate() const;
};

/// 1 where p >= threshold.
Mask2D binarize(const FloatGrid& probs, double threshold);
inline Mask2D binarize(const ProbMap& pm, double threshold) {
  return binarize(pm.grid(), threshold);
}

/// Reduces the probability tiles of one up-sampled slice to a binary mask on
/// the original slice grid: threshold, merge, then keep every ir-th sample.
Mask2D assemble_slice(const TileSet<float>& maps, int ir, double threshold,
                      AssembleOrder order = AssembleOrder::BinarizeThenDownsample);

/// Stacks assembled slices in z order. `slices[z]` holds the tile maps of slice z.
Mask3D assemble_scale_mask(std::span<const TileSet<float>> slices, int ir,
                           const EnsembleConfig& cfg, Spacing3 spacing = {});

/// Voxelwise OR.
Mask3D union_masks(std::span<const Mask3D> masks);

/// Keeps only the component with the most voxels. Ties go to the component
/// whose first voxel in (z, y, x) raster order comes first.
Mask3D largest_connected_component(const Mask3D& m,
                                   Connectivity conn = Connectivity::TwentySix);

/// Ordered set of interpolation ratios fused by one strategy, e.g. "ir1+ir2".
struct Strategy {
  std::vector<int> ratios;

  std::string name() const;
  friend bool operator==(const Strategy&, const Strategy&) = default;
};

Strategy parse_strategy(const std::string& text);

/// ir1, ir1+ir2, ... one strategy per prefix of the scale list.
std::vector<Strategy> cumulative_strategies(std::span<const int> ratios);

/// LCC(union of the strategy's per-scale masks).
Mask3D run_strategy(const std::map<int, Mask3D>& scale_masks, const Strategy& strategy,
                    Connectivity conn = Connectivity::TwentySix);

}  // namespace msairway
