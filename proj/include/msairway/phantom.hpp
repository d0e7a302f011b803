#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "msairway/grid.hpp"
#include "msairway/segmenter.hpp"

namespace msairway {

/// Bifurcating tree of straight cylinders, generation 0 being the trunk.
struct TreeSpec {
  int depth = 3;
  double trunk_radius = 4.0;     // voxels
  double radius_ratio = 0.79;    // child radius / parent radius
  double branch_angle_deg = 35.0;
  double trunk_length = 20.0;    // voxels
  double length_ratio = 0.8;     // child length / parent length
  std::uint64_t rng_seed = 1;
  double noise_sigma_hu = 30.0;

  void validate() const;
};

struct Point3 {
  double z = 0.0;
  double y = 0.0;
  double x = 0.0;
  friend bool operator==(const Point3&, const Point3&) = default;
};

struct Branch {
  int generation = 0;
  double radius = 0.0;
  Point3 start;
  Point3 end;
  friend bool operator==(const Branch&, const Branch&) = default;
};

struct PhantomCase {
  Volume volume;
  Mask3D gt;
  std::vector<Branch> branches;  // breadth-first, trunk first
};

// Rendered HU levels before noise.
inline constexpr int kLumenHu = -1000;
inline constexpr int kWallHu = -200;
inline constexpr int kParenchymaHu = -850;

/// Branches thinner than this are drawn at this radius so that every branch
/// stays a connected run of voxels.
inline constexpr double kMinDrawRadius = 1.0;

/// Deterministic for a fixed spec. Throws RangeError when the tree (including
/// its wall) does not fit in `dims`.
PhantomCase generate_tree(const TreeSpec& spec, Shape3 dims);

/// Ground truth of the branches whose nominal radius is >= min_radius.
Mask3D render_branches(const std::vector<Branch>& branches, Shape3 dims,
                       double min_radius = 0.0);

/// Mask an oracle that resolves radii down to min_radius_at_ir1 / ir would
/// produce. Nested increasing in ir, always a subset of the ground truth.
Mask3D scale_limited_mask(const std::vector<Branch>& branches, Shape3 dims, int ir,
                          double min_radius_at_ir1);

/// Backend that answers with scale_limited_mask for this ir.
std::unique_ptr<MaskBackend> scale_limited_oracle(const PhantomCase& pc, int ir,
                                                  double min_radius_at_ir1,
                                                  std::size_t tile_dim);

/// Text manifest, one branch per line:
///   generation radius start_z start_y start_x end_z end_y end_x
void write_manifest(const std::vector<Branch>& branches, const std::filesystem::path& path);
std::vector<Branch> read_manifest(const std::filesystem::path& path);

}  // namespace msairway
