#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "msairway/connectivity.hpp"
#include "msairway/grid.hpp"
#include "msairway/tiler.hpp"

namespace msairway {

/// Identifies one tile of one up-sampled slice.
struct TileKey {
  std::string case_id;
  int ir = 1;
  std::size_t z = 0;
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Serves the split tiles of slice z at the backend's scale.
using TileSource = std::function<TileSet<float>(std::size_t z)>;
/// Receives the probability tiles of slice z (same layout as the source).
using MapSink = std::function<void(std::size_t z, TileSet<float> maps)>;

struct ScaleRequest {
  std::string case_id;
  int ir = 1;
  std::size_t n_slices = 0;
  unsigned jobs = 1;
};

/// Anything that maps a normalized tile to a probability map.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string kind() const = 0;

  /// Thread-safe for the built-in backends.
  virtual ProbMap predict_tile(const TileKey& key, const SliceImage& tile) const = 0;

  /// Predicts every tile of every slice of one (case, ir). The default runs
  /// predict_tile slice by slice across `jobs` workers; `sink` may be called
  /// concurrently for distinct z.
  virtual void predict_scale(const ScaleRequest& req, const TileSource& source,
                             const MapSink& sink) const;
};

/// p = 1 where intensity <= threshold (dark lumen), else 0.
class ThresholdBackend : public Backend {
 public:
  explicit ThresholdBackend(double threshold);
  std::string kind() const override { return "threshold"; }
  ProbMap predict_tile(const TileKey& key, const SliceImage& tile) const override;

 private:
  double threshold_;
};

/// Serves a fixed mask on the original grid through the same
/// nearest-neighbour up-sampling and zero-padded split the image goes
/// through. Backs the ground-truth, phantom-oracle and region-growing
/// segmenters.
class MaskBackend : public Backend {
 public:
  MaskBackend(std::string kind, Mask3D mask, std::size_t tile_dim);

  std::string kind() const override { return kind_; }
  ProbMap predict_tile(const TileKey& key, const SliceImage& tile) const override;

  const Mask3D& mask() const { return mask_; }

 private:
  std::string kind_;
  Mask3D mask_;
  std::size_t tile_dim_;
};

struct ExternalOptions {
  std::string command;  // template with {in_dir} and {out_dir}
  std::filesystem::path work_dir;  // empty: a fresh directory under the temp dir
  std::chrono::seconds timeout{3600};
  bool keep_files = false;
};

/// Batch file exchange with an out-of-process model. Per (case, ir) it
/// writes every tile as an STX1 file under {in_dir}, runs the command once,
/// and reads the maps back from {out_dir} using the same relative names.
class ExternalBackend : public Backend {
 public:
  explicit ExternalBackend(ExternalOptions opts);

  std::string kind() const override { return "external"; }
  ProbMap predict_tile(const TileKey& key, const SliceImage& tile) const override;
  void predict_scale(const ScaleRequest& req, const TileSource& source,
                     const MapSink& sink) const override;

 private:
  class Exchange;
  ExternalOptions opts_;
};

/// Runs `command` through /bin/sh, killing it after `timeout`. Returns the
/// exit status; throws BackendError on timeout or spawn failure.
int run_command(const std::string& command, std::chrono::seconds timeout);

/// Replaces every {in_dir} / {out_dir} placeholder.
std::string expand_command(const std::string& tmpl, const std::filesystem::path& in_dir,
                           const std::filesystem::path& out_dir);

/// Maximal connected region containing `seed` whose voxels are all <= hu_max.
Mask3D region_grow(const Volume& vol, std::array<std::size_t, 3> seed, int hu_max,
                   Connectivity conn = Connectivity::Six);

/// Declarative backend description, e.g. from a config file.
struct BackendSpec {
  std::string kind;  // external | threshold | region_grow | oracle_phantom
  std::map<std::string, std::string> params;

  void validate() const;
};

/// What a backend may need to know about the case being segmented.
struct CaseContext {
  std::string case_id;
  int ir = 1;
  const Volume* volume = nullptr;
  std::size_t tile_dim = 512;
};

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const CaseContext& ctx);

}  // namespace msairway
