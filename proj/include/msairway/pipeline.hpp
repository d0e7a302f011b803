#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msairway/ensemble.hpp"
#include "msairway/metrics.hpp"
#include "msairway/resample.hpp"
#include "msairway/segmenter.hpp"
#include "msairway/volgrid.hpp"

namespace msairway {

struct PipelineConfig {
  ScaleSpec scales;
  WindowSpec window;
  bool quantize = false;
  EnsembleConfig ensemble;
  double sharpen = 0.0;
  Boundary boundary = Boundary::Clamp;
  std::optional<BackendSpec> default_backend;
  std::map<int, BackendSpec> backends;  // per-ir overrides of default_backend
  unsigned jobs = 1;

  /// Throws ConfigError when a declared ratio has no backend.
  void validate() const;
  const BackendSpec& backend_for(int ir) const;
};

/// Reads the JSON configuration file. Unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json_text(const std::string& text);

/// "kind" or "kind:key=value;key=value".
BackendSpec parse_backend_spec(const std::string& text);

/// Every slice of the volume through the display window.
std::vector<SliceImage> preprocess(const Volume& vol, const WindowSpec& win, bool quantize);

/// Window, up-sample by ir, then sharpen. At ir 1 the windowed slice is
/// returned as is.
SliceImage prepare_slice(const Volume& vol, std::size_t z, int ir, const PipelineConfig& cfg);

/// Full prediction at one interpolation ratio: prepare, split, predict,
/// binarize, merge, down-sample, stack.
Mask3D predict_scale(const std::string& case_id, const Volume& vol, int ir,
                     const PipelineConfig& cfg, const Backend& backend);

/// Same, with the backend built from the configuration.
Mask3D predict_scale(const std::string& case_id, const Volume& vol, int ir,
                     const PipelineConfig& cfg);

struct StrategyResult {
  Strategy strategy;
  Mask3D mask;
  std::optional<OverlapScores> scores;
};

struct PipelineResult {
  std::map<int, Mask3D> scale_masks;
  std::vector<StrategyResult> strategies;  // cumulative: ir1, ir1+ir2, ...
};

/// Predicts every configured scale and fuses every cumulative strategy;
/// scores each strategy when ground truth is given.
PipelineResult run_pipeline(const std::string& case_id, const Volume& vol,
                            const PipelineConfig& cfg, const Mask3D* gt = nullptr);

}  // namespace msairway
