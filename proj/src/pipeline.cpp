#include "msairway/pipeline.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "msairway/sharpen.hpp"

namespace msairway {

using nlohmann::json;

void PipelineConfig::validate() const {
  try {
    scales.validate();
    window.validate();
  } catch (const RangeError& e) {
    throw ConfigError(e.what());
  }
  ensemble.validate();
  if (!(sharpen >= 0.0)) throw ConfigError("sharpen amount must be >= 0");
  if (jobs == 0) throw ConfigError("jobs must be >= 1");
  for (int ir : scales.ratios) backend_for(ir).validate();
}

const BackendSpec& PipelineConfig::backend_for(int ir) const {
  if (auto it = backends.find(ir); it != backends.end()) return it->second;
  if (default_backend) return *default_backend;
  throw ConfigError("no backend configured for ir" + std::to_string(ir));
}

namespace {

BackendSpec backend_from_json(const json& j) {
  BackendSpec b;
  b.kind = j.at("kind").get<std::string>();
  if (j.contains("params")) {
    for (const auto& [k, v] : j.at("params").items()) {
      b.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  for (const auto& [k, v] : j.items()) {
    if (k != "kind" && k != "params") throw ConfigError("unknown backend key '" + k + "'");
  }
  return b;
}

int ratio_key(const std::string& k) {
  try {
    std::size_t used = 0;
    const int ir = std::stoi(k, &used);
    if (used == k.size() && ir >= 1) return ir;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + k + "' is not an interpolation ratio");
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text) {
  PipelineConfig cfg;
  try {
    const auto j = json::parse(text);
    static const std::set<std::string> known = {
        "scales", "tile_dim",     "window",  "quantize", "threshold", "thresholds",
        "connectivity", "order",  "boundary", "sharpen", "jobs",      "backend",
        "backends"};
    for (const auto& [k, v] : j.items()) {
      if (!known.contains(k)) throw ConfigError("unknown configuration key '" + k + "'");
    }
    if (j.contains("scales")) cfg.scales.ratios = j.at("scales").get<std::vector<int>>();
    if (j.contains("tile_dim")) cfg.scales.tile_dim = j.at("tile_dim").get<std::size_t>();
    if (j.contains("window")) {
      const auto& w = j.at("window");
      cfg.window.width_hu = w.value("width", cfg.window.width_hu);
      cfg.window.level_hu = w.value("level", cfg.window.level_hu);
    }
    cfg.quantize = j.value("quantize", cfg.quantize);
    cfg.ensemble.threshold = j.value("threshold", cfg.ensemble.threshold);
    if (j.contains("thresholds")) {
      for (const auto& [k, v] : j.at("thresholds").items()) {
        cfg.ensemble.threshold_by_ratio[ratio_key(k)] = v.get<double>();
      }
    }
    if (j.contains("connectivity")) {
      cfg.ensemble.connectivity = connectivity_from_int(j.at("connectivity").get<int>());
    }
    if (j.contains("order")) {
      const auto o = j.at("order").get<std::string>();
      if (o == "binarize_first") {
        cfg.ensemble.order = AssembleOrder::BinarizeThenDownsample;
      } else if (o == "downsample_first") {
        cfg.ensemble.order = AssembleOrder::DownsampleThenBinarize;
      } else {
        throw ConfigError("order must be binarize_first or downsample_first");
      }
    }
    if (j.contains("boundary")) {
      const auto b = j.at("boundary").get<std::string>();
      if (b == "clamp") {
        cfg.boundary = Boundary::Clamp;
      } else if (b == "reflect") {
        cfg.boundary = Boundary::Reflect;
      } else {
        throw ConfigError("boundary must be clamp or reflect");
      }
    }
    cfg.sharpen = j.value("sharpen", cfg.sharpen);
    cfg.jobs = j.value("jobs", cfg.jobs);
    if (j.contains("backend")) cfg.default_backend = backend_from_json(j.at("backend"));
    if (j.contains("backends")) {
      for (const auto& [k, v] : j.at("backends").items()) {
        if (k == "default") {
          cfg.default_backend = backend_from_json(v);
        } else {
          cfg.backends[ratio_key(k)] = backend_from_json(v);
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  } catch (const RangeError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open configuration " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

BackendSpec parse_backend_spec(const std::string& text) {
  BackendSpec b;
  const auto colon = text.find(':');
  b.kind = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::istringstream ss(text.substr(colon + 1));
    std::string kv;
    while (std::getline(ss, kv, ';')) {
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("backend parameter '" + kv + "' is not key=value");
      }
      b.params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  return b;
}

std::vector<SliceImage> preprocess(const Volume& vol, const WindowSpec& win, bool quantize) {
  std::vector<SliceImage> out;
  out.reserve(vol.shape().nz);
  for (std::size_t z = 0; z < vol.shape().nz; ++z) {
    out.push_back(window_normalize(vol, win, z, quantize));
  }
  return out;
}

SliceImage prepare_slice(const Volume& vol, std::size_t z, int ir, const PipelineConfig& cfg) {
  auto img = window_normalize(vol, cfg.window, z, cfg.quantize);
  if (ir == 1) return img;
  img = upsample_bilinear(img, ir, cfg.boundary);
  if (cfg.sharpen > 0.0) img = sharpen(img, cfg.sharpen);
  return img;
}

Mask3D predict_scale(const std::string& case_id, const Volume& vol, int ir,
                     const PipelineConfig& cfg, const Backend& backend) {
  check_ratio(ir);
  const auto& s = vol.shape();
  Mask3D out(s, vol.spacing());
  std::vector<char> done(s.nz, 0);
  const double threshold = cfg.ensemble.threshold_for(ir);

  // Slices are reduced as soon as their maps arrive so that only a bounded
  // number of up-sampled slices is alive at once.
  ScaleRequest req{case_id, ir, s.nz, cfg.jobs};
  auto source = [&](std::size_t z) {
    return split(prepare_slice(vol, z, ir, cfg).grid(), cfg.scales.tile_dim, Padding::Edge);
  };
  auto sink = [&](std::size_t z, TileSet<float> maps) {
    out.set_slice(z, assemble_slice(maps, ir, threshold, cfg.ensemble.order));
    done[z] = 1;
  };
  backend.predict_scale(req, source, sink);

  for (std::size_t z = 0; z < s.nz; ++z) {
    if (!done[z]) {
      throw BackendError("case " + case_id + " ir" + std::to_string(ir) +
                         ": no predictions for slice " + std::to_string(z));
    }
  }
  return out;
}

Mask3D predict_scale(const std::string& case_id, const Volume& vol, int ir,
                     const PipelineConfig& cfg) {
  const CaseContext ctx{case_id, ir, &vol, cfg.scales.tile_dim};
  const auto backend = make_backend(cfg.backend_for(ir), ctx);
  return predict_scale(case_id, vol, ir, cfg, *backend);
}

PipelineResult run_pipeline(const std::string& case_id, const Volume& vol,
                            const PipelineConfig& cfg, const Mask3D* gt) {
  cfg.validate();
  if (gt && gt->shape() != vol.shape()) {
    throw ShapeError("ground truth " + to_string(gt->shape()) + " does not match volume " +
                     to_string(vol.shape()));
  }
  PipelineResult r;
  for (int ir : cfg.scales.ratios) r.scale_masks[ir] = predict_scale(case_id, vol, ir, cfg);
  for (const auto& st : cumulative_strategies(cfg.scales.ratios)) {
    StrategyResult sr{st, run_strategy(r.scale_masks, st, cfg.ensemble.connectivity), {}};
    if (gt) sr.scores = score(sr.mask, *gt);
    r.strategies.push_back(std::move(sr));
  }
  return r;
}

}  // namespace msairway
