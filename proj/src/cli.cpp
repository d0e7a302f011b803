#include "msairway/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "msairway/ensemble.hpp"
#include "msairway/metrics.hpp"
#include "msairway/phantom.hpp"
#include "msairway/pipeline.hpp"
#include "msairway/volgrid.hpp"

namespace msairway {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config;
  std::string scales;
  std::optional<double> threshold;
  std::optional<double> sharpen;
  std::optional<int> connectivity;
  std::optional<unsigned> jobs;
  std::optional<std::size_t> tile_dim;
  std::string backend;
};

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw InputError("bad " + what + " entry '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty " + what);
  return out;
}

PipelineConfig resolve_config(const GlobalOptions& g) {
  PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : load_config(g.config);
  if (!g.scales.empty()) cfg.scales.ratios = parse_int_list(g.scales, "scale list");
  if (g.tile_dim) cfg.scales.tile_dim = *g.tile_dim;
  if (g.threshold) {
    cfg.ensemble.threshold = *g.threshold;
    cfg.ensemble.threshold_by_ratio.clear();
  }
  if (g.sharpen) cfg.sharpen = *g.sharpen;
  if (g.connectivity) {
    try {
      cfg.ensemble.connectivity = connectivity_from_int(*g.connectivity);
    } catch (const RangeError& e) {
      throw ConfigError(e.what());
    }
  }
  if (g.jobs) cfg.jobs = *g.jobs;
  if (!g.backend.empty()) cfg.default_backend = parse_backend_spec(g.backend);
  try {
    cfg.scales.validate();
    cfg.window.validate();
    cfg.ensemble.validate();
  } catch (const RangeError& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.sharpen >= 0.0)) throw ConfigError("sharpen amount must be >= 0");
  if (cfg.jobs == 0) throw ConfigError("jobs must be >= 1");
  return cfg;
}

std::string default_case_id(const std::string& input) {
  return fs::path(input).stem().string();
}

// "key=value" -> pair; a bare value gets `fallback_key`.
std::pair<std::string, std::string> split_assignment(const std::string& s,
                                                     const std::string& fallback_key) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) return {fallback_key, s};
  return {s.substr(0, eq), s.substr(eq + 1)};
}

int scale_key(const std::string& k) {
  std::string digits = k.rfind("ir", 0) == 0 ? k.substr(2) : k;
  try {
    std::size_t used = 0;
    const int ir = std::stoi(digits, &used);
    if (used == digits.size() && ir >= 1) return ir;
  } catch (const std::exception&) {
  }
  throw InputError("'" + k + "' is not an interpolation ratio");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string mask_name(const std::string& case_id, const std::string& what) {
  return case_id + "_" + what + ".mhd";
}

// ---- subcommands -------------------------------------------------------------

struct PreprocessArgs {
  std::string input;
  std::string out;
  bool quantize = false;
};

int cmd_preprocess(const GlobalOptions& g, const PreprocessArgs& a, std::ostream& out) {
  auto cfg = resolve_config(g);
  if (a.quantize) cfg.quantize = true;
  const auto vol = read_volume(a.input);
  const auto slices = preprocess(vol, cfg.window, cfg.quantize);
  fs::create_directories(a.out);
  for (std::size_t z = 0; z < slices.size(); ++z) {
    char name[32];
    std::snprintf(name, sizeof name, "slice_%04zu.stx", z);
    write_tensor(slices[z], fs::path(a.out) / name,
                 cfg.quantize ? TensorDType::U8 : TensorDType::F32);
  }
  out << "wrote " << slices.size() << " slices to " << a.out << '\n';
  return kExitOk;
}

struct PredictArgs {
  std::string input;
  std::string case_id;
  int ir = 1;
  std::string out;
};

int cmd_predict(const GlobalOptions& g, const PredictArgs& a, std::ostream& out) {
  auto cfg = resolve_config(g);
  check_ratio(a.ir);
  cfg.backend_for(a.ir).validate();
  const auto vol = read_volume(a.input);
  const auto case_id = a.case_id.empty() ? default_case_id(a.input) : a.case_id;
  const auto mask = predict_scale(case_id, vol, a.ir, cfg);
  write_mask(mask, a.out);
  out << case_id << " ir" << a.ir << ": " << mask.count() << " voxels -> " << a.out << '\n';
  return kExitOk;
}

struct EnsembleArgs {
  std::string strategy;
  std::vector<std::string> scale_masks;
  std::string out;
};

int cmd_ensemble(const GlobalOptions& g, const EnsembleArgs& a, std::ostream& out) {
  const auto cfg = resolve_config(g);
  const auto strategy = parse_strategy(a.strategy);
  std::map<int, Mask3D> masks;
  for (const auto& s : a.scale_masks) {
    const auto [k, path] = split_assignment(s, "");
    if (k.empty()) throw InputError("--scale-mask expects ir=path, got " + s);
    masks[scale_key(k)] = read_mask(path);
  }
  const auto final_mask = run_strategy(masks, strategy, cfg.ensemble.connectivity);
  write_mask(final_mask, a.out);
  out << strategy.name() << ": " << final_mask.count() << " voxels -> " << a.out << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::vector<std::string> preds;
  std::string gt;
  std::string case_id = "case";
  std::string table;
  std::string baseline = "ir1";
  std::string out;
  bool per_slice = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  std::vector<StrategyRow> dsc_rows;
  std::vector<StrategyRow> tpr_rows;
  std::vector<StrategyRow> fpr_rows;
  if (!a.table.empty()) {
    if (!a.preds.empty() || !a.gt.empty()) {
      throw InputError("--table cannot be combined with --pred/--gt");
    }
    dsc_rows = parse_table_csv(read_text(a.table));
  } else {
    if (a.preds.empty() || a.gt.empty()) throw InputError("eval needs --pred and --gt, or --table");
    const auto gt = read_mask(a.gt);
    for (const auto& p : a.preds) {
      const auto [name, path] = split_assignment(p, "pred");
      const auto pred = read_mask(path);
      const auto sc = score(pred, gt);
      const double d = a.per_slice ? dsc_per_slice(pred, gt) : sc.dsc;
      dsc_rows.push_back({name, {a.case_id}, {d}});
      tpr_rows.push_back({name, {a.case_id}, {sc.tpr}});
      fpr_rows.push_back({name, {a.case_id}, {sc.fpr}});
    }
  }

  const bool has_baseline = std::any_of(dsc_rows.begin(), dsc_rows.end(),
                                        [&](const auto& r) { return r.strategy == a.baseline; });
  GainTable gains;
  if (has_baseline && dsc_rows.size() > 1) gains = gain_table(dsc_rows, a.baseline);

  const std::vector<std::string> cases =
      dsc_rows.empty() ? std::vector<std::string>{} : dsc_rows.front().cases;
  if (!a.out.empty()) {
    emit_report(dsc_rows, gains, a.out);
    if (!tpr_rows.empty()) {
      const fs::path prefix(a.out);
      auto write = [&](const std::string& suffix, const std::vector<StrategyRow>& rows) {
        std::ofstream f(prefix.parent_path() / (prefix.filename().string() + suffix),
                        std::ios::trunc);
        if (!f) throw InputError("cannot write report " + a.out + suffix);
        f << table_csv(rows, cases);
      };
      write("_tpr.csv", tpr_rows);
      write("_fpr.csv", fpr_rows);
    }
  }
  out << table_text("DSC", dsc_rows, cases);
  if (!gains.rows.empty()) out << '\n' << table_text("Gain", gains.rows, gains.cases);
  return kExitOk;
}

struct PhantomArgs {
  std::string out;
  std::string dims = "64,64,64";
  TreeSpec spec;
};

int cmd_phantom(const PhantomArgs& a, std::ostream& out) {
  const auto d = parse_int_list(a.dims, "dimension list");
  if (d.size() != 3 || std::any_of(d.begin(), d.end(), [](int v) { return v < 1; })) {
    throw InputError("--dims expects nz,ny,nx with positive entries");
  }
  const Shape3 dims{static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[1]),
                    static_cast<std::size_t>(d[2])};
  const auto pc = generate_tree(a.spec, dims);
  const fs::path dir(a.out);
  write_volume(pc.volume, dir / "volume.mhd");
  write_mask(pc.gt, dir / "gt.mhd");
  write_manifest(pc.branches, dir / "branches.txt");
  out << "phantom: " << pc.branches.size() << " branches, " << pc.gt.count()
      << " airway voxels -> " << a.out << '\n';
  return kExitOk;
}

struct PipelineArgs {
  std::string input;
  std::string gt;
  std::string case_id;
  std::string out;
};

int cmd_pipeline(const GlobalOptions& g, const PipelineArgs& a, std::ostream& out) {
  const auto cfg = resolve_config(g);
  cfg.validate();
  const auto vol = read_volume(a.input);
  std::optional<Mask3D> gt;
  if (!a.gt.empty()) gt = read_mask(a.gt);
  const auto case_id = a.case_id.empty() ? default_case_id(a.input) : a.case_id;

  const auto result = run_pipeline(case_id, vol, cfg, gt ? &*gt : nullptr);
  const fs::path dir(a.out);
  for (const auto& [ir, m] : result.scale_masks) {
    write_mask(m, dir / mask_name(case_id, "ir" + std::to_string(ir)));
  }
  std::vector<StrategyRow> rows;
  for (const auto& s : result.strategies) {
    write_mask(s.mask, dir / mask_name(case_id, s.strategy.name()));
    if (s.scores) rows.push_back({s.strategy.name(), {case_id}, {s.scores->dsc}});
  }
  out << case_id << ": " << result.scale_masks.size() << " scales, "
      << result.strategies.size() << " strategies -> " << a.out << '\n';
  if (!rows.empty()) {
    const auto gains = gain_table(rows, result.strategies.front().strategy.name());
    emit_report(rows, gains, dir / "report");
    out << table_text("DSC", rows, rows.front().cases);
  }
  return kExitOk;
}

void add_global_options(CLI::App& app, GlobalOptions& g) {
  app.add_option("--config", g.config, "JSON pipeline configuration");
  app.add_option("--scales", g.scales, "comma-separated interpolation ratios, e.g. 1,2,4,8");
  app.add_option("--tile-dim", g.tile_dim, "tile edge length in pixels");
  app.add_option("--threshold", g.threshold, "binarization threshold for every ratio");
  app.add_option("--sharpen", g.sharpen, "sharpening amount applied after interpolation");
  app.add_option("--connectivity", g.connectivity, "6, 18 or 26");
  app.add_option("--jobs", g.jobs, "worker threads");
  app.add_option("--backend", g.backend, "default backend, kind[:key=value;...]");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-scale airway segmentation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  add_global_options(app, g);

  PreprocessArgs pre;
  auto* sub_pre = app.add_subcommand("preprocess", "window and normalize every slice to STX1");
  sub_pre->add_option("--input", pre.input, "volume header")->required();
  sub_pre->add_option("--out", pre.out, "output directory")->required();
  sub_pre->add_flag("--quantize", pre.quantize, "round to 8-bit levels");

  PredictArgs pred;
  auto* sub_pred = app.add_subcommand("predict", "segment one interpolation ratio");
  sub_pred->add_option("--input", pred.input, "volume header")->required();
  sub_pred->add_option("--case", pred.case_id, "case id (default: input file stem)");
  sub_pred->add_option("--ir", pred.ir, "interpolation ratio")->required();
  sub_pred->add_option("--out", pred.out, "output mask header")->required();

  EnsembleArgs ens;
  auto* sub_ens = app.add_subcommand("ensemble", "fuse per-scale masks by union and LCC");
  sub_ens->add_option("--strategy", ens.strategy, "e.g. ir1+ir2+ir4+ir8")->required();
  sub_ens->add_option("--scale-mask", ens.scale_masks, "irK=mask.mhd (repeatable)")->required();
  sub_ens->add_option("--out", ens.out, "output mask header")->required();

  EvalArgs ev;
  auto* sub_eval = app.add_subcommand("eval", "score masks or a score table");
  sub_eval->add_option("--pred", ev.preds, "[strategy=]mask.mhd (repeatable)");
  sub_eval->add_option("--gt", ev.gt, "ground-truth mask header");
  sub_eval->add_option("--case", ev.case_id, "case column name");
  sub_eval->add_option("--table", ev.table, "score CSV (strategy rows, case columns)");
  sub_eval->add_option("--baseline", ev.baseline, "baseline strategy for gains");
  sub_eval->add_option("--out", ev.out, "report path prefix");
  sub_eval->add_flag("--per-slice", ev.per_slice, "average DSC over slices");

  PhantomArgs ph;
  auto* sub_ph = app.add_subcommand("phantom", "generate a synthetic airway-tree phantom");
  sub_ph->add_option("--out", ph.out, "output directory")->required();
  sub_ph->add_option("--dims", ph.dims, "nz,ny,nx");
  sub_ph->add_option("--depth", ph.spec.depth, "branching generations");
  sub_ph->add_option("--trunk-radius", ph.spec.trunk_radius, "voxels");
  sub_ph->add_option("--radius-ratio", ph.spec.radius_ratio, "child/parent radius");
  sub_ph->add_option("--angle", ph.spec.branch_angle_deg, "branch angle in degrees");
  sub_ph->add_option("--trunk-length", ph.spec.trunk_length, "voxels");
  sub_ph->add_option("--length-ratio", ph.spec.length_ratio, "child/parent length");
  sub_ph->add_option("--seed", ph.spec.rng_seed, "random seed");
  sub_ph->add_option("--noise", ph.spec.noise_sigma_hu, "noise sigma in HU");

  PipelineArgs pl;
  auto* sub_pl = app.add_subcommand("pipeline", "predict all scales, fuse, and score");
  sub_pl->add_option("--input", pl.input, "volume header")->required();
  sub_pl->add_option("--gt", pl.gt, "ground-truth mask header");
  sub_pl->add_option("--case", pl.case_id, "case id (default: input file stem)");
  sub_pl->add_option("--out", pl.out, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    if (*sub_pre) return cmd_preprocess(g, pre, out);
    if (*sub_pred) return cmd_predict(g, pred, out);
    if (*sub_ens) return cmd_ensemble(g, ens, out);
    if (*sub_eval) return cmd_eval(ev, out);
    if (*sub_ph) return cmd_phantom(ph, out);
    if (*sub_pl) return cmd_pipeline(g, pl, out);
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnexpected;
  }
  return kExitInput;
}

}  // namespace msairway
