#include "msairway/segmenter.hpp"

#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <deque>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "msairway/parallel.hpp"
#include "msairway/phantom.hpp"
#include "msairway/volgrid.hpp"

namespace msairway {

namespace fs = std::filesystem;

void Backend::predict_scale(const ScaleRequest& req, const TileSource& source,
                            const MapSink& sink) const {
  parallel_for(req.n_slices, req.jobs, [&](std::size_t z) {
    const auto tiles = source(z);
    TileSet<float> maps{tiles.layout, {}};
    maps.tiles.reserve(tiles.tiles.size());
    for (std::size_t i = 0; i < tiles.tiles.size(); ++i) {
      const TileKey key{req.case_id, req.ir, z, i / tiles.layout.cols, i % tiles.layout.cols};
      maps.tiles.push_back(predict_tile(key, SliceImage(tiles.tiles[i])).grid());
    }
    sink(z, std::move(maps));
  });
}

// ---- threshold -------------------------------------------------------------

ThresholdBackend::ThresholdBackend(double threshold) : threshold_(threshold) {}

ProbMap ThresholdBackend::predict_tile(const TileKey&, const SliceImage& tile) const {
  FloatGrid out(tile.shape());
  auto dst = out.values();
  auto src = tile.grid().values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] <= threshold_ ? 1.0F : 0.0F;
  return ProbMap(std::move(out));
}

// ---- mask ------------------------------------------------------------------

MaskBackend::MaskBackend(std::string kind, Mask3D mask, std::size_t tile_dim)
    : kind_(std::move(kind)), mask_(std::move(mask)), tile_dim_(tile_dim) {
  if (tile_dim_ == 0) throw RangeError("tile dimension must be positive");
}

ProbMap MaskBackend::predict_tile(const TileKey& key, const SliceImage& tile) const {
  if (tile.shape() != Shape2{tile_dim_, tile_dim_}) {
    throw ShapeError("tile shape " + to_string(tile.shape()) + " does not match tile_dim " +
                     std::to_string(tile_dim_));
  }
  const auto& s = mask_.shape();
  if (key.z >= s.nz) {
    throw IndexError("slice " + std::to_string(key.z) + " outside the " + kind_ + " mask");
  }
  const auto r = static_cast<std::size_t>(key.ir);
  const std::size_t up_ny = s.ny * r;
  const std::size_t up_nx = s.nx * r;
  FloatGrid out(tile.shape(), 0.0F);
  for (std::size_t y = 0; y < tile_dim_; ++y) {
    const std::size_t gy = key.row * tile_dim_ + y;
    if (gy >= up_ny) break;
    for (std::size_t x = 0; x < tile_dim_; ++x) {
      const std::size_t gx = key.col * tile_dim_ + x;
      if (gx >= up_nx) break;
      out(y, x) = mask_(key.z, gy / r, gx / r);
    }
  }
  return ProbMap(std::move(out));
}

// ---- external --------------------------------------------------------------

std::string expand_command(const std::string& tmpl, const fs::path& in_dir,
                           const fs::path& out_dir) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 8, "{in_dir}") == 0) {
      out += in_dir.string();
      i += 8;
    } else if (tmpl.compare(i, 9, "{out_dir}") == 0) {
      out += out_dir.string();
      i += 9;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

int run_command(const std::string& command, std::chrono::seconds timeout) {
  const pid_t pid = fork();
  if (pid < 0) throw BackendError("fork failed for backend command");
  if (pid == 0) {
    setpgid(0, 0);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto pause = std::chrono::milliseconds(1);
  for (;;) {
    int status = 0;
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      if (WIFEXITED(status)) return WEXITSTATUS(status);
      return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    }
    if (r < 0) throw BackendError("waitpid failed for backend command");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw BackendError("backend command timed out after " + std::to_string(timeout.count()) +
                         " s: " + command);
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::milliseconds(50));
  }
}

ExternalBackend::ExternalBackend(ExternalOptions opts) : opts_(std::move(opts)) {
  if (opts_.command.empty()) throw ConfigError("external backend needs a command");
}

namespace {

fs::path fresh_work_dir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto p = fs::temp_directory_path() /
             ("msairway-" + std::to_string(getpid()) + "-" + std::to_string(rd()));
    if (fs::create_directories(p)) return p;
  }
  throw BackendError("cannot create a backend work directory");
}

}  // namespace

// Staging area for one (case, ir) exchange. Removes its files on scope exit
// unless the options ask to keep them.
class ExternalBackend::Exchange {
 public:
  Exchange(const ExternalOptions& opts, std::string case_id, int ir)
      : opts_(opts), case_id_(std::move(case_id)), ir_(ir) {
    own_dir_ = opts_.work_dir.empty();
    work_ = own_dir_ ? fresh_work_dir() : opts_.work_dir;
    in_dir_ = work_ / "in";
    out_dir_ = work_ / "out";
    context_ = "case " + case_id_ + " ir" + std::to_string(ir_) + ": ";
    clear();
    fs::create_directories(in_dir_);
    fs::create_directories(out_dir_);
  }
  Exchange(const Exchange&) = delete;
  Exchange& operator=(const Exchange&) = delete;
  ~Exchange() {
    if (opts_.keep_files) return;
    std::error_code ec;
    if (own_dir_) {
      fs::remove_all(work_, ec);
    } else {
      clear();
    }
  }

  void put(const TileKey& key, const FloatGrid& tile) const {
    write_tensor(tile, tile_path(in_dir_, case_id_, ir_, key.z, key.row, key.col));
  }

  void invoke() const {
    const auto cmd = expand_command(opts_.command, in_dir_, out_dir_);
    const int status = run_command(cmd, opts_.timeout);
    if (status != 0) {
      throw BackendError(context_ + "backend command exited with status " +
                         std::to_string(status) + ": " + cmd);
    }
  }

  FloatGrid get(const TileKey& key, std::size_t tile_dim) const {
    const auto path = tile_path(out_dir_, case_id_, ir_, key.z, key.row, key.col);
    if (!fs::exists(path)) throw BackendError(context_ + "missing output " + path.string());
    ProbMap pm;
    try {
      pm = read_prob_map(path);
    } catch (const Error& e) {
      throw BackendError(context_ + "malformed output: " + e.what());
    }
    if (pm.shape() != Shape2{tile_dim, tile_dim}) {
      throw BackendError(context_ + "output " + path.string() + " has shape " +
                         to_string(pm.shape()) + ", expected " +
                         to_string(Shape2{tile_dim, tile_dim}));
    }
    return pm.grid();
  }

 private:
  void clear() const {
    std::error_code ec;
    fs::remove_all(in_dir_ / case_id_ / std::to_string(ir_), ec);
    fs::remove_all(out_dir_ / case_id_ / std::to_string(ir_), ec);
  }

  const ExternalOptions& opts_;
  std::string case_id_;
  int ir_;
  bool own_dir_ = true;
  fs::path work_, in_dir_, out_dir_;
  std::string context_;
};

void ExternalBackend::predict_scale(const ScaleRequest& req, const TileSource& source,
                                    const MapSink& sink) const {
  Exchange ex(opts_, req.case_id, req.ir);

  std::vector<TileLayout> layouts(req.n_slices);
  parallel_for(req.n_slices, req.jobs, [&](std::size_t z) {
    const auto tiles = source(z);
    layouts[z] = tiles.layout;
    for (std::size_t i = 0; i < tiles.tiles.size(); ++i) {
      const TileKey key{req.case_id, req.ir, z, i / tiles.layout.cols, i % tiles.layout.cols};
      ex.put(key, tiles.tiles[i]);
    }
  });

  ex.invoke();

  parallel_for(req.n_slices, req.jobs, [&](std::size_t z) {
    const auto& layout = layouts[z];
    TileSet<float> maps{layout, {}};
    maps.tiles.reserve(layout.count());
    for (std::size_t i = 0; i < layout.count(); ++i) {
      const TileKey key{req.case_id, req.ir, z, i / layout.cols, i % layout.cols};
      maps.tiles.push_back(ex.get(key, layout.tile_dim));
    }
    sink(z, std::move(maps));
  });
}

ProbMap ExternalBackend::predict_tile(const TileKey& key, const SliceImage& tile) const {
  if (tile.shape().ny != tile.shape().nx) throw ShapeError("tiles must be square");
  Exchange ex(opts_, key.case_id, key.ir);
  ex.put(key, tile.grid());
  ex.invoke();
  return ProbMap(ex.get(key, tile.shape().ny));
}

// ---- region growing --------------------------------------------------------

Mask3D region_grow(const Volume& vol, std::array<std::size_t, 3> seed, int hu_max,
                   Connectivity conn) {
  const auto& s = vol.shape();
  const auto [sz, sy, sx] = seed;
  if (sz >= s.nz || sy >= s.ny || sx >= s.nx) {
    throw IndexError("seed (" + std::to_string(sz) + "," + std::to_string(sy) + "," +
                     std::to_string(sx) + ") outside volume " + to_string(s));
  }
  if (vol(sz, sy, sx) > hu_max) {
    throw ValidationError("seed voxel " + std::to_string(vol(sz, sy, sx)) +
                          " HU is above the growth limit " + std::to_string(hu_max));
  }
  Mask3D out(s, vol.spacing());
  const auto offsets = neighbour_offsets(conn);
  std::deque<std::array<std::size_t, 3>> queue{seed};
  out.set(sz, sy, sx, true);
  while (!queue.empty()) {
    const auto [z, y, x] = queue.front();
    queue.pop_front();
    for (const auto& o : offsets) {
      const auto zz = static_cast<std::ptrdiff_t>(z) + o.dz;
      const auto yy = static_cast<std::ptrdiff_t>(y) + o.dy;
      const auto xx = static_cast<std::ptrdiff_t>(x) + o.dx;
      if (zz < 0 || yy < 0 || xx < 0 || zz >= static_cast<std::ptrdiff_t>(s.nz) ||
          yy >= static_cast<std::ptrdiff_t>(s.ny) || xx >= static_cast<std::ptrdiff_t>(s.nx)) {
        continue;
      }
      const auto uz = static_cast<std::size_t>(zz);
      const auto uy = static_cast<std::size_t>(yy);
      const auto ux = static_cast<std::size_t>(xx);
      if (out(uz, uy, ux) || vol(uz, uy, ux) > hu_max) continue;
      out.set(uz, uy, ux, true);
      queue.push_back({uz, uy, ux});
    }
  }
  return out;
}

// ---- factory ---------------------------------------------------------------

namespace {

const std::string& param(const BackendSpec& spec, const std::string& key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    throw ConfigError(spec.kind + " backend needs parameter '" + key + "'");
  }
  return it->second;
}

double param_double(const BackendSpec& spec, const std::string& key) {
  const auto& v = param(spec, key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(spec.kind + " backend parameter '" + key + "' is not a number: " + v);
  }
}

std::array<std::size_t, 3> parse_seed(const std::string& text) {
  std::array<std::size_t, 3> seed{};
  std::istringstream ss(text);
  std::string tok;
  std::size_t i = 0;
  while (std::getline(ss, tok, ',')) {
    if (i == 3) break;
    try {
      seed[i++] = std::stoul(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad seed coordinate '" + tok + "'");
    }
  }
  if (i != 3 || std::getline(ss, tok)) throw ConfigError("seed must be 'z,y,x', got " + text);
  return seed;
}

}  // namespace

void BackendSpec::validate() const {
  if (kind == "external") {
    param(*this, "command");
  } else if (kind == "threshold") {
    param_double(*this, "threshold");
  } else if (kind == "region_grow") {
    parse_seed(param(*this, "seed"));
    param_double(*this, "hu_max");
  } else if (kind == "oracle_phantom") {
    if (!params.contains("mask") && !params.contains("manifest")) {
      throw ConfigError("oracle_phantom backend needs 'mask' or 'manifest'");
    }
  } else {
    throw ConfigError("unknown backend kind '" + kind + "'");
  }
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const CaseContext& ctx) {
  spec.validate();
  if (spec.kind == "threshold") {
    return std::make_unique<ThresholdBackend>(param_double(spec, "threshold"));
  }
  if (spec.kind == "external") {
    ExternalOptions o;
    o.command = param(spec, "command");
    if (auto it = spec.params.find("work_dir"); it != spec.params.end()) o.work_dir = it->second;
    if (spec.params.contains("timeout_s")) {
      o.timeout = std::chrono::seconds(static_cast<long>(param_double(spec, "timeout_s")));
    }
    if (auto it = spec.params.find("keep"); it != spec.params.end()) {
      o.keep_files = it->second == "1" || it->second == "true";
    }
    return std::make_unique<ExternalBackend>(std::move(o));
  }

  if (ctx.volume == nullptr) throw ConfigError(spec.kind + " backend needs the case volume");
  const auto& shape = ctx.volume->shape();

  if (spec.kind == "region_grow") {
    Connectivity conn = Connectivity::Six;
    if (spec.params.contains("connectivity")) {
      conn = connectivity_from_int(static_cast<int>(param_double(spec, "connectivity")));
    }
    auto mask = region_grow(*ctx.volume, parse_seed(param(spec, "seed")),
                            static_cast<int>(param_double(spec, "hu_max")), conn);
    return std::make_unique<MaskBackend>("region_grow", std::move(mask), ctx.tile_dim);
  }

  // oracle_phantom
  if (spec.params.contains("mask")) {
    auto mask = read_mask(param(spec, "mask"));
    if (mask.shape() != shape) {
      throw ShapeError("oracle mask " + to_string(mask.shape()) + " does not match volume " +
                       to_string(shape));
    }
    return std::make_unique<MaskBackend>("oracle_phantom", std::move(mask), ctx.tile_dim);
  }
  const auto branches = read_manifest(param(spec, "manifest"));
  const double min_radius =
      spec.params.contains("min_radius") ? param_double(spec, "min_radius") : 0.0;
  return std::make_unique<MaskBackend>(
      "oracle_phantom", scale_limited_mask(branches, shape, ctx.ir, min_radius), ctx.tile_dim);
}

}  // namespace msairway
