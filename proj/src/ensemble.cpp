#include "msairway/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "msairway/resample.hpp"

namespace msairway {

double EnsembleConfig::threshold_for(int ir) const {
  auto it = threshold_by_ratio.find(ir);
  return it == threshold_by_ratio.end() ? threshold : it->second;
}

void EnsembleConfig::validate() const {
  auto check = [](double t) {
    if (!(t > 0.0 && t < 1.0)) {
      throw ConfigError("threshold must lie in (0, 1), got " + std::to_string(t));
    }
  };
  check(threshold);
  for (const auto& [ir, t] : threshold_by_ratio) {
    check_ratio(ir);
    check(t);
  }
}

Mask2D binarize(const FloatGrid& probs, double threshold) {
  Mask2D out(probs.shape());
  auto dst = out.values();
  auto src = probs.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return out;
}

Mask2D assemble_slice(const TileSet<float>& maps, int ir, double threshold,
                      AssembleOrder order) {
  check_ratio(ir);
  if (order == AssembleOrder::BinarizeThenDownsample) {
    TileSet<std::uint8_t> bits{maps.layout, {}};
    bits.tiles.reserve(maps.tiles.size());
    for (const auto& t : maps.tiles) bits.tiles.push_back(binarize(t, threshold));
    return downsample_nearest(merge(bits), ir);
  }
  return binarize(downsample_nearest(merge(maps), ir), threshold);
}

Mask3D assemble_scale_mask(std::span<const TileSet<float>> slices, int ir,
                           const EnsembleConfig& cfg, Spacing3 spacing) {
  if (slices.empty()) throw ShapeError("no slices to assemble");
  check_ratio(ir);
  const auto& src = slices.front().layout.src;
  const auto r = static_cast<std::size_t>(ir);
  if (src.ny % r != 0 || src.nx % r != 0) {
    throw ShapeError("up-sampled slice " + to_string(src) + " is not a multiple of ir " +
                     std::to_string(ir));
  }
  Mask3D out(Shape3{slices.size(), src.ny / r, src.nx / r}, spacing);
  const double t = cfg.threshold_for(ir);
  for (std::size_t z = 0; z < slices.size(); ++z) {
    if (slices[z].layout.src != src) {
      throw ShapeError("slice " + std::to_string(z) + " has up-sampled shape " +
                       to_string(slices[z].layout.src) + ", expected " + to_string(src));
    }
    out.set_slice(z, assemble_slice(slices[z], ir, t, cfg.order));
  }
  return out;
}

Mask3D union_masks(std::span<const Mask3D> masks) {
  if (masks.empty()) throw ShapeError("union of an empty mask list");
  Mask3D out = masks.front();
  for (std::size_t i = 1; i < masks.size(); ++i) {
    if (masks[i].shape() != out.shape()) {
      throw ShapeError("cannot union masks of shape " + to_string(out.shape()) + " and " +
                       to_string(masks[i].shape()));
    }
    auto dst = out.values();
    auto src = masks[i].values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] |= src[j];
  }
  return out;
}

namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Lower label wins so the root is always the earliest-created label.
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

Mask3D largest_connected_component(const Mask3D& m, Connectivity conn) {
  const auto& s = m.shape();
  const auto in = m.values();

  // Neighbours already visited in raster order.
  std::vector<Offset3> back;
  for (const auto& o : neighbour_offsets(conn)) {
    if (o.dz < 0 || (o.dz == 0 && (o.dy < 0 || (o.dy == 0 && o.dx < 0)))) back.push_back(o);
  }

  constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::vector<std::uint32_t> labels(in.size(), kNone);
  DisjointSet ds;

  const auto nz = static_cast<std::ptrdiff_t>(s.nz);
  const auto ny = static_cast<std::ptrdiff_t>(s.ny);
  const auto nx = static_cast<std::ptrdiff_t>(s.nx);
  for (std::ptrdiff_t z = 0; z < nz; ++z) {
    for (std::ptrdiff_t y = 0; y < ny; ++y) {
      for (std::ptrdiff_t x = 0; x < nx; ++x) {
        const auto idx = static_cast<std::size_t>((z * ny + y) * nx + x);
        if (!in[idx]) continue;
        std::uint32_t label = kNone;
        for (const auto& o : back) {
          const auto zz = z + o.dz, yy = y + o.dy, xx = x + o.dx;
          if (zz < 0 || yy < 0 || xx < 0 || yy >= ny || xx >= nx) continue;
          const auto n = labels[static_cast<std::size_t>((zz * ny + yy) * nx + xx)];
          if (n == kNone) continue;
          if (label == kNone) {
            label = n;
          } else {
            ds.unite(label, n);
          }
        }
        labels[idx] = label == kNone ? ds.make() : label;
      }
    }
  }

  // Roots are the earliest label of each component, and labels are created in
  // raster order, so a smaller root means an earlier first voxel.
  std::vector<std::size_t> sizes;
  for (auto& l : labels) {
    if (l == kNone) continue;
    l = ds.find(l);
    if (l >= sizes.size()) sizes.resize(l + 1, 0);
    ++sizes[l];
  }

  Mask3D out(s, m.spacing());
  if (sizes.empty()) return out;
  std::uint32_t best = 0;
  for (std::uint32_t l = 1; l < sizes.size(); ++l) {
    if (sizes[l] > sizes[best]) best = l;
  }
  auto dst = out.values();
  for (std::size_t i = 0; i < labels.size(); ++i) dst[i] = labels[i] == best ? 1 : 0;
  return out;
}

std::string Strategy::name() const {
  std::string s;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (i) s += '+';
    s += "ir" + std::to_string(ratios[i]);
  }
  return s;
}

Strategy parse_strategy(const std::string& text) {
  Strategy st;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, '+')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.size() < 3 || tok.compare(0, 2, "ir") != 0 ||
        !std::all_of(tok.begin() + 2, tok.end(), ::isdigit) || tok.size() > 6) {
      throw InputError("unknown strategy token '" + tok + "' in '" + text + "'");
    }
    const int ir = std::stoi(tok.substr(2));
    if (ir < 1) throw InputError("strategy token '" + tok + "' has a zero ratio");
    st.ratios.push_back(ir);
  }
  if (st.ratios.empty()) throw InputError("empty strategy '" + text + "'");
  std::sort(st.ratios.begin(), st.ratios.end());
  if (std::adjacent_find(st.ratios.begin(), st.ratios.end()) != st.ratios.end()) {
    throw InputError("strategy '" + text + "' repeats a ratio");
  }
  return st;
}

std::vector<Strategy> cumulative_strategies(std::span<const int> ratios) {
  std::vector<Strategy> out;
  Strategy acc;
  for (int ir : ratios) {
    acc.ratios.push_back(ir);
    out.push_back(acc);
  }
  return out;
}

Mask3D run_strategy(const std::map<int, Mask3D>& scale_masks, const Strategy& strategy,
                    Connectivity conn) {
  std::vector<Mask3D> picked;
  for (int ir : strategy.ratios) {
    auto it = scale_masks.find(ir);
    if (it == scale_masks.end()) {
      throw InputError("strategy " + strategy.name() + " needs the ir" + std::to_string(ir) +
                       " mask");
    }
    picked.push_back(it->second);
  }
  return largest_connected_component(union_masks(picked), conn);
}

}  // namespace msairway
