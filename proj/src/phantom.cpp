#include "msairway/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "msairway/ensemble.hpp"

namespace msairway {

namespace {

Point3 operator+(Point3 a, Point3 b) { return {a.z + b.z, a.y + b.y, a.x + b.x}; }
Point3 operator-(Point3 a, Point3 b) { return {a.z - b.z, a.y - b.y, a.x - b.x}; }
Point3 operator*(double k, Point3 a) { return {k * a.z, k * a.y, k * a.x}; }
double dot(Point3 a, Point3 b) { return a.z * b.z + a.y * b.y + a.x * b.x; }
Point3 cross(Point3 a, Point3 b) {
  return {a.y * b.x - a.x * b.y, a.x * b.z - a.z * b.x, a.z * b.y - a.y * b.z};
}
double norm(Point3 a) { return std::sqrt(dot(a, a)); }
Point3 unit(Point3 a) { return (1.0 / norm(a)) * a; }

double wall_thickness(double radius) { return std::max(1.0, 0.3 * radius); }
double draw_radius(const Branch& b) { return std::max(b.radius, kMinDrawRadius); }

// True when voxel centre p lies in the branch grown by `grow` voxels. Child
// branches carry a ball at their start so they stay joined to the parent.
bool inside(const Branch& b, Point3 p, double grow) {
  const double r = draw_radius(b) + grow;
  const Point3 axis = b.end - b.start;
  const double len = norm(axis);
  const Point3 v = p - b.start;
  if (b.generation > 0 && dot(v, v) <= r * r) return true;
  const double t = dot(v, axis) / len;
  if (t < -grow || t > len + grow) return false;
  const Point3 radial = v - (t / len) * axis;
  return dot(radial, radial) <= r * r;
}

struct Box {
  std::size_t z0, z1, y0, y1, x0, x1;  // inclusive
};

Box bounding_box(const Branch& b, double grow, const Shape3& dims) {
  const double r = draw_radius(b) + grow;
  auto lo = [&](double a, double c) {
    return static_cast<std::size_t>(std::max(0.0, std::floor(std::min(a, c) - r)));
  };
  auto hi = [&](double a, double c, std::size_t n) {
    return static_cast<std::size_t>(
        std::clamp(std::ceil(std::max(a, c) + r), 0.0, static_cast<double>(n - 1)));
  };
  return {lo(b.start.z, b.end.z), hi(b.start.z, b.end.z, dims.nz),
          lo(b.start.y, b.end.y), hi(b.start.y, b.end.y, dims.ny),
          lo(b.start.x, b.end.x), hi(b.start.x, b.end.x, dims.nx)};
}

bool fits(const Branch& b, const Shape3& dims) {
  const double r = draw_radius(b) + wall_thickness(draw_radius(b));
  auto ok = [&](double a, double c, std::size_t n) {
    return std::min(a, c) - r >= 0.0 && std::max(a, c) + r <= static_cast<double>(n - 1);
  };
  return ok(b.start.z, b.end.z, dims.nz) && ok(b.start.y, b.end.y, dims.ny) &&
         ok(b.start.x, b.end.x, dims.nx);
}

template <class Fn>
void for_each_voxel(const Branch& b, double grow, const Shape3& dims, Fn&& fn) {
  const auto box = bounding_box(b, grow, dims);
  for (std::size_t z = box.z0; z <= box.z1; ++z) {
    for (std::size_t y = box.y0; y <= box.y1; ++y) {
      for (std::size_t x = box.x0; x <= box.x1; ++x) {
        const Point3 p{static_cast<double>(z), static_cast<double>(y), static_cast<double>(x)};
        if (inside(b, p, grow)) fn(z, y, x);
      }
    }
  }
}

}  // namespace

void TreeSpec::validate() const {
  if (depth < 0 || depth > 12) throw RangeError("tree depth must lie in [0, 12]");
  if (!(trunk_radius >= 1.0)) throw RangeError("trunk radius must be >= 1 voxel");
  if (!(radius_ratio > 0.0 && radius_ratio < 1.0)) throw RangeError("radius ratio must lie in (0, 1)");
  if (!(length_ratio > 0.0 && length_ratio <= 1.0)) {
    throw RangeError("length ratio must lie in (0, 1]");
  }
  if (!(trunk_length > 0.0)) throw RangeError("trunk length must be positive");
  if (!(branch_angle_deg > 0.0 && branch_angle_deg < 90.0)) {
    throw RangeError("branch angle must lie in (0, 90) degrees");
  }
  if (!(noise_sigma_hu >= 0.0)) throw RangeError("noise sigma must be >= 0");
}

Mask3D render_branches(const std::vector<Branch>& branches, Shape3 dims, double min_radius) {
  Mask3D m(dims);
  for (const auto& b : branches) {
    if (b.radius < min_radius) continue;
    for_each_voxel(b, 0.0, dims, [&](auto z, auto y, auto x) { m.set(z, y, x, true); });
  }
  return m;
}

Mask3D scale_limited_mask(const std::vector<Branch>& branches, Shape3 dims, int ir,
                          double min_radius_at_ir1) {
  if (ir < 1) throw RangeError("interpolation ratio must be >= 1");
  return render_branches(branches, dims, min_radius_at_ir1 / ir);
}

std::unique_ptr<MaskBackend> scale_limited_oracle(const PhantomCase& pc, int ir,
                                                  double min_radius_at_ir1,
                                                  std::size_t tile_dim) {
  return std::make_unique<MaskBackend>(
      "oracle_phantom",
      scale_limited_mask(pc.branches, pc.gt.shape(), ir, min_radius_at_ir1), tile_dim);
}

PhantomCase generate_tree(const TreeSpec& spec, Shape3 dims) {
  spec.validate();
  if (dims.size() == 0) throw ShapeError("phantom dimensions must be >= 1");

  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> tilt(-5.0, 5.0);
  std::uniform_real_distribution<double> twist(-20.0, 20.0);
  constexpr double kDeg = std::numbers::pi / 180.0;

  const double r0 = spec.trunk_radius;
  const Point3 top{r0 + wall_thickness(r0) + 0.5, (static_cast<double>(dims.ny) - 1.0) / 2.0,
                   (static_cast<double>(dims.nx) - 1.0) / 2.0};

  std::vector<Branch> branches{{0, r0, top, top + spec.trunk_length * Point3{1.0, 0.0, 0.0}}};
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const Branch parent = branches[i];
    if (parent.generation >= spec.depth) continue;
    const Point3 d = unit(parent.end - parent.start);
    const Point3 ref = std::abs(d.x) < 0.9 ? Point3{0.0, 0.0, 1.0} : Point3{0.0, 1.0, 0.0};
    const Point3 u = unit(cross(d, ref));
    const Point3 v = cross(d, u);
    // Split planes alternate between the two perpendicular axes.
    Point3 w = parent.generation % 2 == 0 ? u : v;
    const double phi = twist(rng) * kDeg;
    w = std::cos(phi) * w + std::sin(phi) * cross(d, w);

    const int gen = parent.generation + 1;
    const double radius = parent.radius * spec.radius_ratio;
    const double length = spec.trunk_length * std::pow(spec.length_ratio, gen);
    for (double sign : {1.0, -1.0}) {
      const double a = (spec.branch_angle_deg + tilt(rng)) * kDeg;
      const Point3 dir = unit(std::cos(a) * d + (sign * std::sin(a)) * w);
      branches.push_back({gen, radius, parent.end, parent.end + length * dir});
    }
  }

  for (const auto& b : branches) {
    if (!fits(b, dims)) {
      throw RangeError("phantom tree does not fit in " + to_string(dims) + " (generation " +
                       std::to_string(b.generation) + " branch)");
    }
  }

  PhantomCase pc;
  pc.branches = branches;
  pc.gt = render_branches(branches, dims);
  if (pc.gt.count() == 0) throw ValidationError("phantom ground truth is empty");
  if (largest_connected_component(pc.gt, Connectivity::TwentySix).count() != pc.gt.count()) {
    throw ValidationError("phantom ground truth is not a single connected tree");
  }

  std::vector<double> base(dims.size(), kParenchymaHu);
  auto index = [&](std::size_t z, std::size_t y, std::size_t x) {
    return (z * dims.ny + y) * dims.nx + x;
  };
  for (const auto& b : branches) {
    for_each_voxel(b, wall_thickness(draw_radius(b)), dims,
                   [&](auto z, auto y, auto x) { base[index(z, y, x)] = kWallHu; });
  }
  const auto bits = pc.gt.values();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) base[i] = kLumenHu;
  }

  std::mt19937_64 noise_rng(spec.rng_seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma_hu > 0.0 ? spec.noise_sigma_hu : 1.0);
  std::vector<std::int16_t> hu(dims.size());
  for (std::size_t i = 0; i < hu.size(); ++i) {
    double v = base[i];
    if (spec.noise_sigma_hu > 0.0) v += noise(noise_rng);
    hu[i] = static_cast<std::int16_t>(std::clamp(std::round(v), -32768.0, 32767.0));
  }
  pc.volume = Volume(dims, Spacing3{}, std::move(hu));
  return pc;
}

void write_manifest(const std::vector<Branch>& branches, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write manifest " + path.string());
  out << "# generation radius start_z start_y start_x end_z end_y end_x\n";
  char buf[512];
  for (const auto& b : branches) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  b.generation, b.radius, b.start.z, b.start.y, b.start.x, b.end.z, b.end.y,
                  b.end.x);
    out << buf;
  }
  if (!out) throw InputError("write failed for " + path.string());
}

std::vector<Branch> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  std::vector<Branch> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Branch b;
    if (!(ss >> b.generation >> b.radius >> b.start.z >> b.start.y >> b.start.x >> b.end.z >>
          b.end.y >> b.end.x)) {
      throw FormatError("malformed manifest line " + std::to_string(lineno) + " in " +
                        path.string());
    }
    if (b.generation < 0 || !(b.radius > 0.0) || b.start == b.end) {
      throw FormatError("invalid branch on manifest line " + std::to_string(lineno));
    }
    out.push_back(b);
  }
  if (out.empty()) throw FormatError("manifest " + path.string() + " lists no branches");
  return out;
}

}  // namespace msairway
