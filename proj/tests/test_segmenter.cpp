#include <algorithm>
#include <deque>
#include <fstream>
#include <random>

#include "doctest.h"
#include "msairway/segmenter.hpp"
#include "msairway/volgrid.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace msairway;
using msairway::testing::TempDir;

namespace {

SliceImage const_tile(std::size_t n, float v) { return SliceImage(FloatGrid(Shape2{n, n}, v)); }

std::string echo_command(const std::string& extra = "") {
  return std::string(STX_ECHO_PATH) + " {in_dir} {out_dir}" + extra;
}

// Straight tube along z of radius 2 around (ny/2, nx/2), lumen -1000 HU in a
// -800 HU background.
Volume tube_volume(Shape3 s) {
  std::vector<std::int16_t> hu(s.size(), -800);
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) {
        const double dy = double(y) - double(s.ny / 2), dx = double(x) - double(s.nx / 2);
        if (dy * dy + dx * dx <= 4.0) hu[(z * s.ny + y) * s.nx + x] = -1000;
      }
  return Volume(s, Spacing3{}, std::move(hu));
}

// Brute-force region growth: repeatedly add any qualifying voxel adjacent
// (6-connectivity) to the region until nothing changes.
Mask3D grow_by_sweeps(const Volume& v, std::array<std::size_t, 3> seed, int hu_max) {
  const auto& s = v.shape();
  Mask3D m(s);
  m.set(seed[0], seed[1], seed[2], true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t z = 0; z < s.nz; ++z)
      for (std::size_t y = 0; y < s.ny; ++y)
        for (std::size_t x = 0; x < s.nx; ++x) {
          if (m(z, y, x) || v(z, y, x) > hu_max) continue;
          const bool touch = (z > 0 && m(z - 1, y, x)) || (z + 1 < s.nz && m(z + 1, y, x)) ||
                             (y > 0 && m(z, y - 1, x)) || (y + 1 < s.ny && m(z, y + 1, x)) ||
                             (x > 0 && m(z, y, x - 1)) || (x + 1 < s.nx && m(z, y, x + 1));
          if (touch) {
            m.set(z, y, x, true);
            changed = true;
          }
        }
  }
  return m;
}

}  // namespace

TEST_CASE("threshold backend marks dark pixels") {
  ThresholdBackend b(60.0);
  const auto bright = b.predict_tile({}, const_tile(16, 200.0F));
  CHECK(std::all_of(bright.grid().values().begin(), bright.grid().values().end(),
                    [](float v) { return v == 0.0F; }));

  FloatGrid g(Shape2{16, 16}, 200.0F);
  g(3, 11) = 10.0F;
  const auto one = b.predict_tile({}, SliceImage(g));
  std::size_t ones = 0;
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      if (one(y, x) == 1.0F) {
        ++ones;
        CHECK(y == 3);
        CHECK(x == 11);
      }
    }
  CHECK(ones == 1);
  // The boundary intensity counts as lumen.
  CHECK(b.predict_tile({}, const_tile(8, 60.0F))(0, 0) == 1.0F);
}

TEST_CASE("built-in backends are deterministic") {
  std::mt19937_64 rng(4);
  const SliceImage tile(msairway::testing::random_grid(rng, Shape2{32, 32}));
  ThresholdBackend b(100.0);
  CHECK(b.predict_tile({}, tile) == b.predict_tile({}, tile));
}

TEST_CASE("mask backend serves up-sampled zero-padded tiles") {
  Mask3D m(Shape3{2, 3, 3});
  m.set(1, 2, 2, true);
  MaskBackend b("oracle_phantom", m, 4);
  // ir 2: the 6x6 up-sampled slice splits into 2x2 tiles of 4 with padding.
  const auto t = b.predict_tile({"c", 2, 1, 1, 1}, const_tile(4, 0.0F));
  // Up-sampled voxel (2,2) covers rows/cols 4..5 -> tile (1,1) local 0..1.
  CHECK(t(0, 0) == 1.0F);
  CHECK(t(1, 1) == 1.0F);
  CHECK(t(2, 2) == 0.0F);  // padding
  CHECK(b.predict_tile({"c", 2, 0, 1, 1}, const_tile(4, 0.0F))(0, 0) == 0.0F);
  CHECK_THROWS_AS(b.predict_tile({"c", 2, 5, 0, 0}, const_tile(4, 0.0F)), IndexError);
  CHECK_THROWS_AS(b.predict_tile({"c", 2, 0, 0, 0}, const_tile(8, 0.0F)), ShapeError);
}

TEST_CASE("external backend round trips tiles through the echo fixture") {
  TempDir dir;
  ExternalBackend b({echo_command(), dir.path(), std::chrono::seconds(60), false});
  std::mt19937_64 rng(9);
  const SliceImage tile(msairway::testing::random_grid(rng, Shape2{64, 64}));
  const auto out = b.predict_tile({"case7", 2, 3, 1, 0}, tile);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 64; ++x) CHECK(std::abs(out(y, x) - tile(y, x) / 255.0) < 1e-6);
  // Exchange files are cleaned up afterwards.
  CHECK(!std::filesystem::exists(dir / "in/case7/2"));
}

TEST_CASE("external backend runs the command once per scale") {
  TempDir dir;
  const auto counter = dir / "count.txt";
  ExternalOptions o;
  o.command = echo_command() + " && echo run >> " + counter.string();
  o.work_dir = dir / "work";
  o.keep_files = true;
  ExternalBackend b(o);

  std::mt19937_64 rng(10);
  std::vector<FloatGrid> slices;
  for (int z = 0; z < 3; ++z) slices.push_back(msairway::testing::random_grid(rng, Shape2{20, 12}));
  std::vector<TileSet<float>> got(3);
  b.predict_scale({"c1", 2, 3, 2},
                  [&](std::size_t z) { return split(slices[z], 8, Padding::Edge); },
                  [&](std::size_t z, TileSet<float> m) { got[z] = std::move(m); });

  std::ifstream in(counter);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  CHECK(std::count(all.begin(), all.end(), '\n') == 1);
  for (std::size_t z = 0; z < 3; ++z) {
    REQUIRE(got[z].tiles.size() == 6);
    const auto merged = merge(got[z]);
    for (std::size_t i = 0; i < merged.size(); ++i) {
      CHECK(std::abs(merged.values()[i] - slices[z].values()[i] / 255.0F) < 1e-6);
    }
  }
  // kept files follow the naming convention
  CHECK(std::filesystem::exists(dir / "work/in/c1/2/2/2_1.stx"));
  CHECK(std::filesystem::exists(dir / "work/out/c1/2/0/0_0.stx"));
}

TEST_CASE("external backend failures are reported as backend errors") {
  TempDir dir;
  const auto tile = const_tile(8, 1.0F);
  SUBCASE("nonzero exit") {
    ExternalBackend b({"exit 3", dir.path(), std::chrono::seconds(10), false});
    CHECK_THROWS_AS(b.predict_tile({"c", 1, 0, 0, 0}, tile), BackendError);
  }
  SUBCASE("missing outputs") {
    ExternalBackend b({"true", dir.path(), std::chrono::seconds(10), false});
    CHECK_THROWS_AS(b.predict_tile({"c", 1, 0, 0, 0}, tile), BackendError);
  }
  SUBCASE("malformed outputs") {
    ExternalBackend b({echo_command(" --garbage"), dir.path(), std::chrono::seconds(10), false});
    CHECK_THROWS_AS(b.predict_tile({"c", 1, 0, 0, 0}, tile), BackendError);
  }
  SUBCASE("timeout") {
    ExternalBackend b({"sleep 5", dir.path(), std::chrono::seconds(1), false});
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(b.predict_tile({"c", 1, 0, 0, 0}, tile), BackendError);
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(4));
  }
}

TEST_CASE("command placeholders are substituted") {
  CHECK(expand_command("run {in_dir} {out_dir} {in_dir}", "/a", "/b") == "run /a /b /a");
}

TEST_CASE("region growing fills a uniform volume") {
  const Volume v(Shape3{4, 5, 6}, Spacing3{}, std::vector<std::int16_t>(120, -1000));
  const auto m = region_grow(v, {1, 2, 3}, -900);
  CHECK(m.count() == 120);
}

TEST_CASE("region growing recovers exactly the tube") {
  const auto v = tube_volume(Shape3{10, 15, 15});
  const auto m = region_grow(v, {4, 7, 7}, -900);
  CHECK(m == grow_by_sweeps(v, {4, 7, 7}, -900));
  std::size_t tube = 0;
  for (auto hu : v.values()) tube += hu == -1000;
  CHECK(m.count() == tube);
}

TEST_CASE("region growing with a strict limit keeps only the seed") {
  std::vector<std::int16_t> hu(27, 0);
  hu[13] = -1000;
  const Volume v(Shape3{3, 3, 3}, Spacing3{}, hu);
  const auto m = region_grow(v, {1, 1, 1}, -999);
  CHECK(m.count() == 1);
  CHECK(m(1, 1, 1) == 1);
}

TEST_CASE("region growing errors") {
  const auto v = tube_volume(Shape3{4, 9, 9});
  CHECK_THROWS_AS(region_grow(v, {4, 0, 0}, -900), IndexError);
  CHECK_THROWS_AS(region_grow(v, {0, 0, 0}, -900), ValidationError);
}

TEST_CASE("region growing is connected, satisfies the predicate and is monotone") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> hu(-1000, -700);
  for (int rep = 0; rep < 10; ++rep) {
    const Shape3 s{6, 7, 8};
    std::vector<std::int16_t> data(s.size());
    for (auto& d : data) d = static_cast<std::int16_t>(hu(rng));
    data[0] = -1000;
    const Volume v(s, Spacing3{}, data);
    Mask3D prev(s);
    for (int limit : {-950, -900, -850, -800, -750}) {
      const auto m = region_grow(v, {0, 0, 0}, limit);
      CHECK(m == grow_by_sweeps(v, {0, 0, 0}, limit));
      CHECK(oracle::component_count(m, 6) == 1);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (m.values()[i]) CHECK(v.values()[i] <= limit);
        if (prev.values()[i]) CHECK(m.values()[i] == 1);
      }
      prev = m;
    }
    // 26-connectivity only ever grows the region.
    const auto m6 = region_grow(v, {0, 0, 0}, -850);
    const auto m26 = region_grow(v, {0, 0, 0}, -850, Connectivity::TwentySix);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (m6.values()[i]) CHECK(m26.values()[i] == 1);
    }
  }
}

TEST_CASE("backend factory validates specs") {
  const auto v = tube_volume(Shape3{3, 8, 8});
  const CaseContext ctx{"c", 1, &v, 8};
  CHECK_THROWS_AS(make_backend({"magic", {}}, ctx), ConfigError);
  CHECK_THROWS_AS(make_backend({"threshold", {}}, ctx), ConfigError);
  CHECK_THROWS_AS(make_backend({"threshold", {{"threshold", "abc"}}}, ctx), ConfigError);
  CHECK_THROWS_AS(make_backend({"external", {}}, ctx), ConfigError);
  CHECK_THROWS_AS(make_backend({"region_grow", {{"seed", "1,2"}, {"hu_max", "-900"}}}, ctx),
                  ConfigError);
  CHECK_THROWS_AS(make_backend({"oracle_phantom", {}}, ctx), ConfigError);
  CHECK(make_backend({"threshold", {{"threshold", "50"}}}, ctx)->kind() == "threshold");
  const auto rg = make_backend({"region_grow", {{"seed", "1,4,4"}, {"hu_max", "-900"}}}, ctx);
  CHECK(rg->kind() == "region_grow");
  CHECK(dynamic_cast<const MaskBackend&>(*rg).mask() == region_grow(v, {1, 4, 4}, -900));
}

TEST_CASE("oracle backend from a mask file") {
  TempDir dir;
  const auto v = tube_volume(Shape3{3, 8, 8});
  Mask3D gt(v.shape());
  gt.set(1, 2, 3, true);
  write_mask(gt, dir / "gt.mhd");
  const CaseContext ctx{"c", 2, &v, 8};
  const auto b = make_backend({"oracle_phantom", {{"mask", (dir / "gt.mhd").string()}}}, ctx);
  CHECK(dynamic_cast<const MaskBackend&>(*b).mask() == gt);

  Mask3D wrong(Shape3{2, 8, 8});
  write_mask(wrong, dir / "wrong.mhd");
  CHECK_THROWS_AS(make_backend({"oracle_phantom", {{"mask", (dir / "wrong.mhd").string()}}}, ctx),
                  ShapeError);
}
