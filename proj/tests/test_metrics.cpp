#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "msairway/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace msairway;
using msairway::testing::TempDir;

namespace {

Mask3D from_bits(Shape3 s, std::initializer_list<int> bits) {
  std::vector<std::uint8_t> v;
  for (int b : bits) v.push_back(static_cast<std::uint8_t>(b));
  return Mask3D(s, Spacing3{}, v);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("overlap scores on small cases") {
  const Shape3 s{1, 2, 4};
  const auto gt = from_bits(s, {1, 1, 1, 1, 0, 0, 0, 0});
  CHECK(dsc(gt, gt) == 100.0);
  CHECK(dsc(from_bits(s, {0, 0, 0, 0, 1, 1, 1, 1}), gt) == 0.0);
  // |P and G| = 2, |P| = 4, |G| = 4
  const auto half = from_bits(s, {1, 1, 0, 0, 1, 1, 0, 0});
  CHECK(dsc(half, gt) == 50.0);
  CHECK(tpr(half, gt) == 50.0);
  CHECK(fpr(half, gt) == 50.0);
  CHECK(tpr(from_bits(s, {1, 1, 1, 0, 0, 0, 0, 0}), gt) == 75.0);
}

TEST_CASE("empty masks") {
  const Shape3 s{2, 2, 2};
  const Mask3D empty(s);
  CHECK(dsc(empty, empty) == 100.0);
  CHECK_THROWS_AS(tpr(empty, empty), UndefinedMetricError);
  CHECK(fpr(empty, empty) == 0.0);
  Mask3D full(s);
  for (auto& v : full.values()) v = 1;
  CHECK(fpr(full, full) == 0.0);
  CHECK(dsc(empty, full) == 0.0);
}

TEST_CASE("shape mismatch is a validation error") {
  CHECK_THROWS_AS(dsc(Mask3D(Shape3{1, 2, 2}), Mask3D(Shape3{2, 2, 1})), ShapeError);
  CHECK_THROWS_AS(score(Mask3D(Shape3{1, 2, 2}), Mask3D(Shape3{1, 2, 3})), ValidationError);
}

TEST_CASE("scores match set algebra and stay in range") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const Shape3 s{1 + rng() % 5, 1 + rng() % 5, 1 + rng() % 5};
    const double p = (rep % 10) / 10.0;
    const auto a = msairway::testing::random_mask3d(rng, s, p);
    const auto b = msairway::testing::random_mask3d(rng, s, 0.5);
    const auto ref = oracle::set_scores(a, b);
    CHECK(dsc(a, b) == ref.dsc);
    CHECK(dsc(b, a) == dsc(a, b));
    CHECK(fpr(a, b) == ref.fpr);
    if (ref.tpr_defined) CHECK(tpr(a, b) == ref.tpr);
    CHECK(dsc(a, b) >= 0.0);
    CHECK(dsc(a, b) <= 100.0);
  }
}

TEST_CASE("per-slice DSC skips slices empty in both masks") {
  const Shape3 s{3, 1, 2};
  const auto gt = from_bits(s, {1, 1, 0, 0, 1, 0});
  const auto pr = from_bits(s, {1, 1, 0, 0, 0, 1});
  CHECK(dsc_per_slice(pr, gt) == doctest::Approx(50.0));
}

TEST_CASE("summary uses the sample standard deviation") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  const std::vector<double> one{7.0};
  CHECK(summarize(one).sd == 0.0);
  CHECK(summarize(std::vector<double>{}).mean == 0.0);
}

TEST_CASE("score table summaries match the published averages") {
  // Average ± SD columns of the per-strategy DSC tables.
  const std::vector<std::pair<double, double>> combined{{81.74, 2.57}, {83.45, 2.34}, {84.11, 2.52}, {84.26, 2.49}};
  const std::vector<std::pair<double, double>> focal{{79.25, 2.30}, {79.97, 2.51}, {81.04, 2.60}, {81.17, 2.65}};
  const auto c = fixtures::combined_scores();
  const auto f = fixtures::focal_scores();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto sc = summarize(c[i].values);
    const auto sf = summarize(f[i].values);
    CHECK(std::abs(sc.mean - combined[i].first) <= fixtures::kTableTolerance);
    CHECK(std::abs(sc.sd - combined[i].second) <= fixtures::kTableTolerance);
    CHECK(std::abs(sf.mean - focal[i].first) <= fixtures::kTableTolerance);
    CHECK(std::abs(sf.sd - focal[i].second) <= fixtures::kTableTolerance);
  }
}

TEST_CASE("gain tables reproduce the published gains") {
  const auto check = [](const std::vector<StrategyRow>& scores,
                        const std::vector<fixtures::ExpectedGain>& expected) {
    const auto g = gain_table(scores);
    CHECK(g.baseline == "ir1");
    CHECK(g.cases == fixtures::kCases);
    REQUIRE(g.rows.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(g.rows[i].strategy == expected[i].strategy);
      for (std::size_t k = 0; k < 5; ++k)
        CHECK(std::abs(g.rows[i].values[k] - expected[i].values[k]) <= fixtures::kTableTolerance);
      const auto s = summarize(g.rows[i].values);
      CHECK(std::abs(s.mean - expected[i].mean) <= fixtures::kTableTolerance);
      CHECK(std::abs(s.sd - expected[i].sd) <= fixtures::kTableTolerance);
    }
  };
  check(fixtures::combined_scores(), fixtures::combined_gains());
  check(fixtures::focal_scores(), fixtures::focal_gains());
}

TEST_CASE("gain means computed independently") {
  // Frozen from a direct recomputation of the per-case differences.
  const auto g = gain_table(fixtures::combined_scores());
  CHECK(summarize(g.rows[0].values).mean == doctest::Approx(1.710).epsilon(1e-9));
  CHECK(summarize(g.rows[1].values).mean == doctest::Approx(2.364).epsilon(1e-9));
  CHECK(summarize(g.rows[2].values).mean == doctest::Approx(2.508).epsilon(1e-9));
  CHECK(summarize(g.rows[0].values).sd == doctest::Approx(1.2996).epsilon(1e-4));
  CHECK(summarize(g.rows[2].values).sd == doctest::Approx(2.1191).epsilon(1e-4));
  const auto f = gain_table(fixtures::focal_scores());
  CHECK(summarize(f.rows[0].values).mean == doctest::Approx(0.714).epsilon(1e-9));
  CHECK(summarize(f.rows[1].values).sd == doctest::Approx(1.6358).epsilon(1e-4));
}

TEST_CASE("gain table errors") {
  auto rows = fixtures::combined_scores();
  CHECK_THROWS_AS(gain_table(rows, "ir2"), ValidationError);
  rows[1].cases[0] = "Other";
  CHECK_THROWS_AS(gain_table(rows), ValidationError);
}

TEST_CASE("CSV layout, rounding and round trip") {
  const auto rows = fixtures::combined_scores();
  const auto csv = table_csv(rows, fixtures::kCases);
  const auto first_line = csv.substr(0, csv.find('\n'));
  CHECK(first_line == "strategy,Subject 1,Subject 2,Patient 1,Patient 2,Patient 3,Average,SD");
  CHECK(csv.find("ir1,85.27,81.56,78.99,83.20,79.71,81.75,2.56\n") != std::string::npos);
  const auto back = parse_table_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].strategy == rows[i].strategy);
    CHECK(back[i].cases == rows[i].cases);
    CHECK(back[i].values == rows[i].values);
  }
  CHECK(table_csv(rows, fixtures::kCases) == csv);

  const std::vector<std::string> none;
  CHECK(table_csv(std::vector<StrategyRow>{}, none) == "strategy,Average,SD\n");
  const std::vector<StrategyRow> negzero{{"x", {"a"}, {-0.001}}};
  const std::vector<std::string> a{"a"};
  CHECK(table_csv(negzero, a).find("-0.00") == std::string::npos);
  CHECK_THROWS(parse_table_csv("strategy,a,Average,SD\nx,notanumber,0,0\n"));
}

TEST_CASE("text table shows mean and SD together") {
  const auto g = gain_table(fixtures::combined_scores());
  const auto txt = table_text("Gain", g.rows, g.cases);
  CHECK(txt.find("Average ± SD") != std::string::npos);
  CHECK(txt.find("1.71 ± 1.30") != std::string::npos);
}

TEST_CASE("report files are written and reproducible") {
  TempDir dir;
  const auto scores = fixtures::focal_scores();
  const auto g = gain_table(scores);
  emit_report(scores, g, dir / "run");
  for (const char* suffix : {"_scores.csv", "_scores.txt", "_gains.csv", "_gains.txt"})
    CHECK(std::filesystem::exists(dir / (std::string("run") + suffix)));
  const auto once = slurp(dir / "run_gains.csv");
  emit_report(scores, g, dir / "run");
  CHECK(slurp(dir / "run_gains.csv") == once);
}
