#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "sprayholo/holonomy.hpp"
#include "testmodels.hpp"

using namespace sprayholo;
using Catch::Matchers::WithinAbs;
using shtest::make_model;
using shtest::pinned_point;
using shtest::sample_in_box;
using shtest::samples_in_box;

namespace {

std::shared_ptr<const SprayModel> coordinate_flat() {
  auto m = std::make_shared<SprayModel>();
  m->n = 2;
  m->G = {parse_expression("0"), parse_expression("0")};
  m->box_lo = {-1.0, -1.0, 0.25, 0.25};
  m->box_hi = {1.0, 1.0, 2.0, 2.0};
  return m;
}

} // namespace

TEST_CASE("saturation ranks at the pinned point") {
  auto P = pinned_point();

  SaturationResult s1 = saturate(make_model(1), P);
  CHECK(s1.rank == 4);
  CHECK_FALSE(s1.depth_exhausted);

  SaturationResult s2 = saturate(make_model(2), P);
  CHECK(s2.rank == 3);
  CHECK_FALSE(s2.depth_exhausted);
  REQUIRE(s2.words.size() == 3);
  CHECK(s2.words[0] == "h1");
  CHECK(s2.words[1] == "h2");
  CHECK(s2.words[2] == "[h1,h2]");

  SaturationResult s4 = saturate(make_model(4), P);
  CHECK(s4.rank == 2);
  CHECK(s4.words == std::vector<std::string>{"h1", "h2"});
}

TEST_CASE("flat spray saturates at the frame itself") {
  auto m = coordinate_flat();
  std::mt19937_64 rng(67);
  for (int it = 0; it < 5; ++it) {
    auto z = sample_in_box(*m, rng);
    SaturationResult s = saturate(m, z);
    CHECK(s.rank == 2);
    CHECK_FALSE(s.depth_exhausted);
  }
}

TEST_CASE("rank never exceeds the chart dimension and contains the frame") {
  std::mt19937_64 rng(71);
  for (int which : {1, 2, 3, 4}) {
    auto m = make_model(which);
    for (int it = 0; it < 5; ++it) {
      auto z = sample_in_box(*m, rng);
      SaturationResult s = saturate(m, z);
      CHECK(s.rank >= 2);
      CHECK(s.rank <= 4);
      CHECK(s.words[0] == "h1");
      CHECK(s.words[1] == "h2");
    }
  }
}

TEST_CASE("rank is monotone in the bracket depth cap") {
  auto P = pinned_point();
  for (int which : {1, 2, 3}) {
    auto m = make_model(which);
    int prev = 0;
    for (int cap = 1; cap <= 4; ++cap) {
      SaturationConfig cfg;
      cfg.max_bracket_depth = cap;
      SaturationResult s = saturate(m, P, cfg);
      CHECK(s.rank >= prev);
      prev = s.rank;
    }
  }

  SaturationConfig shallow;
  shallow.max_bracket_depth = 1;
  SaturationResult s = saturate(make_model(1), P, shallow);
  CHECK(s.rank == 3);
  CHECK(s.depth_exhausted); // the cap stopped a still-growing basis
}

TEST_CASE("Liouville membership splits the examples") {
  auto P = pinned_point();

  SaturationResult s1 = saturate(make_model(1), P);
  auto [in1, res1] = contains_liouville(s1.basis, P, 1e-6);
  CHECK(in1);
  CHECK(res1 < 1e-10);

  SaturationResult s2 = saturate(make_model(2), P);
  auto [in2, res2] = contains_liouville(s2.basis, P, 1e-6);
  CHECK_FALSE(in2);
  CHECK_THAT(res2, WithinAbs(1.0 / std::sqrt(2.0), 1e-12));

  std::mt19937_64 rng(73);
  auto m3 = make_model(3);
  for (int it = 0; it < 10; ++it) {
    auto z = sample_in_box(*m3, rng);
    SaturationResult s3 = saturate(m3, z);
    CHECK(s3.rank == 3);
    auto [in3, res3] = contains_liouville(s3.basis, z, 1e-6);
    CHECK_FALSE(in3);
    CHECK(res3 > 1e-3);
  }

  auto flat = coordinate_flat();
  std::vector<double> z{0.3, -0.2, 1.0, 0.5};
  SaturationResult sf = saturate(flat, z);
  auto [inf_, resf] = contains_liouville(sf.basis, z, 1e-6);
  CHECK_FALSE(inf_);
  CHECK_THAT(resf, WithinAbs(1.0, 1e-12));
}

TEST_CASE("vertical diagnostics at the pinned point") {
  auto P = pinned_point();

  auto m2 = make_model(2);
  SaturationResult s2 = saturate(m2, P);
  VerticalDiagnostics v2 = vertical_diagnostics(*m2, s2.basis, P, 1e-6);
  CHECK(v2.vertical_rank == 1);
  REQUIRE(v2.coordinate_vertical.size() == 2);
  CHECK(v2.coordinate_vertical[0]);
  CHECK_FALSE(v2.coordinate_vertical[1]);

  auto m1 = make_model(1);
  SaturationResult s1 = saturate(m1, P);
  VerticalDiagnostics v1 = vertical_diagnostics(*m1, s1.basis, P, 1e-6);
  CHECK(v1.vertical_rank == 2);
  CHECK(v1.coordinate_vertical == std::vector<bool>{true, true});

  auto flat = coordinate_flat();
  std::vector<double> z{0.3, -0.2, 1.0, 0.5};
  SaturationResult sf = saturate(flat, z);
  VerticalDiagnostics vf = vertical_diagnostics(*flat, sf.basis, z, 1e-6);
  CHECK(vf.vertical_rank == 0);
  CHECK(vf.coordinate_vertical == std::vector<bool>{false, false});
}

TEST_CASE("vertical rank equals rank minus n across the examples") {
  std::mt19937_64 rng(79);
  for (int which : {1, 2, 3, 4}) {
    auto m = make_model(which);
    for (int it = 0; it < 5; ++it) {
      auto z = sample_in_box(*m, rng);
      SaturationResult s = saturate(m, z);
      VerticalDiagnostics v = vertical_diagnostics(*m, s.basis, z, 1e-6);
      CHECK(v.vertical_rank == s.rank - 2);
    }
  }
}

TEST_CASE("adding the Liouville generator grows the rank by at most one") {
  std::mt19937_64 rng(83);
  for (int which : {1, 2, 3, 4}) {
    auto m = make_model(which);
    auto C = std::make_shared<LiouvilleField>(2);
    for (int it = 0; it < 5; ++it) {
      auto z = sample_in_box(*m, rng);
      SaturationResult plain = saturate(m, z);
      SaturationResult wide = saturate(m, z, {}, {C});
      CHECK(wide.rank <= plain.rank + 1);
      CHECK(wide.rank >= plain.rank);
      if (which == 3) {
        CHECK(plain.rank == 3);
        CHECK(wide.rank == 4);
      }
    }
  }
}

TEST_CASE("the curvature image lies inside the saturated span") {
  std::mt19937_64 rng(89);
  for (int which : {1, 2, 3}) {
    auto m = make_model(which);
    for (int it = 0; it < 5; ++it) {
      auto z = sample_in_box(*m, rng);
      SaturationResult s = saturate(m, z);
      CurvatureData cd = curvature(*m, z);
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
          for (int i = 0; i < 2; ++i) v(2 + i) = cd.at(i, j, k);
          double nv = v.norm();
          if (nv < 1e-12) continue;
          Eigen::VectorXd w = s.basis.colPivHouseholderQr().solve(v);
          CHECK((s.basis * w - v).norm() / nv < 1e-6);
        }
    }
  }
}

TEST_CASE("distribution analysis aggregates sampled ranks") {
  auto m2 = make_model(2);
  DistributionReport r2 = analyze_distribution(m2, samples_in_box(*m2, 50, 1001));
  CHECK(r2.n == 2);
  CHECK(r2.points.size() == 50);
  CHECK(r2.generic_rank == 3);
  CHECK(r2.generic_codim == 1);
  CHECK_FALSE(r2.non_regular_suspected);
  CHECK(r2.rank_histogram.at(3) == 50);
  CHECK(r2.notices.empty());
  for (const auto& p : r2.points) {
    CHECK(p.coordinate_vertical[0]);
    CHECK_FALSE(p.liouville_member);
  }

  auto m4 = make_model(4);
  DistributionReport r4 = analyze_distribution(m4, samples_in_box(*m4, 50, 1002));
  CHECK(r4.generic_rank == 2);
  CHECK(r4.generic_codim == 2);

  auto m1 = make_model(1);
  DistributionReport r1 = analyze_distribution(m1, samples_in_box(*m1, 20, 1003));
  CHECK(r1.generic_rank == 4);
  CHECK(r1.generic_codim == 0);
  for (const auto& p : r1.points) {
    CHECK(p.liouville_member);
    CHECK(p.liouville_residual < 1e-6);
  }
}

TEST_CASE("points that fail to evaluate are skipped with a notice") {
  auto m = std::make_shared<SprayModel>();
  m->n = 2;
  m->G = {parse_expression("y1^2/x1"), parse_expression("0")};
  std::vector<std::vector<double>> pts = {
      {0.5, 0.5, 1.0, 1.0}, {0.0, 0.5, 1.0, 1.0}, {0.25, 0.5, 1.0, 1.0}};
  DistributionReport rep = analyze_distribution(m, pts);
  CHECK(rep.points.size() == 2);
  REQUIRE(rep.notices.size() == 1);
  CHECK(rep.notices[0].find("sample 1 skipped") != std::string::npos);
  CHECK(rep.notices[0].find("division by zero") != std::string::npos);
}

TEST_CASE("a non-constant sampled rank raises the non-regular flag") {
  // crafted semi-spray whose bracket vanishes on the x1 = 0 slice
  auto m = std::make_shared<SprayModel>();
  m->n = 2;
  m->G = {parse_expression("x1^2*y2^2/2"), parse_expression("0")};
  std::vector<std::vector<double>> pts = {{0.0, 0.0, 1.0, 1.0},
                                          {0.5, 0.0, 1.0, 1.0}};
  DistributionReport rep = analyze_distribution(m, pts);
  REQUIRE(rep.points.size() == 2);
  CHECK(rep.points[0].rank != rep.points[1].rank);
  CHECK(rep.non_regular_suspected);
}
