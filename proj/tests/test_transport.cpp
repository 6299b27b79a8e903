#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "sprayholo/transport.hpp"
#include "testmodels.hpp"

using namespace sprayholo;
using Catch::Matchers::WithinAbs;
using shtest::make_model;

namespace {

std::shared_ptr<const SprayModel> coordinate_flat() {
  auto m = std::make_shared<SprayModel>();
  m->n = 2;
  m->G = {parse_expression("0"), parse_expression("0")};
  return m;
}

double eval_candidate(const SprayModel& m, const ExprPtr& E,
                      const std::vector<double>& z) {
  return evaluate_at(E, m.n, z, m.params);
}

const ExprPtr& builtin_E(int which, std::size_t k) {
  return builtin_examples()[static_cast<std::size_t>(which - 1)]
      .candidates[k]
      .E;
}

double vec_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

} // namespace

TEST_CASE("curve construction and sampling") {
  BaseCurve sq = BaseCurve::square(std::vector<double>{0.1, -0.2}, 0.3);
  CHECK(sq.n == 2);
  CHECK(sq.segment_count() == 4);
  CHECK(sq.closed(1e-12, nullptr));
  std::vector<double> pos(2), vel(2);
  sq.position_velocity(0.125, nullptr, pos, vel); // halfway along the first side
  CHECK_THAT(pos[0], WithinAbs(0.25, 1e-15));
  CHECK_THAT(pos[1], WithinAbs(-0.2, 1e-15));
  CHECK_THAT(vel[0], WithinAbs(1.2, 1e-15)); // side 0.3 over a span of 1/4
  CHECK_THAT(vel[1], WithinAbs(0.0, 1e-15));

  BaseCurve rev = sq.reversed();
  std::vector<double> rpos(2), rvel(2);
  rev.position_velocity(0.875, nullptr, rpos, rvel);
  CHECK_THAT(rpos[0], WithinAbs(pos[0], 1e-15));
  CHECK_THAT(rpos[1], WithinAbs(pos[1], 1e-15));
  CHECK_THAT(rvel[0], WithinAbs(-vel[0], 1e-15));
  CHECK_THAT(rvel[1], WithinAbs(-vel[1], 1e-15));

  CHECK_THROWS_AS(BaseCurve::polyline({{0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(BaseCurve::polyline({{0.0, 0.0}, {1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(BaseCurve::square(std::vector<double>{0.5}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      BaseCurve::from_expressions({"t", "frequency*t"}, {}), ParseError);
}

TEST_CASE("expression curves differentiate their parametrization") {
  double pi = std::numbers::pi;
  BaseCurve circ = BaseCurve::from_expressions(
      {"r*cos(2*pi*t)", "r*sin(2*pi*t)"}, {{"r", 0.1}, {"pi", pi}});
  CHECK(circ.closed(1e-12, nullptr));
  std::vector<double> pos(2), vel(2);
  circ.position_velocity(0.25, nullptr, pos, vel);
  CHECK_THAT(pos[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(pos[1], WithinAbs(0.1, 1e-15));
  CHECK_THAT(vel[0], WithinAbs(-0.2 * pi, 1e-14));
  CHECK_THAT(vel[1], WithinAbs(0.0, 1e-14));
}

TEST_CASE("geodesics of the flat spray are straight lines") {
  auto flat = coordinate_flat();
  std::vector<double> z0{0.0, 0.0, 1.0, 2.0};
  Trajectory tr = geodesic(*flat, z0, 1.0, 100);
  REQUIRE(tr.states.size() == 101);
  CHECK_FALSE(tr.truncated);
  CHECK_THAT(tr.times.back(), WithinAbs(1.0, 1e-12));
  const auto& end = tr.states.back();
  CHECK_THAT(end[0], WithinAbs(1.0, 1e-13));
  CHECK_THAT(end[1], WithinAbs(2.0, 1e-13));
  CHECK_THAT(end[2], WithinAbs(1.0, 1e-13));
  CHECK_THAT(end[3], WithinAbs(2.0, 1e-13));

  CHECK_THROWS_AS(geodesic(*flat, z0, 1.0, 1), std::invalid_argument);
  std::vector<double> rest{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(geodesic(*flat, rest, 1.0, 10), std::invalid_argument);
}

TEST_CASE("a vanishing second coefficient forces an affine second coordinate") {
  auto m2 = make_model(2);
  std::vector<double> z0{0.3, 1.0, 0.5, 0.7};
  Trajectory tr = geodesic(*m2, z0, 1.0, 137);
  REQUIRE_FALSE(tr.truncated);
  for (std::size_t s = 0; s < tr.states.size(); ++s) {
    CHECK(tr.states[s][3] == 0.7); // never touched by the integrator
    CHECK_THAT(tr.states[s][1], WithinAbs(1.0 + 0.7 * tr.times[s], 1e-12));
  }
}

TEST_CASE("geodesic energy is conserved along the family spray") {
  auto m3 = make_model(3);
  const ExprPtr& emu = builtin_E(3, 0);
  std::vector<double> z0{0.0, 0.0, 0.3, 0.2};
  Trajectory tr = geodesic(*m3, z0, 1.0, 1000);
  REQUIRE_FALSE(tr.truncated);
  double e0 = eval_candidate(*m3, emu, tr.states.front());
  double drift = 0;
  for (const auto& st : tr.states)
    drift = std::max(drift, std::abs(eval_candidate(*m3, emu, st) - e0));
  CHECK(drift < 1e-8);
}

TEST_CASE("trajectories that leave the evaluable domain are truncated") {
  auto m = std::make_shared<SprayModel>();
  m->n = 2;
  m->G = {parse_expression("sqrt(1-x1)"), parse_expression("0")};
  std::vector<double> z0{0.0, 0.0, 3.0, 0.0};
  Trajectory tr = geodesic(*m, z0, 1.0, 50);
  CHECK(tr.truncated);
  CHECK(tr.note.find("sqrt") != std::string::npos);
  CHECK(tr.states.size() < 51);
}

TEST_CASE("flat transport is the identity") {
  auto flat = coordinate_flat();
  BaseCurve path = BaseCurve::polyline({{0.0, 0.0}, {0.4, 0.1}, {0.3, 0.7}});
  std::vector<double> v0{0.6, -0.2};
  TransportResult tr = horizontal_lift(*flat, path, v0, 100);
  CHECK_FALSE(tr.flagged);
  CHECK(tr.v1[0] == 0.6);
  CHECK(tr.v1[1] == -0.2);
  CHECK(tr.error_estimate == 0.0);
  CHECK(tr.steps == 100);
  CHECK(tr.trace.size() == 101);
}

TEST_CASE("flat-family loops have trivial holonomy") {
  auto m4 = make_model(4);
  BaseCurve loop = BaseCurve::square(std::vector<double>{0.0, 0.0}, 0.2);
  std::vector<double> v0{1.0, 0.0};
  TransportResult tr = horizontal_lift(*m4, loop, v0, 2000);
  REQUIRE_FALSE(tr.flagged);
  CHECK(tr.steps == 2000);
  CHECK(vec_gap(tr.v1, tr.v0) < 1e-7);
}

TEST_CASE("constant-curvature loops genuinely rotate vectors") {
  auto m3 = make_model(3);
  BaseCurve loop = BaseCurve::square(std::vector<double>{0.0, 0.0}, 0.2);
  std::vector<double> v0{1.0, 0.0};
  TransportResult tr = horizontal_lift(*m3, loop, v0, 2000);
  REQUIRE_FALSE(tr.flagged);
  CHECK(vec_gap(tr.v1, tr.v0) > 1e-3);
  CHECK(tr.error_estimate < 1e-8); // integrator converged far below the defect
}

TEST_CASE("transport around a loop then its reverse returns the vector") {
  for (int which : {1, 3}) {
    auto m = make_model(which);
    std::vector<double> corner =
        which == 1 ? std::vector<double>{0.1, 0.8} : std::vector<double>{0.0, 0.0};
    BaseCurve loop = BaseCurve::square(corner, 0.2);
    std::vector<double> v0{1.0, 0.3};
    TransportResult fwd = horizontal_lift(*m, loop, v0, 1200);
    REQUIRE_FALSE(fwd.flagged);
    TransportResult back = horizontal_lift(*m, loop.reversed(), fwd.v1, 1200);
    REQUIRE_FALSE(back.flagged);
    CHECK(vec_gap(back.v1, v0) < 1e-9);
  }
}

TEST_CASE("lifts that leave the evaluable domain are flagged") {
  auto m = std::make_shared<SprayModel>();
  m->n = 2;
  m->G = {parse_expression("sqrt(x2)*y1^2"), parse_expression("0")};
  BaseCurve loop = BaseCurve::square(std::vector<double>{0.0, -0.05}, 0.2);
  std::vector<double> v0{1.0, 0.0};
  TransportResult tr = horizontal_lift(*m, loop, v0, 100);
  CHECK(tr.flagged);
  CHECK(tr.note.find("sqrt") != std::string::npos);

  CHECK_THROWS_AS(horizontal_lift(*m, loop, std::vector<double>{0.0, 0.0}, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(horizontal_lift(*m, loop, std::vector<double>{1.0, 0.0, 0.0}, 100),
                  std::invalid_argument);
}

TEST_CASE("invariance by transport separates invariant from plain candidates") {
  auto flat = coordinate_flat();
  BaseCurve loop0 = BaseCurve::square(std::vector<double>{-0.1, -0.1}, 0.25);
  ExprPtr kin = parse_expression("(y1^2+y2^2)/2");
  CHECK(invariance_by_transport(*flat, kin, loop0, std::vector<double>{0.4, 1.1},
                                400) < 1e-12);

  // based away from the origin, where the family energy and the plain
  // kinetic term genuinely differ
  auto m3 = make_model(3);
  BaseCurve loop = BaseCurve::square(std::vector<double>{0.3, -0.2}, 0.2);
  std::vector<double> v0{1.0, 0.0};
  TransportResult moved;
  double drift = invariance_by_transport(*m3, builtin_E(3, 0), loop, v0, 2000,
                                         &moved);
  CHECK(drift < 1e-6);
  CHECK(vec_gap(moved.v1, moved.v0) > 1e-3); // invariant even though the vector moved

  CHECK(invariance_by_transport(*m3, kin, loop, v0, 2000) > 1e-3);

  BaseCurve open = BaseCurve::polyline({{0.0, 0.0}, {0.2, 0.0}});
  CHECK_THROWS_AS(invariance_by_transport(*m3, kin, open, v0, 100),
                  std::invalid_argument);
}

TEST_CASE("invariance holds around smooth expression loops as well") {
  auto m3 = make_model(3);
  BaseCurve circ = BaseCurve::from_expressions(
      {"r*cos(2*pi*t)", "r*sin(2*pi*t)"},
      {{"r", 0.15}, {"pi", std::numbers::pi}});
  std::vector<double> v0{0.8, 0.4};
  TransportResult moved;
  double drift =
      invariance_by_transport(*m3, builtin_E(3, 0), circ, v0, 2000, &moved);
  REQUIRE_FALSE(moved.flagged);
  CHECK(drift < 1e-6);
  CHECK(vec_gap(moved.v1, moved.v0) > 1e-3);
}

TEST_CASE("the integrator converges at fourth order") {
  auto m3 = make_model(3);
  std::vector<double> z0{0.0, 0.0, 0.3, 0.2};
  double p = geodesic_convergence_order(*m3, z0, 1.0, 20);
  CHECK(p > 3.5);
  CHECK(p < 4.5);

  auto flat = coordinate_flat();
  std::vector<double> s0{0.0, 0.0, 1.0, 2.0};
  CHECK(geodesic_convergence_order(*flat, s0, 1.0, 10) == 4.0);
}

TEST_CASE("shrinking-loop defects are explained by the curvature") {
  struct Probe {
    int which;
    std::vector<double> base;
    std::vector<double> v0;
  };
  for (const Probe& pr : {Probe{3, {0.0, 0.0}, {1.0, 0.0}},
                          Probe{1, {0.1, 1.0}, {0.5, 0.3}}}) {
    auto m = make_model(pr.which);
    const std::vector<double> eps{0.2, 0.1, 0.05};
    std::vector<Eigen::VectorXd> d;
    for (double e : eps) {
      BaseCurve loop = BaseCurve::square(pr.base, e);
      TransportResult tr = horizontal_lift(*m, loop, pr.v0, 2000);
      REQUIRE_FALSE(tr.flagged);
      Eigen::VectorXd di(2);
      for (int i = 0; i < 2; ++i) di(i) = (tr.v1[static_cast<std::size_t>(i)] -
                                           tr.v0[static_cast<std::size_t>(i)]) /
                                          (e * e);
      d.push_back(di);
    }
    // quadratic extrapolation of defect/eps^2 to eps = 0
    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < 3; ++i) {
      double w = 1.0;
      for (int j = 0; j < 3; ++j)
        if (j != i) w *= eps[static_cast<std::size_t>(j)] /
                         (eps[static_cast<std::size_t>(j)] - eps[static_cast<std::size_t>(i)]);
      c0 += w * d[static_cast<std::size_t>(i)];
    }
    std::vector<double> z0(pr.base);
    z0.insert(z0.end(), pr.v0.begin(), pr.v0.end());
    CurvatureData cd = curvature(*m, z0);
    Eigen::VectorXd col(2);
    for (int i = 0; i < 2; ++i) col(i) = cd.at(i, 0, 1);
    REQUIRE(col.norm() > 1e-12);
    double proj = col.dot(c0) / col.squaredNorm();
    double rel = (c0 - proj * col).norm() / c0.norm();
    INFO("model " << pr.which << " relative residual " << rel);
    CHECK(rel < 1e-3);
  }
}
