#pragma once

// Parallel translation along base curves through horizontal lifts, geodesic
// integration, and invariance-by-transport drifts. Fixed-step classical RK4
// throughout: reported drifts must be reproducible, and the dimensions are
// small enough that adaptivity buys nothing.

#include <array>
#include <cmath>
#include <stdexcept>

#include "sprayholo/geometry.hpp"

namespace sprayholo {

// A curve in the base manifold, either a polyline through chart points or a
// tuple of coordinate expressions in the parameter t on [0, 1].
struct BaseCurve {
  int n = 0;
  std::vector<std::vector<double>> vertices; // polyline mode
  std::vector<ExprPtr> coords;               // parameter mode
  std::map<std::string, double> params;      // curve-local constants, win on clash
  bool backwards = false;

  static BaseCurve polyline(std::vector<std::vector<double>> pts) {
    if (pts.size() < 2) throw std::invalid_argument("polyline needs two points");
    BaseCurve c;
    c.n = static_cast<int>(pts.front().size());
    for (const auto& p : pts)
      if (static_cast<int>(p.size()) != c.n)
        throw std::invalid_argument("polyline points disagree in dimension");
    c.vertices = std::move(pts);
    return c;
  }

  // axis-aligned square loop in the (x1, x2) plane, counterclockwise
  static BaseCurve square(std::span<const double> corner, double side) {
    if (corner.size() < 2)
      throw std::invalid_argument("square loop needs base dimension >= 2");
    std::vector<double> p0(corner.begin(), corner.end());
    auto shift = [&](double d1, double d2) {
      std::vector<double> p = p0;
      p[0] += d1;
      p[1] += d2;
      return p;
    };
    return polyline({p0, shift(side, 0), shift(side, side), shift(0, side), p0});
  }

  static BaseCurve from_expressions(const std::vector<std::string>& srcs,
                                    const std::map<std::string, double>& params) {
    BaseCurve c;
    c.n = static_cast<int>(srcs.size());
    c.params = params;
    std::set<std::string> names{"t"};
    for (const auto& kv : params) names.insert(kv.first);
    for (const auto& s : srcs)
      c.coords.push_back(parse_expression(s, 0, names));
    return c;
  }

  int segment_count() const {
    return vertices.empty() ? 1 : static_cast<int>(vertices.size()) - 1;
  }

  BaseCurve reversed() const {
    BaseCurve c = *this;
    c.backwards = !c.backwards;
    return c;
  }

  void position_velocity(double t, const std::map<std::string, double>* params,
                         std::span<double> pos, std::span<double> vel) const {
    const double tt = backwards ? 1.0 - t : t;
    if (!vertices.empty()) {
      const int k = segment_count();
      double u = tt * k;
      int i = std::min(static_cast<int>(std::floor(u)), k - 1);
      if (i < 0) i = 0;
      double s = u - i;
      const auto& a = vertices[static_cast<std::size_t>(i)];
      const auto& b = vertices[static_cast<std::size_t>(i) + 1];
      for (int j = 0; j < n; ++j) {
        pos[static_cast<std::size_t>(j)] = a[static_cast<std::size_t>(j)] +
            s * (b[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)]);
        vel[static_cast<std::size_t>(j)] =
            (b[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)]) * k;
      }
    } else {
      Jet tj = Jet::variable(tt, 0, 1, 1);
      std::map<std::string, Jet> bound{{"t", tj}};
      std::array<Jet, 1> shape{tj};
      std::map<std::string, double> merged = this->params;
      if (params) merged.insert(params->begin(), params->end());
      EvalContext<Jet> ctx;
      ctx.n = 0;
      ctx.coords = shape;
      ctx.params = &merged;
      ctx.bound = &bound;
      for (int j = 0; j < n; ++j) {
        Jet v = evaluate(coords[static_cast<std::size_t>(j)], ctx);
        pos[static_cast<std::size_t>(j)] = v.value();
        vel[static_cast<std::size_t>(j)] = v.partial({0});
      }
    }
    if (backwards)
      for (int j = 0; j < n; ++j) vel[static_cast<std::size_t>(j)] *= -1.0;
  }

  // Position and du-velocity on one closed segment, u in [0, 1]. Keeping the
  // segment fixed pins the velocity branch at the corners, which a global-t
  // lookup cannot do; integrators must step segment by segment through here.
  void segment_position_velocity(int seg, double u,
                                 const std::map<std::string, double>* params,
                                 std::span<double> pos,
                                 std::span<double> vel) const {
    if (vertices.empty()) {
      position_velocity(u, params, pos, vel);
      return;
    }
    const int k = segment_count();
    int j = seg;
    double uu = u;
    double sign = 1.0;
    if (backwards) {
      j = k - 1 - seg;
      uu = 1.0 - u;
      sign = -1.0;
    }
    const auto& a = vertices[static_cast<std::size_t>(j)];
    const auto& b = vertices[static_cast<std::size_t>(j) + 1];
    for (int i = 0; i < n; ++i) {
      const double d = b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)];
      pos[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + uu * d;
      vel[static_cast<std::size_t>(i)] = sign * d;
    }
  }

  std::vector<double> position(double t,
                               const std::map<std::string, double>* params) const {
    std::vector<double> pos(static_cast<std::size_t>(n)),
        vel(static_cast<std::size_t>(n));
    position_velocity(t, params, pos, vel);
    return pos;
  }

  bool closed(double tol, const std::map<std::string, double>* params) const {
    auto p0 = position(0.0, params);
    auto p1 = position(1.0, params);
    double d = 0;
    for (int j = 0; j < n; ++j)
      d = std::max(d, std::abs(p1[static_cast<std::size_t>(j)] -
                               p0[static_cast<std::size_t>(j)]));
    return d <= tol;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states; // chart points (x, y)
  bool truncated = false;
  std::string note;
};

// fixed-step RK4 for the second-order geodesic system as first order on (x, y)
inline Trajectory geodesic(const SprayModel& m, std::span<const double> z0,
                           double T, int steps) {
  const int n = m.n;
  if (steps < 2) throw std::invalid_argument("geodesic: steps >= 2 required");
  double ynorm = 0;
  for (int i = 0; i < n; ++i) ynorm += z0[static_cast<std::size_t>(n + i)] *
                                       z0[static_cast<std::size_t>(n + i)];
  if (ynorm == 0)
    throw std::invalid_argument("geodesic: start vector must be nonzero");

  auto rhs = [&](const std::vector<double>& z, std::vector<double>& dz) {
    EvalContext<double> ctx;
    ctx.n = n;
    ctx.coords = z;
    ctx.params = &m.params;
    for (int i = 0; i < n; ++i) {
      dz[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(n + i)];
      dz[static_cast<std::size_t>(n + i)] =
          -2.0 * evaluate(m.G[static_cast<std::size_t>(i)], ctx);
    }
  };

  Trajectory out;
  std::vector<double> z(z0.begin(), z0.end());
  out.times.push_back(0.0);
  out.states.push_back(z);
  const double h = T / steps;
  std::vector<double> k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n), tmp(2 * n);
  for (int s = 0; s < steps; ++s) {
    try {
      rhs(z, k1);
      for (int a = 0; a < 2 * n; ++a)
        tmp[static_cast<std::size_t>(a)] =
            z[static_cast<std::size_t>(a)] + 0.5 * h * k1[static_cast<std::size_t>(a)];
      rhs(tmp, k2);
      for (int a = 0; a < 2 * n; ++a)
        tmp[static_cast<std::size_t>(a)] =
            z[static_cast<std::size_t>(a)] + 0.5 * h * k2[static_cast<std::size_t>(a)];
      rhs(tmp, k3);
      for (int a = 0; a < 2 * n; ++a)
        tmp[static_cast<std::size_t>(a)] =
            z[static_cast<std::size_t>(a)] + h * k3[static_cast<std::size_t>(a)];
      rhs(tmp, k4);
    } catch (const EvalError& e) {
      out.truncated = true;
      out.note = std::string("trajectory left the evaluable domain: ") + e.what();
      break;
    }
    for (int a = 0; a < 2 * n; ++a)
      z[static_cast<std::size_t>(a)] +=
          h / 6.0 * (k1[static_cast<std::size_t>(a)] + 2 * k2[static_cast<std::size_t>(a)] +
                     2 * k3[static_cast<std::size_t>(a)] + k4[static_cast<std::size_t>(a)]);
    out.times.push_back(h * (s + 1));
    out.states.push_back(z);
  }
  return out;
}

struct TransportResult {
  std::vector<double> v0;  // vector at the curve start
  std::vector<double> v1;  // parallel translate at the curve end
  int steps = 0;
  double error_estimate = 0; // endpoint gap against a half-resolution rerun
  std::vector<std::vector<double>> trace; // (x(t), y(t)) per accepted step
  bool flagged = false;
  std::string note;
};

// Integrates the lift equation dy/dt = -N(x(t), y) dx/dt along the curve.
// Polyline corners are integration breakpoints so every RK4 stage sees a
// smooth velocity; the connection is evaluated afresh at each stage point.
inline TransportResult horizontal_lift(const SprayModel& m, const BaseCurve& curve,
                                       std::span<const double> v0, int steps) {
  const int n = m.n;
  if (curve.n != n)
    throw std::invalid_argument("horizontal_lift: curve dimension mismatch");
  if (static_cast<int>(v0.size()) != n)
    throw std::invalid_argument("horizontal_lift: vector dimension mismatch");
  if (steps < 1) throw std::invalid_argument("horizontal_lift: steps >= 1 required");
  double v0n = 0;
  for (double c : v0) v0n += c * c;
  v0n = std::sqrt(v0n);
  if (v0n == 0)
    throw std::invalid_argument("horizontal_lift: vector must be nonzero");

  const int segs = curve.segment_count();
  const double ytiny = 1e-10 * std::max(1.0, v0n);

  std::vector<double> pos(static_cast<std::size_t>(n)),
      vel(static_cast<std::size_t>(n)), zfull(static_cast<std::size_t>(2 * n));

  auto rhs = [&](int sgm, double u, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    curve.segment_position_velocity(sgm, u, &m.params, pos, vel);
    for (int i = 0; i < n; ++i) {
      zfull[static_cast<std::size_t>(i)] = pos[static_cast<std::size_t>(i)];
      zfull[static_cast<std::size_t>(n + i)] = y(i);
    }
    Eigen::MatrixXd N = connection_matrix(m, zfull);
    Eigen::Map<const Eigen::VectorXd> xdot(vel.data(), n);
    dy = -N * xdot;
  };

  TransportResult out;
  out.v0.assign(v0.begin(), v0.end());

  auto integrate = [&](int per_seg, TransportResult* rec) -> Eigen::VectorXd {
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(v0.data(), n);
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
    if (rec) {
      curve.segment_position_velocity(0, 0.0, &m.params, pos, vel);
      std::vector<double> st(pos.begin(), pos.end());
      st.insert(st.end(), v0.begin(), v0.end());
      rec->trace.push_back(std::move(st));
    }
    const double h = 1.0 / per_seg; // per-segment parameter step
    for (int sgm = 0; sgm < segs; ++sgm) {
      for (int s = 0; s < per_seg; ++s) {
        const double u = h * s;
        try {
          rhs(sgm, u, y, k1);
          rhs(sgm, u + 0.5 * h, y + 0.5 * h * k1, k2);
          rhs(sgm, u + 0.5 * h, y + 0.5 * h * k2, k3);
          rhs(sgm, u + h, y + h * k3, k4);
        } catch (const EvalError& e) {
          if (rec) {
            rec->flagged = true;
            rec->note = std::string("lift left the evaluable domain: ") + e.what();
          }
          return y;
        }
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (rec) ++rec->steps;
        if (y.norm() < ytiny) {
          if (rec) {
            rec->flagged = true;
            rec->note = "lift approached the zero section";
          }
          return y;
        }
        if (rec) {
          curve.segment_position_velocity(sgm, u + h, &m.params, pos, vel);
          std::vector<double> st(pos.begin(), pos.end());
          for (int i = 0; i < n; ++i) st.push_back(y(i));
          rec->trace.push_back(std::move(st));
        }
      }
    }
    return y;
  };

  const int per_seg = std::max(1, (steps + segs - 1) / segs);
  Eigen::VectorXd fine = integrate(per_seg, &out);
  out.v1.assign(fine.data(), fine.data() + n);
  if (!out.flagged && per_seg >= 2) {
    Eigen::VectorXd coarse = integrate(per_seg / 2, nullptr);
    out.error_estimate = (fine - coarse).norm();
  }
  return out;
}

// |E(tau(v0)) - E(v0)| around a closed loop, both evaluated at the loop base
inline double invariance_by_transport(const SprayModel& m, const ExprPtr& E,
                                      const BaseCurve& loop,
                                      std::span<const double> v0, int steps,
                                      TransportResult* transport = nullptr) {
  if (!loop.closed(1e-12, &m.params))
    throw std::invalid_argument("invariance_by_transport: loop is not closed");
  TransportResult tr = horizontal_lift(m, loop, v0, steps);
  auto base = loop.position(0.0, &m.params);
  std::vector<double> z(base.begin(), base.end());
  z.insert(z.end(), tr.v0.begin(), tr.v0.end());
  double e0 = evaluate_at(E, m.n, z, m.params);
  for (int i = 0; i < m.n; ++i)
    z[static_cast<std::size_t>(m.n + i)] = tr.v1[static_cast<std::size_t>(i)];
  double e1 = evaluate_at(E, m.n, z, m.params);
  if (transport) *transport = std::move(tr);
  return std::abs(e1 - e0);
}

// measured convergence exponent of the geodesic integrator: log2 of the
// endpoint-defect ratio between step counts s and 2s against a 16s reference
inline double geodesic_convergence_order(const SprayModel& m,
                                         std::span<const double> z0, double T,
                                         int steps) {
  auto endpoint = [&](int s) {
    Trajectory tr = geodesic(m, z0, T, s);
    if (tr.truncated)
      throw std::runtime_error("convergence probe left the domain");
    return tr.states.back();
  };
  auto e1 = endpoint(steps);
  auto e2 = endpoint(2 * steps);
  auto er = endpoint(16 * steps);
  double d1 = 0, d2 = 0;
  for (std::size_t a = 0; a < e1.size(); ++a) {
    d1 = std::max(d1, std::abs(e1[a] - er[a]));
    d2 = std::max(d2, std::abs(e2[a] - er[a]));
  }
  if (d1 < 1e-13 && d2 < 1e-13) return 4.0; // both at the rounding floor
  return std::log2(d1 / d2);
}

} // namespace sprayholo
