#pragma once

// Pointwise geometric data induced by a spray: connection matrix, horizontal
// frame, curvature tensor, Jacobi endomorphism, Ricci scalar, and the
// isotropy decomposition Phi = rho Id - y (x) alpha.

#include <Eigen/Dense>
#include <optional>

#include "sprayholo/field.hpp"

namespace sprayholo {

struct FramePack {
  Eigen::VectorXd S, C;      // 2n
  Eigen::MatrixXd N;         // n x n, N(j,i) = dG^j/dy^i
  Eigen::MatrixXd h;         // 2n x n, column i-1 holds h_i
};

struct CurvatureData {
  int n = 0;
  std::vector<double> R; // R^i_jk at [ (i*n + j)*n + k ]
  double at(int i, int j, int k) const {
    return R[static_cast<std::size_t>((i * n + j) * n + k)];
  }
  double max_abs() const {
    double m = 0;
    for (double v : R) m = std::max(m, std::abs(v));
    return m;
  }
};

struct IsotropyData {
  bool decomposed = false;
  double rho = 0;
  Eigen::VectorXd alpha;      // n
  double residual = 0;        // relative reproduction error of Phi
  double alpha_y_gap = 0;     // |alpha(y) - rho| consistency measure
};

struct JacobiData {
  Eigen::MatrixXd Phi; // n x n, Phi^i_j = y^k R^i_kj
  double ric = 0;
  double rho = 0;
};

// r^i = y^j dG^i/dy^j - 2 G^i; zero certifies 2-homogeneity at the point
inline std::vector<double> homogeneity_residual(const SprayModel& m,
                                                std::span<const double> z) {
  std::vector<Jet> zj = seed_point(z, 1);
  EvalContext<Jet> ctx = jet_context(m, zj);
  std::vector<double> r(static_cast<std::size_t>(m.n));
  for (int i = 0; i < m.n; ++i) {
    Jet Gi = evaluate(m.G[static_cast<std::size_t>(i)], ctx);
    double acc = -2.0 * Gi.value();
    for (int j = 0; j < m.n; ++j)
      acc += z[static_cast<std::size_t>(m.n + j)] * Gi.partial({m.n + j});
    r[static_cast<std::size_t>(i)] = acc;
  }
  return r;
}

inline Eigen::MatrixXd connection_matrix(const SprayModel& m,
                                         std::span<const double> z) {
  std::vector<Jet> zj = seed_point(z, 1);
  EvalContext<Jet> ctx = jet_context(m, zj);
  Eigen::MatrixXd N(m.n, m.n);
  for (int j = 0; j < m.n; ++j) {
    Jet Gj = evaluate(m.G[static_cast<std::size_t>(j)], ctx);
    for (int i = 0; i < m.n; ++i) N(j, i) = Gj.partial({m.n + i});
  }
  return N;
}

inline FramePack frame_pack(const SprayModel& m, std::span<const double> z) {
  FramePack fp;
  int n = m.n;
  fp.N = connection_matrix(m, z);
  fp.S = Eigen::VectorXd::Zero(2 * n);
  fp.C = Eigen::VectorXd::Zero(2 * n);
  fp.h = Eigen::MatrixXd::Zero(2 * n, n);
  std::vector<Jet> zj = seed_point(z, 0);
  EvalContext<Jet> ctx = jet_context(m, zj);
  for (int i = 0; i < n; ++i) {
    double yi = z[static_cast<std::size_t>(n + i)];
    fp.S(i) = yi;
    fp.S(n + i) = -2.0 * evaluate(m.G[static_cast<std::size_t>(i)], ctx).value();
    fp.C(n + i) = yi;
    fp.h(i, i) = 1.0;
    for (int j = 0; j < n; ++j) fp.h(n + j, i) = -fp.N(j, i);
  }
  return fp;
}

// R^i_jk = delta N^i_j / delta x^k - delta N^i_k / delta x^j, with
// delta/delta x^k = d/dx^k - N^m_k d/dy^m; antisymmetric in (j,k) by
// construction of the difference
inline CurvatureData curvature(const SprayModel& m, std::span<const double> z) {
  int n = m.n;
  std::vector<Jet> zj = seed_point(z, 2);
  EvalContext<Jet> ctx = jet_context(m, zj);

  // N and its first partials from the depth-2 evaluation of G
  std::vector<Jet> G(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    G[static_cast<std::size_t>(i)] = evaluate(m.G[static_cast<std::size_t>(i)], ctx);

  auto N = [&](int i, int j) { // N^i_j
    return G[static_cast<std::size_t>(i)].partial({n + j});
  };
  auto dN_dx = [&](int i, int j, int k) { // dN^i_j/dx^k
    return G[static_cast<std::size_t>(i)].partial({n + j, k});
  };
  auto dN_dy = [&](int i, int j, int mm) { // dN^i_j/dy^m
    return G[static_cast<std::size_t>(i)].partial({n + j, n + mm});
  };
  auto deltaN = [&](int i, int j, int k) { // delta N^i_j / delta x^k
    double acc = dN_dx(i, j, k);
    for (int mm = 0; mm < n; ++mm) acc -= N(mm, k) * dN_dy(i, j, mm);
    return acc;
  };

  CurvatureData cd;
  cd.n = n;
  cd.R.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < j; ++k) {
        double v = deltaN(i, j, k) - deltaN(i, k, j);
        cd.R[static_cast<std::size_t>((i * n + j) * n + k)] = v;
        cd.R[static_cast<std::size_t>((i * n + k) * n + j)] = -v;
      }
  return cd;
}

inline JacobiData jacobi(const SprayModel& m, std::span<const double> z,
                         const CurvatureData& cd) {
  int n = m.n;
  JacobiData jd;
  jd.Phi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0;
      for (int k = 0; k < n; ++k)
        acc += z[static_cast<std::size_t>(n + k)] * cd.at(i, k, j);
      jd.Phi(i, j) = acc;
    }
  jd.ric = jd.Phi.trace();
  jd.rho = jd.ric / (n - 1);
  return jd;
}

inline JacobiData jacobi(const SprayModel& m, std::span<const double> z) {
  return jacobi(m, z, curvature(m, z));
}

// tries Phi = rho Id - y (x) alpha with rho = Ric/(n-1); alpha_j is the
// least-squares optimum <y, rho e_j - Phi_j>/<y,y> given that rho
inline IsotropyData isotropy_check(const SprayModel& m,
                                   std::span<const double> z,
                                   const JacobiData& jd, double tol) {
  int n = m.n;
  IsotropyData iso;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = z[static_cast<std::size_t>(n + i)];
  double yy = y.squaredNorm();
  iso.rho = jd.rho;
  iso.alpha = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd target = -jd.Phi.col(j);
    target(j) += jd.rho;
    iso.alpha(j) = y.dot(target) / yy;
  }
  Eigen::MatrixXd recon = jd.rho * Eigen::MatrixXd::Identity(n, n) -
                          y * iso.alpha.transpose();
  double scale = std::max(1.0, jd.Phi.norm());
  iso.residual = (jd.Phi - recon).norm() / scale;
  iso.alpha_y_gap = std::abs(iso.alpha.dot(y) - jd.rho);
  iso.decomposed = iso.residual < tol;
  return iso;
}

inline IsotropyData isotropy_check(const SprayModel& m,
                                   std::span<const double> z, double tol) {
  return isotropy_check(m, z, jacobi(m, z), tol);
}

} // namespace sprayholo
