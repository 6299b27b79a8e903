#pragma once

// Saturation of the holonomy distribution: iterated Lie brackets of the
// horizontal frame, pointwise numerical rank, Liouville membership, and
// vertical-part diagnostics, aggregated over sample sets.

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "sprayholo/geometry.hpp"

namespace sprayholo {

struct SaturationConfig {
  double rank_tol = 1e-8;
  int max_bracket_depth = 0; // 0 selects the default 2n
};

struct SaturationResult {
  int n = 0;
  int rank = 0;               // final rank, re-verified by SVD
  std::vector<std::string> words; // provenance of each admitted basis column
  Eigen::MatrixXd basis;      // 2n x (admitted columns)
  bool depth_exhausted = false; // depth cap hit while still admitting
  int sweeps = 0;
};

// Grows a basis of the bracket-generated distribution at one point. Starts
// from the horizontal frame (plus any extra generator fields), then sweeps
// brackets [h_i, B] over a snapshot of the current basis, admitting a
// candidate iff it raises the numerical rank. Stops when a sweep admits
// nothing, the rank reaches 2n, or the word-depth cap is hit.
inline SaturationResult saturate(std::shared_ptr<const SprayModel> model,
                                 std::span<const double> z,
                                 const SaturationConfig& cfg = {},
                                 const std::vector<FieldPtr>& extra = {}) {
  const int n = model->n;
  const int dim = 2 * n;
  const int cap = cfg.max_bracket_depth > 0 ? cfg.max_bracket_depth : dim;

  SaturationResult out;
  out.n = n;

  std::vector<FieldPtr> frame;
  for (int i = 1; i <= n; ++i)
    frame.push_back(std::make_shared<HorizontalField>(model, i));

  std::vector<FieldPtr> admitted;
  Eigen::MatrixXd M(dim, 0);
  int rank = 0;

  auto try_admit = [&](const FieldPtr& f) {
    std::vector<double> v = f->eval_at(z);
    Eigen::MatrixXd grown(dim, M.cols() + 1);
    grown.leftCols(M.cols()) = M;
    for (int a = 0; a < dim; ++a)
      grown(a, M.cols()) = v[static_cast<std::size_t>(a)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(grown);
    qr.setThreshold(cfg.rank_tol);
    if (qr.rank() <= rank) return false;
    M.swap(grown);
    rank = static_cast<int>(qr.rank());
    admitted.push_back(f);
    out.words.push_back(f->word().str());
    return true;
  };

  for (const auto& h : frame) try_admit(h);
  for (const auto& g : extra) try_admit(g);

  bool admitting = true;
  while (admitting && rank < dim && out.sweeps < cap) {
    ++out.sweeps;
    admitting = false;
    const std::vector<FieldPtr> snapshot = admitted;
    for (const auto& h : frame) {
      for (const auto& B : snapshot) {
        if (B->word().height() + 1 > cap) continue;
        if (B.get() == h.get()) continue;
        if (try_admit(make_bracket(h, B))) admitting = true;
        if (rank == dim) break;
      }
      if (rank == dim) break;
    }
  }
  out.depth_exhausted = admitting && rank < dim && out.sweeps >= cap;

  out.basis = M;
  if (M.cols() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cfg.rank_tol * sv(0)) ++r;
    out.rank = r;
  }
  return out;
}

// relative least-squares distance of the Liouville vector C(p) to the span
inline std::pair<bool, double> contains_liouville(const Eigen::MatrixXd& basis,
                                                  std::span<const double> z,
                                                  double tol) {
  const int dim = static_cast<int>(z.size());
  const int n = dim / 2;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < n; ++i) c(n + i) = z[static_cast<std::size_t>(n + i)];
  double cn = c.norm();
  Eigen::VectorXd w = basis.colPivHouseholderQr().solve(c);
  double res = (basis * w - c).norm() / cn;
  return {res < tol, res};
}

struct VerticalDiagnostics {
  int vertical_rank = 0;
  std::vector<bool> coordinate_vertical; // flag i: d/dy^i lies in the span
};

// Removes each basis column's horizontal-frame component, then ranks what
// is left in the y-block; flags report which coordinate verticals are
// members of the full span.
inline VerticalDiagnostics vertical_diagnostics(const SprayModel& m,
                                                const Eigen::MatrixXd& basis,
                                                std::span<const double> z,
                                                double tol) {
  const int n = m.n;
  VerticalDiagnostics out;
  Eigen::MatrixXd N = connection_matrix(m, z);
  Eigen::MatrixXd V(n, basis.cols());
  for (int c = 0; c < basis.cols(); ++c) {
    Eigen::VectorXd b = basis.col(c);
    V.col(c) = b.tail(n) + N * b.head(n);
  }
  if (V.cols() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
    const auto& sv = svd.singularValues();
    if (sv.size() > 0 && sv(0) > 0) {
      for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0)) ++out.vertical_rank;
    }
  }
  auto qr = basis.colPivHouseholderQr();
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2 * n);
    e(n + i) = 1.0;
    Eigen::VectorXd w = qr.solve(e);
    out.coordinate_vertical.push_back((basis * w - e).norm() < tol);
  }
  return out;
}

struct PointDistribution {
  std::vector<double> z;
  int rank = 0;
  std::vector<std::string> words;
  Eigen::MatrixXd basis;
  double liouville_residual = 0;
  bool liouville_member = false;
  int vertical_rank = 0;
  std::vector<bool> coordinate_vertical;
  bool depth_exhausted = false;
};

struct DistributionReport {
  int n = 0;
  std::vector<PointDistribution> points;
  std::vector<std::string> notices; // skipped points, one line each
  int generic_rank = 0;
  int generic_codim = 0;
  std::map<int, int> rank_histogram;
  bool non_regular_suspected = false;
  bool any_depth_exhausted = false;
};

struct DistributionConfig {
  SaturationConfig saturation;
  double membership_tol = 1e-6; // Liouville and coordinate-vertical checks
};

inline DistributionReport analyze_distribution(
    std::shared_ptr<const SprayModel> model,
    const std::vector<std::vector<double>>& samples,
    const DistributionConfig& cfg = {}) {
  DistributionReport rep;
  rep.n = model->n;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    try {
      PointDistribution pd;
      pd.z = samples[k];
      SaturationResult sat = saturate(model, samples[k], cfg.saturation);
      pd.rank = sat.rank;
      pd.words = sat.words;
      pd.basis = sat.basis;
      pd.depth_exhausted = sat.depth_exhausted;
      auto [member, res] =
          contains_liouville(sat.basis, samples[k], cfg.membership_tol);
      pd.liouville_member = member;
      pd.liouville_residual = res;
      VerticalDiagnostics vd = vertical_diagnostics(
          *model, sat.basis, samples[k], cfg.membership_tol);
      pd.vertical_rank = vd.vertical_rank;
      pd.coordinate_vertical = vd.coordinate_vertical;
      rep.points.push_back(std::move(pd));
    } catch (const std::exception& e) {
      rep.notices.push_back("sample " + std::to_string(k) +
                            " skipped: " + e.what());
    }
  }
  for (const auto& p : rep.points) {
    rep.generic_rank = std::max(rep.generic_rank, p.rank);
    rep.rank_histogram[p.rank]++;
    rep.any_depth_exhausted = rep.any_depth_exhausted || p.depth_exhausted;
  }
  rep.generic_codim = 2 * rep.n - rep.generic_rank;
  rep.non_regular_suspected = rep.rank_histogram.size() > 1;
  return rep;
}

} // namespace sprayholo
