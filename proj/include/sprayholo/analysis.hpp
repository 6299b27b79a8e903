#pragma once

// Pipeline orchestration: sampling, distribution analysis, candidate checks,
// classification, and transport tasks, assembled into one report that can be
// emitted as versioned JSON or as plain text. Deterministic given the config
// and seed.

#include <random>

#include "sprayholo/builtins.hpp"
#include "sprayholo/config.hpp"

namespace sprayholo {

struct AnalysisError : std::runtime_error {
  explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CandidateReport {
  CandidateSummary summary;
  std::string expression; // printed normal form
  int degree = 2;
  bool evaluable = true;  // false if any sample raised an evaluation error
  std::string definiteness; // aggregated over the samples
  bool passes = false;
};

struct TransportReport {
  std::string name;
  bool closed = false;
  bool flagged = false;
  std::string note;
  int steps = 0;
  std::vector<double> base_start;
  std::vector<double> v0;
  std::vector<double> v1;
  double defect = 0;
  double error_estimate = 0;
  std::map<std::string, double> drifts; // per candidate, closed loops only
};

struct AnalysisReport {
  std::string schema = "spray-holonomy/1";
  std::string config_hash;
  std::uint64_t seed = 0;
  int n = 0;
  int requested_samples = 0;
  double spray_homogeneity_max = 0;
  DistributionReport dist;
  IsotropySummary iso;
  std::vector<CandidateReport> candidates;
  ClassificationVerdict verdict;
  std::vector<TransportReport> transports;
  std::vector<std::string> warnings;
};

namespace detail {

inline double unit_from(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// uniform draws in the box, resampling points the model cannot evaluate
inline std::vector<std::vector<double>> draw_samples(const SprayModel& m,
                                                     const AnalysisConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<double>> out;
  const int cap = 50 * cfg.sample_count;
  int attempts = 0;
  while (static_cast<int>(out.size()) < cfg.sample_count && attempts < cap) {
    ++attempts;
    std::vector<double> z(static_cast<std::size_t>(2 * cfg.n));
    for (std::size_t a = 0; a < z.size(); ++a) {
      const Bound& b = cfg.box[a];
      z[a] = b.lo + unit_from(rng) * (b.hi - b.lo);
    }
    try {
      frame_pack(m, z); // probe: the frame must exist at a usable point
    } catch (const EvalError&) {
      continue;
    }
    out.push_back(std::move(z));
  }
  if (static_cast<int>(out.size()) < cfg.sample_count)
    throw AnalysisError(
        "sampling retry cap exhausted: the admissible part of the box is too thin");
  return out;
}

inline double max_abs_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace detail

inline AnalysisReport run_analysis(const AnalysisConfig& cfg) {
  AnalysisReport rep;
  rep.config_hash = cfg.config_hash;
  rep.seed = cfg.seed;
  rep.n = cfg.n;
  rep.requested_samples = cfg.sample_count;

  auto model = build_model(cfg);

  std::set<std::string> names;
  for (const auto& kv : cfg.params) names.insert(kv.first);
  std::vector<LagrangianCandidate> cands;
  for (const auto& c : cfg.candidates)
    cands.push_back({c.name, parse_expression(c.expression, cfg.n, names),
                     c.degree});

  std::vector<std::vector<double>> pts = cfg.explicit_points.empty()
                                             ? detail::draw_samples(*model, cfg)
                                             : cfg.explicit_points;

  // spray coefficients must be 2-homogeneous in y for the theory to apply
  for (const auto& z : pts) {
    try {
      rep.spray_homogeneity_max = std::max(
          rep.spray_homogeneity_max,
          detail::max_abs_of(homogeneity_residual(*model, z)));
    } catch (const EvalError& e) {
      rep.warnings.push_back(std::string("homogeneity check skipped at a sample: ") +
                             e.what());
    }
  }
  if (rep.spray_homogeneity_max > 1e-8)
    rep.warnings.push_back(
        "spray coefficients are not 2-homogeneous at sample resolution; "
        "classification rules assume a spray");

  DistributionConfig dcfg;
  dcfg.saturation.rank_tol = cfg.tol_rank;
  int cap = cfg.max_bracket_depth > 0 ? cfg.max_bracket_depth : 2 * cfg.n;
  dcfg.saturation.max_bracket_depth = std::min(cap, cfg.max_ad_depth);
  rep.dist = analyze_distribution(model, pts, dcfg);
  for (const auto& notice : rep.dist.notices) rep.warnings.push_back(notice);
  if (rep.dist.points.size() * 2 < pts.size())
    throw AnalysisError("fewer than half of the samples could be analyzed");
  if (rep.dist.any_depth_exhausted)
    rep.warnings.push_back(
        "bracket depth cap hit while the basis was still growing; ranks are "
        "lower bounds");

  rep.iso.isotropic_at_all = true;
  for (const auto& p : rep.dist.points) {
    ++rep.iso.points;
    try {
      CurvatureData cd = curvature(*model, p.z);
      rep.iso.max_curvature = std::max(rep.iso.max_curvature, cd.max_abs());
      IsotropyData iso = isotropy_check(*model, p.z, 1e-8);
      rep.iso.isotropic_at_all = rep.iso.isotropic_at_all && iso.decomposed;
      rep.iso.max_residual = std::max(rep.iso.max_residual, iso.residual);
    } catch (const EvalError& e) {
      rep.iso.isotropic_at_all = false;
      rep.warnings.push_back(std::string("curvature check failed at a sample: ") +
                             e.what());
    }
  }

  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    const auto& c = cands[ci];
    CandidateReport cr;
    cr.expression = print_expression(c.E);
    cr.degree = c.degree;
    cr.summary.name = c.name;
    cr.summary.regular_at_all = true;
    cr.summary.positive_definite_at_all = true;
    cr.summary.min_hessian_sv = std::numeric_limits<double>::infinity();
    bool all_posdef = true, any_singular = false, any_indefinite = false;
    for (const auto& p : rep.dist.points) {
      ++cr.summary.points;
      try {
        cr.summary.max_homogeneity = std::max(
            cr.summary.max_homogeneity,
            std::abs(homogeneity_of_candidate(*model, c.E, c.degree, p.z)));
        cr.summary.max_el = std::max(
            cr.summary.max_el, detail::max_abs_of(el_residual(*model, c.E, p.z)));
        cr.summary.max_invariance = std::max(
            cr.summary.max_invariance,
            detail::max_abs_of(invariance_residual(*model, c.E, p.z, p.basis)));
        HessianReport hr = hessian_report(*model, c.E, p.z, cfg.tol_hessian);
        cr.summary.min_hessian_sv =
            std::min(cr.summary.min_hessian_sv, hr.min_singular);
        cr.summary.regular_at_all =
            cr.summary.regular_at_all && hr.cls != Definiteness::Singular;
        all_posdef = all_posdef && hr.cls == Definiteness::PositiveDefinite;
        any_singular = any_singular || hr.cls == Definiteness::Singular;
        any_indefinite = any_indefinite || hr.cls == Definiteness::Indefinite;
      } catch (const EvalError& e) {
        cr.evaluable = false;
        rep.warnings.push_back("candidate " + c.name +
                               " failed to evaluate at a sample: " + e.what());
      }
    }
    cr.summary.positive_definite_at_all = all_posdef && cr.evaluable;
    if (!cr.evaluable) {
      cr.summary.regular_at_all = false;
      cr.summary.max_el = std::numeric_limits<double>::infinity();
      cr.definiteness = "not evaluable on the sample set";
    } else if (all_posdef) {
      cr.definiteness = "positive definite at all samples";
    } else if (any_singular) {
      cr.definiteness = "singular at some sample";
    } else if (any_indefinite) {
      cr.definiteness = "indefinite at some sample";
    }
    ClassifyConfig pass_cfg{cfg.tol_homogeneity, cfg.tol_el, cfg.tol_invariance,
                            1e-9};
    cr.passes = candidate_passes(cr.summary, pass_cfg);
    rep.candidates.push_back(std::move(cr));
  }

  std::vector<CandidateSummary> summaries;
  for (const auto& cr : rep.candidates) summaries.push_back(cr.summary);
  ClassifyConfig ccfg{cfg.tol_homogeneity, cfg.tol_el, cfg.tol_invariance, 1e-9};
  rep.verdict = classify(rep.dist, summaries, rep.iso, ccfg);

  for (const auto& task : cfg.transport) {
    TransportReport tr;
    tr.name = task.name;
    try {
      BaseCurve curve = build_curve(task.loop);
      if (curve.n != cfg.n)
        throw AnalysisError("transport task " + task.name +
                            ": loop dimension mismatch");
      tr.closed = curve.closed(1e-12, &model->params);
      tr.base_start = curve.position(0.0, &model->params);
      TransportResult lift = horizontal_lift(*model, curve, task.vector,
                                             task.steps);
      tr.flagged = lift.flagged;
      tr.note = lift.note;
      tr.steps = lift.steps;
      tr.v0 = lift.v0;
      tr.v1 = lift.v1;
      tr.error_estimate = lift.error_estimate;
      double d = 0;
      for (std::size_t i = 0; i < lift.v0.size(); ++i)
        d = std::max(d, std::abs(lift.v1[i] - lift.v0[i]));
      tr.defect = d;
      if (tr.closed && !tr.flagged) {
        for (const auto& c : cands) {
          std::vector<double> z(tr.base_start);
          z.insert(z.end(), lift.v0.begin(), lift.v0.end());
          double e0 = evaluate_at(c.E, cfg.n, z, model->params);
          for (int i = 0; i < cfg.n; ++i)
            z[static_cast<std::size_t>(cfg.n + i)] =
                lift.v1[static_cast<std::size_t>(i)];
          double e1 = evaluate_at(c.E, cfg.n, z, model->params);
          tr.drifts[c.name] = std::abs(e1 - e0);
        }
      }
      if (tr.flagged)
        rep.warnings.push_back("transport task " + task.name + ": " + tr.note);
    } catch (const std::exception& e) {
      tr.flagged = true;
      tr.note = e.what();
      rep.warnings.push_back("transport task " + task.name + " failed: " +
                             e.what());
    }
    rep.transports.push_back(std::move(tr));
  }

  return rep;
}

inline nlohmann::json report_json(const AnalysisReport& rep) {
  nlohmann::json j;
  j["schema"] = rep.schema;
  j["config_hash"] = rep.config_hash;
  j["seed"] = rep.seed;
  j["n"] = rep.n;
  j["requested_samples"] = rep.requested_samples;
  j["spray_homogeneity_max"] = rep.spray_homogeneity_max;

  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : rep.dist.points) {
    nlohmann::json e;
    e["point"] = p.z;
    e["rank"] = p.rank;
    e["words"] = p.words;
    e["liouville_residual"] = p.liouville_residual;
    e["liouville_member"] = p.liouville_member;
    e["vertical_rank"] = p.vertical_rank;
    std::vector<bool> cv(p.coordinate_vertical.begin(),
                         p.coordinate_vertical.end());
    e["coordinate_vertical"] = cv;
    e["depth_exhausted"] = p.depth_exhausted;
    pts.push_back(std::move(e));
  }
  j["distribution"]["points"] = std::move(pts);
  j["distribution"]["generic_rank"] = rep.dist.generic_rank;
  j["distribution"]["generic_codim"] = rep.dist.generic_codim;
  {
    nlohmann::json hist;
    for (const auto& kv : rep.dist.rank_histogram)
      hist[std::to_string(kv.first)] = kv.second;
    j["distribution"]["rank_histogram"] = std::move(hist);
  }
  j["distribution"]["non_regular_suspected"] = rep.dist.non_regular_suspected;
  j["distribution"]["any_depth_exhausted"] = rep.dist.any_depth_exhausted;

  j["isotropy"]["points"] = rep.iso.points;
  j["isotropy"]["isotropic_at_all"] = rep.iso.isotropic_at_all;
  j["isotropy"]["max_residual"] = rep.iso.max_residual;
  j["isotropy"]["max_curvature"] = rep.iso.max_curvature;

  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : rep.candidates) {
    nlohmann::json e;
    e["name"] = c.summary.name;
    e["expression"] = c.expression;
    e["degree"] = c.degree;
    e["points"] = c.summary.points;
    e["max_homogeneity"] = c.summary.max_homogeneity;
    e["max_el"] = c.summary.max_el;
    e["max_invariance"] = c.summary.max_invariance;
    e["min_hessian_sv"] = c.summary.min_hessian_sv;
    e["regular_at_all"] = c.summary.regular_at_all;
    e["positive_definite_at_all"] = c.summary.positive_definite_at_all;
    e["evaluable"] = c.evaluable;
    e["definiteness"] = c.definiteness;
    e["passes"] = c.passes;
    cands.push_back(std::move(e));
  }
  j["candidates"] = std::move(cands);

  j["verdict"]["rule"] = rep.verdict.rule;
  j["verdict"]["vh2"] = rep.verdict.vh2;
  j["verdict"]["metric_freedom"] = rep.verdict.metric_freedom;
  j["verdict"]["passing_candidate"] = rep.verdict.passing_candidate;
  j["verdict"]["assumptions"] = rep.verdict.assumptions;
  j["verdict"]["evidence"] = rep.verdict.evidence;
  j["verdict"]["diagnostic"] = rep.verdict.diagnostic;

  nlohmann::json trs = nlohmann::json::array();
  for (const auto& t : rep.transports) {
    nlohmann::json e;
    e["name"] = t.name;
    e["closed"] = t.closed;
    e["flagged"] = t.flagged;
    e["note"] = t.note;
    e["steps"] = t.steps;
    e["base_start"] = t.base_start;
    e["v0"] = t.v0;
    e["v1"] = t.v1;
    e["defect"] = t.defect;
    e["error_estimate"] = t.error_estimate;
    nlohmann::json d;
    for (const auto& kv : t.drifts) d[kv.first] = kv.second;
    e["drifts"] = std::move(d);
    trs.push_back(std::move(e));
  }
  j["transport"] = std::move(trs);
  j["warnings"] = rep.warnings;
  return j;
}

inline std::string report_text(const AnalysisReport& rep) {
  std::ostringstream os;
  os << rep.schema << "\n";
  os << "config " << rep.config_hash << "\n";
  os << "seed " << rep.seed << "\n";
  os << "n = " << rep.n << "; samples analyzed = " << rep.dist.points.size()
     << " of " << rep.requested_samples << " requested\n\n";

  os << "spray 2-homogeneity: max residual "
     << detail::format_double(rep.spray_homogeneity_max) << "\n\n";

  os << "rank table\n";
  for (const auto& kv : rep.dist.rank_histogram)
    os << "  rank " << kv.first << ": " << kv.second << " samples\n";
  os << "generic rank " << rep.dist.generic_rank << " (codimension "
     << rep.dist.generic_codim << ")\n";
  if (rep.dist.non_regular_suspected)
    os << "non-regular distribution suspected: sampled ranks vary\n";

  double liures = 0;
  bool liuall = !rep.dist.points.empty();
  int vflags = rep.n;
  std::vector<bool> vall(static_cast<std::size_t>(rep.n), true);
  for (const auto& p : rep.dist.points) {
    liures = std::max(liures, p.liouville_residual);
    liuall = liuall && p.liouville_member;
    for (int i = 0; i < rep.n; ++i)
      vall[static_cast<std::size_t>(i)] =
          vall[static_cast<std::size_t>(i)] &&
          i < static_cast<int>(p.coordinate_vertical.size()) &&
          p.coordinate_vertical[static_cast<std::size_t>(i)];
  }
  os << "Liouville member at all samples: " << (liuall ? "yes" : "no")
     << " (max residual " << detail::format_double(liures) << ")\n";
  os << "coordinate verticals contained at all samples:";
  bool anyv = false;
  for (int i = 0; i < rep.n; ++i)
    if (vall[static_cast<std::size_t>(i)]) {
      os << " y" << (i + 1);
      anyv = true;
    }
  (void)vflags;
  if (!anyv) os << " none";
  os << "\n";
  os << "isotropy: "
     << (rep.iso.isotropic_at_all ? "decomposes at all samples"
                                  : "fails at some sample")
     << " (max residual " << detail::format_double(rep.iso.max_residual)
     << "), max |R| = " << detail::format_double(rep.iso.max_curvature)
     << "\n\n";

  os << "candidates\n";
  if (rep.candidates.empty()) os << "  none\n";
  for (const auto& c : rep.candidates) {
    os << "  " << c.summary.name << ": homogeneity "
       << detail::format_double(c.summary.max_homogeneity) << ", EL "
       << detail::format_double(c.summary.max_el) << ", invariance "
       << detail::format_double(c.summary.max_invariance) << ", Hessian "
       << c.definiteness << " -> " << (c.passes ? "PASS" : "FAIL") << "\n";
  }
  os << "\n";

  os << "verdict\n";
  os << "  rule " << rep.verdict.rule << "\n";
  os << "  v_h(2) = " << rep.verdict.vh2 << "\n";
  os << "  metric freedom = " << rep.verdict.metric_freedom << "\n";
  if (!rep.verdict.passing_candidate.empty())
    os << "  passing candidate: " << rep.verdict.passing_candidate << "\n";
  if (!rep.verdict.diagnostic.empty())
    os << "  DIAGNOSTIC: " << rep.verdict.diagnostic << "\n";
  os << "evidence\n";
  for (const auto& e : rep.verdict.evidence) os << "  - " << e << "\n";
  os << "assumptions\n";
  for (const auto& a : rep.verdict.assumptions) os << "  - " << a << "\n";

  if (!rep.transports.empty()) {
    os << "transport\n";
    for (const auto& t : rep.transports) {
      os << "  " << t.name << ": defect " << detail::format_double(t.defect)
         << ", error estimate " << detail::format_double(t.error_estimate);
      for (const auto& kv : t.drifts)
        os << ", drift " << kv.first << " = " << detail::format_double(kv.second);
      if (t.flagged) os << " [FLAGGED: " << t.note << "]";
      os << "\n";
    }
  }

  os << "warnings\n";
  if (rep.warnings.empty()) os << "  none\n";
  for (const auto& w : rep.warnings) os << "  - " << w << "\n";
  return os.str();
}

} // namespace sprayholo
