// Command-line driver: analyze a spray configuration, check a single
// candidate Lagrangian, run one parallel-transport task, or reproduce the
// builtin examples.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 analysis hard
// error (including output I/O), 3 builtin example mismatch.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "sprayholo/analysis.hpp"

using namespace sprayholo;

namespace {

AnalysisConfig config_of_builtin(const BuiltinExample& ex, std::uint64_t seed) {
  AnalysisConfig cfg;
  cfg.n = ex.model->n;
  for (const auto& g : ex.model->G) cfg.spray.push_back(print_expression(g));
  cfg.params = ex.model->params;
  for (std::size_t a = 0; a < ex.model->box_lo.size(); ++a) {
    Bound b;
    b.lo = ex.model->box_lo[a];
    b.hi = ex.model->box_hi[a];
    cfg.box.push_back(b);
  }
  for (const auto& c : ex.candidates)
    cfg.candidates.push_back({c.name, print_expression(c.E), c.degree});
  cfg.sample_count = 50;
  cfg.seed = seed;
  cfg.config_hash = detail::fnv1a_hex("builtin-" + std::to_string(ex.index));
  return cfg;
}

int write_report(const AnalysisReport& rep, const std::string& format,
                 const std::string& out_path) {
  std::string body = format == "json" ? report_json(rep).dump(2) + "\n"
                                      : report_text(rep);
  if (out_path.empty()) {
    std::cout << body;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file: " << out_path << "\n";
    return 2;
  }
  out << body;
  if (!out.flush()) {
    std::cerr << "error: failed writing output file: " << out_path << "\n";
    return 2;
  }
  return 0;
}

int run_analyze(const std::string& config_path, const std::string& format,
                const std::string& out_path, bool seed_set,
                std::uint64_t seed) {
  AnalysisConfig cfg = load_config(config_path);
  if (seed_set) cfg.seed = seed;
  AnalysisReport rep = run_analysis(cfg);
  return write_report(rep, format, out_path);
}

int run_check(const std::string& config_path, const std::string& name) {
  AnalysisConfig cfg = load_config(config_path);
  bool known = false;
  for (const auto& c : cfg.candidates) known = known || c.name == name;
  if (!known) {
    std::cerr << "error: no candidate named '" << name << "' in " << config_path
              << "\n";
    return 1;
  }
  AnalysisReport rep = run_analysis(cfg);
  for (const auto& c : rep.candidates) {
    if (c.summary.name != name) continue;
    std::cout << "candidate " << name << "\n";
    std::cout << "  expression: " << c.expression << "\n";
    std::cout << "  degree: " << c.degree << "\n";
    std::cout << "  samples: " << c.summary.points << "\n";
    std::cout << "  max homogeneity residual: "
              << detail::format_double(c.summary.max_homogeneity) << "\n";
    std::cout << "  max Euler-Lagrange residual: "
              << detail::format_double(c.summary.max_el) << "\n";
    std::cout << "  max invariance residual: "
              << detail::format_double(c.summary.max_invariance) << "\n";
    std::cout << "  Hessian: " << c.definiteness << " (min singular value "
              << detail::format_double(c.summary.min_hessian_sv) << ")\n";
    std::cout << "  verdict: " << (c.passes ? "PASS" : "FAIL") << "\n";
  }
  return 0;
}

int run_transport(const std::string& config_path, const std::string& name) {
  AnalysisConfig cfg = load_config(config_path);
  const TransportTask* task = nullptr;
  for (const auto& t : cfg.transport)
    if (t.name == name) task = &t;
  if (!task) {
    std::cerr << "error: no transport task named '" << name << "' in "
              << config_path << "\n";
    return 1;
  }
  auto model = build_model(cfg);
  BaseCurve curve = build_curve(task->loop);
  TransportResult res = horizontal_lift(*model, curve, task->vector,
                                        task->steps);
  bool closed = curve.closed(1e-12, &model->params);
  std::cout << "transport task " << name << "\n";
  std::cout << "  loop closed: " << (closed ? "yes" : "no") << "\n";
  std::cout << "  steps: " << res.steps << "\n";
  auto print_vec = [](const std::vector<double>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? ", " : "") + detail::format_double(v[i]);
    return s + ")";
  };
  std::cout << "  initial vector: " << print_vec(res.v0) << "\n";
  std::cout << "  final vector:   " << print_vec(res.v1) << "\n";
  double defect = 0;
  for (std::size_t i = 0; i < res.v0.size(); ++i)
    defect = std::max(defect, std::abs(res.v1[i] - res.v0[i]));
  if (closed)
    std::cout << "  holonomy defect: " << detail::format_double(defect) << "\n";
  std::cout << "  step-halving error estimate: "
            << detail::format_double(res.error_estimate) << "\n";
  if (res.flagged) std::cout << "  FLAGGED: " << res.note << "\n";
  if (closed && !res.flagged) {
    std::set<std::string> names;
    for (const auto& kv : cfg.params) names.insert(kv.first);
    std::vector<double> base = curve.position(0.0, &model->params);
    for (const auto& c : cfg.candidates) {
      ExprPtr E = parse_expression(c.expression, cfg.n, names);
      std::vector<double> z(base);
      z.insert(z.end(), res.v0.begin(), res.v0.end());
      double e0 = evaluate_at(E, cfg.n, z, model->params);
      for (int i = 0; i < cfg.n; ++i)
        z[static_cast<std::size_t>(cfg.n + i)] =
            res.v1[static_cast<std::size_t>(i)];
      double e1 = evaluate_at(E, cfg.n, z, model->params);
      std::cout << "  drift of " << c.name << ": "
                << detail::format_double(std::abs(e1 - e0)) << "\n";
    }
  }
  return 0;
}

int run_examples(int filter) {
  bool all_ok = true;
  for (const auto& ex : builtin_examples()) {
    if (filter != 0 && ex.index != filter) continue;
    AnalysisConfig cfg = config_of_builtin(ex, 2024u + static_cast<unsigned>(ex.index));
    AnalysisReport rep = run_analysis(cfg);
    bool ok = rep.dist.generic_rank == ex.expected.generic_rank &&
              rep.dist.generic_codim == ex.expected.generic_codim &&
              rep.verdict.vh2 == ex.expected.vh2 &&
              rep.verdict.metric_freedom == ex.expected.metric_freedom &&
              rep.verdict.rule == ex.expected.rule;
    all_ok = all_ok && ok;
    std::cout << "example " << ex.index << " (" << ex.title << ")\n";
    std::cout << "  rank " << rep.dist.generic_rank << " (expected "
              << ex.expected.generic_rank << "), codimension "
              << rep.dist.generic_codim << " (expected "
              << ex.expected.generic_codim << ")\n";
    std::cout << "  v_h(2) = " << rep.verdict.vh2 << " (expected "
              << ex.expected.vh2 << "), metric freedom = "
              << rep.verdict.metric_freedom << " (expected "
              << ex.expected.metric_freedom << ")\n";
    std::cout << "  rule " << rep.verdict.rule << " (expected "
              << ex.expected.rule << ")\n";
    std::cout << "  => " << (ok ? "ok" : "MISMATCH") << "\n";
  }
  if (!all_ok) std::cerr << "error: at least one example did not reproduce\n";
  return all_ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"holonomy-distribution analysis for sprays"};
  app.require_subcommand(1);

  std::string config_path, out_path, candidate_name, task_name;
  std::string format = "text";
  std::uint64_t seed = 0;
  int filter = 0;

  CLI::App* analyze = app.add_subcommand(
      "analyze", "run the full analysis for a configuration");
  analyze->add_option("--config", config_path, "configuration file")
      ->required();
  analyze->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"json", "text"}));
  analyze->add_option("--out", out_path, "write the report to this file");
  auto* seed_opt =
      analyze->add_option("--seed", seed, "override the sampling seed");

  CLI::App* check = app.add_subcommand(
      "check-lagrangian", "evaluate one candidate Lagrangian");
  check->add_option("--config", config_path, "configuration file")->required();
  check->add_option("--candidate", candidate_name, "candidate name")
      ->required();

  CLI::App* transport = app.add_subcommand(
      "transport", "run one parallel-transport task");
  transport->add_option("--config", config_path, "configuration file")
      ->required();
  transport->add_option("--task", task_name, "transport task name")->required();

  CLI::App* examples = app.add_subcommand(
      "examples", "reproduce the builtin examples");
  examples->add_option("--filter", filter, "restrict to one example")
      ->check(CLI::Range(1, 4));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed())
      return run_analyze(config_path, format, out_path,
                         seed_opt->count() > 0, seed);
    if (check->parsed()) return run_check(config_path, candidate_name);
    if (transport->parsed()) return run_transport(config_path, task_name);
    if (examples->parsed()) return run_examples(filter);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
