#include <catch2/catch_amalgamated.hpp>

#include "sprayholo/analysis.hpp"
#include "sprayholo/builtins.hpp"

using namespace sprayholo;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string cfg_path(const char* name) {
  return std::string(SPRAYHOLO_SOURCE_DIR) + "/configs/" + name;
}

nlohmann::json flat_json() {
  return nlohmann::json::parse(R"({
    "n": 2,
    "spray": ["0", "0"],
    "box": {
      "x": [{"min": -1.0, "max": 1.0}, {"min": -1.0, "max": 1.0}],
      "y": [{"min": 0.25, "max": 2.0}, {"min": 0.25, "max": 2.0}]
    },
    "samples": {"count": 5, "seed": 3}
  })");
}

} // namespace

TEST_CASE("shipped configs reproduce the expected verdicts") {
  const auto& builtins = builtin_examples();
  const char* files[] = {"example1.json", "example2.json", "example3.json",
                         "example4.json"};
  for (int i = 0; i < 4; ++i) {
    CAPTURE(i);
    AnalysisConfig cfg = load_config(cfg_path(files[i]));
    AnalysisReport rep = run_analysis(cfg);
    const ExpectedVerdict& want = builtins[static_cast<std::size_t>(i)].expected;
    CHECK(rep.dist.generic_rank == want.generic_rank);
    CHECK(rep.dist.generic_codim == want.generic_codim);
    CHECK(rep.verdict.vh2 == want.vh2);
    CHECK(rep.verdict.metric_freedom == want.metric_freedom);
    CHECK(rep.verdict.rule == want.rule);
    CHECK(rep.dist.points.size() == 50);
    CHECK(rep.warnings.empty());
    CHECK(rep.spray_homogeneity_max < 1e-9);
    REQUIRE(rep.transports.size() == 1);
    CHECK(rep.transports[0].closed);
    CHECK_FALSE(rep.transports[0].flagged);
  }
}

TEST_CASE("flat config classifies as everywhere-flat") {
  AnalysisReport rep = run_analysis(load_config(cfg_path("flat.json")));
  CHECK(rep.verdict.rule == "R0");
  CHECK(rep.verdict.vh2 == "2");
  CHECK(rep.verdict.metric_freedom == "2");
  REQUIRE(rep.transports.size() == 1);
  CHECK(rep.transports[0].defect < 1e-10);
  CHECK(rep.transports[0].drifts.at("kinetic") < 1e-12);
}

TEST_CASE("identical config and seed give byte-identical JSON") {
  AnalysisConfig cfg = load_config(cfg_path("example4.json"));
  std::string a = report_json(run_analysis(cfg)).dump();
  std::string b = report_json(run_analysis(cfg)).dump();
  CHECK(a == b);

  AnalysisConfig again = load_config(cfg_path("example4.json"));
  std::string c = report_json(run_analysis(again)).dump();
  CHECK(a == c);
}

TEST_CASE("changing the seed moves the samples but not the verdict") {
  AnalysisConfig cfg = load_config(cfg_path("example3.json"));
  AnalysisReport r1 = run_analysis(cfg);
  cfg.seed = 9999;
  AnalysisReport r2 = run_analysis(cfg);
  CHECK(report_json(r1).dump() != report_json(r2).dump());
  CHECK(r2.verdict.rule == r1.verdict.rule);
  CHECK(r2.verdict.vh2 == r1.verdict.vh2);
  CHECK(report_json(r2)["seed"] == 9999);
}

TEST_CASE("JSON report round-trips and records provenance") {
  AnalysisConfig cfg = load_config(cfg_path("example3.json"));
  AnalysisReport rep = run_analysis(cfg);
  nlohmann::json j = report_json(rep);
  nlohmann::json back = nlohmann::json::parse(j.dump());
  CHECK(back == j);
  CHECK(j["schema"] == "spray-holonomy/1");
  CHECK(j["config_hash"] == cfg.config_hash);
  CHECK(j["seed"] == cfg.seed);
  CHECK(j["n"] == 2);
  CHECK(j["distribution"]["points"].size() == rep.dist.points.size());
  CHECK(j["verdict"]["rule"] == rep.verdict.rule);
  REQUIRE(j["candidates"].size() == 1);
  CHECK(j["candidates"][0]["name"] == "E_mu");
  CHECK(j["candidates"][0]["passes"] == true);
  CHECK(j["transport"][0]["drifts"]["E_mu"].get<double>() < 1e-6);
}

TEST_CASE("text report carries the verdict, rank table, and assumptions") {
  AnalysisReport rep = run_analysis(load_config(cfg_path("example2.json")));
  std::string text = report_text(rep);
  CHECK_THAT(text, ContainsSubstring("rule R2"));
  CHECK_THAT(text, ContainsSubstring("rank 3: 50 samples"));
  CHECK_THAT(text, ContainsSubstring("generic rank 3 (codimension 1)"));
  CHECK_THAT(text, ContainsSubstring("coordinate-vertical obstruction: y1"));
  CHECK_THAT(text, ContainsSubstring("genericity of sampled rank assumed"));
  CHECK_THAT(text, ContainsSubstring("v_h(2) = 0"));

  nlohmann::json j = report_json(rep);
  bool found = false;
  for (const auto& e : j["verdict"]["evidence"])
    found = found || e.get<std::string>() == "coordinate-vertical obstruction: y1";
  CHECK(found);
}

TEST_CASE("explicit points bypass sampling") {
  auto j = flat_json();
  j["samples"] = {{"points", {{0.1, 0.2, 1.0, 0.5}, {-0.4, 0.3, 0.7, 1.1}}}};
  AnalysisReport rep = run_analysis(parse_config(j.dump()));
  REQUIRE(rep.dist.points.size() == 2);
  CHECK(rep.requested_samples == 2);
  CHECK(rep.dist.points[0].z == std::vector<double>{0.1, 0.2, 1.0, 0.5});
  CHECK(rep.verdict.rule == "R0");
}

TEST_CASE("unusable domain raises a hard error") {
  auto j = flat_json();
  j["spray"] = {"sqrt(-1-x1^2)*y1", "0"};
  j["samples"] = {{"count", 3}, {"seed", 1}};
  CHECK_THROWS_MATCHES(run_analysis(parse_config(j.dump())), AnalysisError,
                       Catch::Matchers::MessageMatches(
                           ContainsSubstring("too thin")));
}

TEST_CASE("isolated failures are skipped, majority failure is fatal") {
  auto j = flat_json();
  j["spray"] = {"y1^2/x1", "0"};

  auto ok = j;
  ok["samples"] = {{"points",
                    {{0.5, 0.0, 1.0, 1.0}, {0.0, 0.0, 1.0, 1.0},
                     {-0.5, 0.0, 1.0, 1.0}}}};
  AnalysisReport rep = run_analysis(parse_config(ok.dump()));
  CHECK(rep.dist.points.size() == 2);
  bool skipped = false;
  for (const auto& w : rep.warnings)
    skipped = skipped || (w.find("sample 1 skipped") != std::string::npos &&
                          w.find("division by zero") != std::string::npos);
  CHECK(skipped);

  auto fatal = j;
  fatal["samples"] = {{"points",
                       {{0.5, 0.0, 1.0, 1.0}, {0.0, 0.0, 1.0, 1.0},
                        {0.0, 1.0, 1.0, 1.0}}}};
  CHECK_THROWS_MATCHES(run_analysis(parse_config(fatal.dump())), AnalysisError,
                       Catch::Matchers::MessageMatches(
                           ContainsSubstring("fewer than half")));
}

TEST_CASE("candidate evaluation failures degrade to warnings") {
  auto j = flat_json();
  j["candidates"] = {{{"name", "rooty"}, {"expression", "sqrt(x1)*y1^2*0 + y1^2"},
                      {"degree", 2}}};
  j["samples"] = {{"points", {{-0.5, 0.0, 1.0, 1.0}, {0.5, 0.0, 1.0, 1.0}}}};
  AnalysisReport rep = run_analysis(parse_config(j.dump()));
  REQUIRE(rep.candidates.size() == 1);
  CHECK_FALSE(rep.candidates[0].evaluable);
  CHECK_FALSE(rep.candidates[0].passes);
  bool warned = false;
  for (const auto& w : rep.warnings)
    warned = warned || w.find("candidate rooty failed to evaluate") !=
                           std::string::npos;
  CHECK(warned);
  CHECK(rep.verdict.rule == "R0"); // classification still completes
}

TEST_CASE("non-homogeneous spray coefficients trigger a warning") {
  auto j = flat_json();
  j["spray"] = {"y1^3", "0"};
  AnalysisReport rep = run_analysis(parse_config(j.dump()));
  CHECK(rep.spray_homogeneity_max > 1e-3);
  bool warned = false;
  for (const auto& w : rep.warnings)
    warned = warned || w.find("not 2-homogeneous") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("transport tasks that leave the domain are flagged, not fatal") {
  auto j = flat_json();
  j["spray"] = {"sqrt(x2)*y1^2*0.01", "0"};
  j["box"]["x"][1] = {{"min", 0.05, }, {"max", 1.0}};
  j["transport"] = {{{"name", "escape"},
                     {"loop", {{"square", {{"corner", {0.0, -0.05}},
                                           {"side", 0.2}}}}},
                     {"vector", {1.0, 0.0}},
                     {"steps", 200}}};
  AnalysisReport rep = run_analysis(parse_config(j.dump()));
  REQUIRE(rep.transports.size() == 1);
  CHECK(rep.transports[0].flagged);
  CHECK_THAT(rep.transports[0].note, ContainsSubstring("sqrt"));
  bool warned = false;
  for (const auto& w : rep.warnings)
    warned = warned || w.find("transport task escape") != std::string::npos;
  CHECK(warned);
  CHECK_FALSE(rep.verdict.rule.empty()); // classification still completes
}

TEST_CASE("open transport curves report no drift entries") {
  auto j = flat_json();
  j["candidates"] = {{{"name", "kin"}, {"expression", "(y1^2+y2^2)/2"},
                      {"degree", 2}}};
  j["transport"] = {{{"name", "open"},
                     {"loop", {{"polyline", {{0.0, 0.0}, {0.5, 0.0}}}}},
                     {"vector", {1.0, 0.0}},
                     {"steps", 100}}};
  AnalysisReport rep = run_analysis(parse_config(j.dump()));
  REQUIRE(rep.transports.size() == 1);
  CHECK_FALSE(rep.transports[0].closed);
  CHECK(rep.transports[0].drifts.empty());
  CHECK_FALSE(rep.transports[0].flagged);
}
