#pragma once

// Analysis configuration: JSON ingestion with strict key checking, defaults,
// and field-naming validation errors.

#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sprayholo/transport.hpp"

namespace sprayholo {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Bound {
  double lo = 0;
  double hi = 0;
  bool strict_lo = false;
  bool strict_hi = false;
};

struct LoopSpec {
  // exactly one of the three shapes is populated
  std::vector<double> square_corner; // with square_side
  double square_side = 0;
  std::vector<std::vector<double>> polyline;
  std::vector<std::string> expressions; // with expression_params
  std::map<std::string, double> expression_params;
};

struct TransportTask {
  std::string name;
  LoopSpec loop;
  std::vector<double> vector;
  int steps = 1000;
};

struct AnalysisConfig {
  int n = 0;
  std::vector<std::string> spray; // n coefficient expressions
  std::map<std::string, double> params;
  std::vector<Bound> box; // 2n bounds, x block then y block

  struct Candidate {
    std::string name;
    std::string expression;
    int degree = 2;
  };
  std::vector<Candidate> candidates;

  int sample_count = 50;
  std::uint64_t seed = 1;
  std::vector<std::vector<double>> explicit_points;

  double tol_rank = 1e-8;
  double tol_el = 1e-8;
  double tol_invariance = 1e-7;
  double tol_homogeneity = 1e-9;
  double tol_hessian = 1e-8;

  int max_bracket_depth = 0; // 0 selects 2n
  int max_ad_depth = 8;      // cap on nested differentiation levels

  std::vector<TransportTask> transport;

  std::string config_hash; // FNV-1a of the source text
};

namespace detail {

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline void check_keys(const nlohmann::json& o,
                       std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

inline double require_number(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number())
    throw ConfigError(field + " must be a number");
  return v.get<double>();
}

inline Bound parse_bound(const nlohmann::json& b, const std::string& where) {
  if (!b.is_object()) throw ConfigError(where + " must be an object");
  check_keys(b, {"min", "max", "strict_min", "strict_max"}, where);
  if (!b.contains("min") || !b.contains("max"))
    throw ConfigError(where + " needs min and max");
  Bound out;
  out.lo = require_number(b["min"], where + ".min");
  out.hi = require_number(b["max"], where + ".max");
  if (b.contains("strict_min")) out.strict_lo = b["strict_min"].get<bool>();
  if (b.contains("strict_max")) out.strict_hi = b["strict_max"].get<bool>();
  if (!(out.lo < out.hi))
    throw ConfigError(where + ": min must be strictly below max");
  return out;
}

inline std::vector<double> parse_point(const nlohmann::json& p, std::size_t want,
                                       const std::string& where) {
  if (!p.is_array() || p.size() != want)
    throw ConfigError(where + " must be an array of " + std::to_string(want) +
                      " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    out.push_back(require_number(p[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline LoopSpec parse_loop(const nlohmann::json& l, int n,
                           const std::string& where) {
  if (!l.is_object()) throw ConfigError(where + " must be an object");
  check_keys(l, {"square", "polyline", "expressions"}, where);
  LoopSpec out;
  int shapes = 0;
  if (l.contains("square")) {
    ++shapes;
    const auto& s = l["square"];
    check_keys(s, {"corner", "side"}, where + ".square");
    if (!s.contains("corner") || !s.contains("side"))
      throw ConfigError(where + ".square needs corner and side");
    out.square_corner = parse_point(s["corner"], static_cast<std::size_t>(n),
                                    where + ".square.corner");
    out.square_side = require_number(s["side"], where + ".square.side");
    if (out.square_side <= 0)
      throw ConfigError(where + ".square.side must be positive");
  }
  if (l.contains("polyline")) {
    ++shapes;
    const auto& p = l["polyline"];
    if (!p.is_array() || p.size() < 2)
      throw ConfigError(where + ".polyline needs at least two points");
    for (std::size_t i = 0; i < p.size(); ++i)
      out.polyline.push_back(parse_point(p[i], static_cast<std::size_t>(n),
                                         where + ".polyline[" +
                                             std::to_string(i) + "]"));
  }
  if (l.contains("expressions")) {
    ++shapes;
    const auto& e = l["expressions"];
    check_keys(e, {"coords", "params"}, where + ".expressions");
    if (!e.contains("coords") || !e["coords"].is_array() ||
        e["coords"].size() != static_cast<std::size_t>(n))
      throw ConfigError(where + ".expressions.coords must list " +
                        std::to_string(n) + " expressions");
    for (const auto& c : e["coords"]) {
      if (!c.is_string())
        throw ConfigError(where + ".expressions.coords entries must be strings");
      out.expressions.push_back(c.get<std::string>());
    }
    if (e.contains("params")) {
      for (auto it = e["params"].begin(); it != e["params"].end(); ++it)
        out.expression_params[it.key()] =
            require_number(it.value(), where + ".expressions.params." + it.key());
    }
  }
  if (shapes != 1)
    throw ConfigError(where +
                      " must use exactly one of square, polyline, expressions");
  return out;
}

} // namespace detail

inline AnalysisConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  detail::check_keys(j,
                     {"n", "spray", "params", "box", "candidates", "samples",
                      "tolerances", "max_bracket_depth", "max_ad_depth",
                      "transport"},
                     "config");

  AnalysisConfig cfg;
  cfg.config_hash = detail::fnv1a_hex(text);

  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ConfigError("n ≥ 2 required");
  cfg.n = j["n"].get<int>();
  if (cfg.n < 2) throw ConfigError("n ≥ 2 required");

  if (!j.contains("spray") || !j["spray"].is_array() ||
      j["spray"].size() != static_cast<std::size_t>(cfg.n))
    throw ConfigError("spray must list exactly n coefficient expressions");
  for (const auto& s : j["spray"]) {
    if (!s.is_string()) throw ConfigError("spray entries must be strings");
    cfg.spray.push_back(s.get<std::string>());
  }

  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("params must be an object");
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
      cfg.params[it.key()] =
          detail::require_number(it.value(), "params." + it.key());
  }

  if (!j.contains("box")) throw ConfigError("box required");
  {
    const auto& b = j["box"];
    detail::check_keys(b, {"x", "y"}, "box");
    for (const char* blk : {"x", "y"}) {
      if (!b.contains(blk) || !b[blk].is_array() ||
          b[blk].size() != static_cast<std::size_t>(cfg.n))
        throw ConfigError(std::string("box.") + blk + " must list n bounds");
      for (std::size_t i = 0; i < b[blk].size(); ++i)
        cfg.box.push_back(detail::parse_bound(
            b[blk][i],
            "box." + std::string(blk) + "[" + std::to_string(i) + "]"));
    }
  }

  if (j.contains("candidates")) {
    if (!j["candidates"].is_array())
      throw ConfigError("candidates must be an array");
    for (std::size_t i = 0; i < j["candidates"].size(); ++i) {
      const auto& c = j["candidates"][i];
      std::string where = "candidates[" + std::to_string(i) + "]";
      detail::check_keys(c, {"name", "expression", "degree"}, where);
      if (!c.contains("name") || !c["name"].is_string() ||
          !c.contains("expression") || !c["expression"].is_string())
        throw ConfigError(where + " needs name and expression strings");
      AnalysisConfig::Candidate out;
      out.name = c["name"].get<std::string>();
      out.expression = c["expression"].get<std::string>();
      if (c.contains("degree")) {
        if (!c["degree"].is_number_integer())
          throw ConfigError(where + ".degree must be an integer");
        out.degree = c["degree"].get<int>();
        if (out.degree < 0)
          throw ConfigError(where + ".degree must be nonnegative");
      }
      cfg.candidates.push_back(std::move(out));
    }
  }

  if (j.contains("samples")) {
    const auto& s = j["samples"];
    detail::check_keys(s, {"count", "seed", "points"}, "samples");
    if (s.contains("points")) {
      if (s.contains("count") || s.contains("seed"))
        throw ConfigError("samples.points excludes count and seed");
      for (std::size_t i = 0; i < s["points"].size(); ++i)
        cfg.explicit_points.push_back(detail::parse_point(
            s["points"][i], static_cast<std::size_t>(2 * cfg.n),
            "samples.points[" + std::to_string(i) + "]"));
      if (cfg.explicit_points.empty())
        throw ConfigError("samples.points must not be empty");
      cfg.sample_count = static_cast<int>(cfg.explicit_points.size());
    } else {
      if (s.contains("count")) {
        if (!s["count"].is_number_integer() || s["count"].get<int>() < 1)
          throw ConfigError("samples.count ≥ 1 required");
        cfg.sample_count = s["count"].get<int>();
      }
      if (s.contains("seed")) {
        if (!s["seed"].is_number_unsigned() && !s["seed"].is_number_integer())
          throw ConfigError("samples.seed must be an unsigned integer");
        cfg.seed = s["seed"].get<std::uint64_t>();
      }
    }
  }

  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    detail::check_keys(t, {"rank", "el", "invariance", "homogeneity", "hessian"},
                       "tolerances");
    auto grab = [&](const char* key, double& slot) {
      if (!t.contains(key)) return;
      slot = detail::require_number(t[key], std::string("tolerances.") + key);
      if (slot <= 0)
        throw ConfigError(std::string("tolerances.") + key +
                          " must be positive");
    };
    grab("rank", cfg.tol_rank);
    grab("el", cfg.tol_el);
    grab("invariance", cfg.tol_invariance);
    grab("homogeneity", cfg.tol_homogeneity);
    grab("hessian", cfg.tol_hessian);
  }

  if (j.contains("max_bracket_depth")) {
    if (!j["max_bracket_depth"].is_number_integer() ||
        j["max_bracket_depth"].get<int>() < 0)
      throw ConfigError("max_bracket_depth must be a nonnegative integer");
    cfg.max_bracket_depth = j["max_bracket_depth"].get<int>();
  }
  if (j.contains("max_ad_depth")) {
    if (!j["max_ad_depth"].is_number_integer() ||
        j["max_ad_depth"].get<int>() < 2)
      throw ConfigError("max_ad_depth must be an integer ≥ 2");
    cfg.max_ad_depth = j["max_ad_depth"].get<int>();
  }

  if (j.contains("transport")) {
    if (!j["transport"].is_array())
      throw ConfigError("transport must be an array");
    for (std::size_t i = 0; i < j["transport"].size(); ++i) {
      const auto& t = j["transport"][i];
      std::string where = "transport[" + std::to_string(i) + "]";
      detail::check_keys(t, {"name", "loop", "vector", "steps"}, where);
      if (!t.contains("name") || !t["name"].is_string())
        throw ConfigError(where + " needs a name");
      if (!t.contains("loop")) throw ConfigError(where + " needs a loop");
      if (!t.contains("vector"))
        throw ConfigError(where + " needs an initial vector");
      TransportTask task;
      task.name = t["name"].get<std::string>();
      task.loop = detail::parse_loop(t["loop"], cfg.n, where + ".loop");
      task.vector = detail::parse_point(
          t["vector"], static_cast<std::size_t>(cfg.n), where + ".vector");
      if (t.contains("steps")) {
        if (!t["steps"].is_number_integer() || t["steps"].get<int>() < 1)
          throw ConfigError(where + ".steps must be a positive integer");
        task.steps = t["steps"].get<int>();
      }
      cfg.transport.push_back(std::move(task));
    }
  }

  // the expressions must parse against this dimension and parameter set
  std::set<std::string> names;
  for (const auto& kv : cfg.params) names.insert(kv.first);
  for (std::size_t i = 0; i < cfg.spray.size(); ++i) {
    try {
      parse_expression(cfg.spray[i], cfg.n, names);
    } catch (const ParseError& e) {
      throw ConfigError("spray[" + std::to_string(i) + "]: " + e.what());
    }
  }
  for (const auto& c : cfg.candidates) {
    try {
      parse_expression(c.expression, cfg.n, names);
    } catch (const ParseError& e) {
      throw ConfigError("candidate " + c.name + ": " + e.what());
    }
  }

  // explicit points must respect the box, including strict bounds
  for (std::size_t k = 0; k < cfg.explicit_points.size(); ++k) {
    const auto& p = cfg.explicit_points[k];
    for (std::size_t a = 0; a < cfg.box.size(); ++a) {
      const Bound& b = cfg.box[a];
      bool lo_ok = b.strict_lo ? p[a] > b.lo : p[a] >= b.lo;
      bool hi_ok = b.strict_hi ? p[a] < b.hi : p[a] <= b.hi;
      if (!lo_ok || !hi_ok)
        throw ConfigError("samples.points[" + std::to_string(k) +
                          "] violates box bound " + std::to_string(a));
    }
  }

  return cfg;
}

inline AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline std::shared_ptr<SprayModel> build_model(const AnalysisConfig& cfg) {
  auto m = std::make_shared<SprayModel>();
  m->n = cfg.n;
  std::set<std::string> names;
  for (const auto& kv : cfg.params) names.insert(kv.first);
  for (const auto& s : cfg.spray)
    m->G.push_back(parse_expression(s, cfg.n, names));
  m->params = cfg.params;
  for (const auto& b : cfg.box) m->box_lo.push_back(b.lo);
  for (const auto& b : cfg.box) m->box_hi.push_back(b.hi);
  return m;
}

inline BaseCurve build_curve(const LoopSpec& spec) {
  if (!spec.square_corner.empty())
    return BaseCurve::square(spec.square_corner, spec.square_side);
  if (!spec.polyline.empty()) return BaseCurve::polyline(spec.polyline);
  return BaseCurve::from_expressions(spec.expressions, spec.expression_params);
}

} // namespace sprayholo
