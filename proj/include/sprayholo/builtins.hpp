#pragma once

// The four builtin spray models with their admissible boxes, candidate
// Lagrangians, and expected analysis outcomes.

#include "sprayholo/variational.hpp"

namespace sprayholo {

struct ExpectedVerdict {
  int generic_rank = 0;
  int generic_codim = 0;
  std::string vh2;
  std::string metric_freedom;
  std::string rule;
};

struct BuiltinExample {
  int index = 0;
  std::string title;
  std::shared_ptr<const SprayModel> model;
  std::vector<LagrangianCandidate> candidates;
  ExpectedVerdict expected;
};

inline const std::vector<BuiltinExample>& builtin_examples() {
  static const std::vector<BuiltinExample> list = [] {
    std::vector<BuiltinExample> v;

    {
      BuiltinExample e;
      e.index = 1;
      e.title = "radical spray on the upper half plane";
      auto m = std::make_shared<SprayModel>();
      m->n = 2;
      m->G = {parse_expression("sqrt(x2*y1^2+y2^2)*y1 + y1*y2/(2*x2)"),
              parse_expression("sqrt(x2*y1^2+y2^2)*y2 - y1^2/4")};
      m->box_lo = {-1.0, 0.5, 0.25, 0.25};
      m->box_hi = {1.0, 2.0, 2.0, 2.0};
      e.model = m;
      e.expected = {4, 0, "0", "0", "R1"};
      v.push_back(std::move(e));
    }

    {
      BuiltinExample e;
      e.index = 2;
      e.title = "degenerate spray with a vertical obstruction";
      auto m = std::make_shared<SprayModel>();
      m->n = 2;
      m->G = {parse_expression("y1^2/(2*x2)"), parse_expression("0")};
      m->box_lo = {-1.0, 0.5, 0.25, 0.25};
      m->box_hi = {1.0, 2.0, 2.0, 2.0};
      e.model = m;
      e.expected = {3, 1, "0", "0", "R2"};
      v.push_back(std::move(e));
    }

    {
      BuiltinExample e;
      e.index = 3;
      e.title = "projectively flat family with constant curvature";
      auto m = std::make_shared<SprayModel>();
      m->n = 2;
      m->G = {
          parse_expression("-(mu*(x1*y1+x2*y2)/(1+mu*(x1^2+x2^2)))*y1"),
          parse_expression("-(mu*(x1*y1+x2*y2)/(1+mu*(x1^2+x2^2)))*y2")};
      m->params = {{"mu", 1.0}};
      m->box_lo = {-0.6, -0.6, 0.25, 0.25};
      m->box_hi = {0.6, 0.6, 2.0, 2.0};
      e.model = m;
      e.candidates.push_back(
          {"E_mu",
           parse_expression(
               "(mu*((x1^2+x2^2)*(y1^2+y2^2)-(x1*y1+x2*y2)^2)+(y1^2+y2^2))"
               "/(2*(1+mu*(x1^2+x2^2))^2)"),
           2});
      e.expected = {3, 1, "1", "1", "R3+R4"};
      v.push_back(std::move(e));
    }

    {
      BuiltinExample e;
      e.index = 4;
      e.title = "flat family generated by a constant covector";
      auto m = std::make_shared<SprayModel>();
      m->n = 2;
      m->G = {parse_expression("-((a1*y1+a2*y2)/(1+(a1*x1+a2*x2)))*y1"),
              parse_expression("-((a1*y1+a2*y2)/(1+(a1*x1+a2*x2)))*y2")};
      m->params = {{"a1", 0.3}, {"a2", 0.0}};
      m->box_lo = {-0.6, -0.6, 0.25, 0.25};
      m->box_hi = {0.6, 0.6, 2.0, 2.0};
      e.model = m;
      e.candidates.push_back(
          {"E_a",
           parse_expression(
               "(((1+(a1*x1+a2*x2))*y1-(a1*y1+a2*y2)*x1)^2"
               "+((1+(a1*x1+a2*x2))*y2-(a1*y1+a2*y2)*x2)^2"
               "-(a1*y1+a2*y2)^2)/(2*(1+(a1*x1+a2*x2))^4)"),
           2});
      e.candidates.push_back(
          {"E_phi",
           parse_expression(
               "(((1+(a1*x1+a2*x2))*y1-(a1*y1+a2*y2)*x1)^2"
               "+((1+(a1*x1+a2*x2))*y2-(a1*y1+a2*y2)*x2)^2)"
               "/(2*(1+(a1*x1+a2*x2))^4)"),
           2});
      e.expected = {2, 2, "2", "2", "R0"};
      v.push_back(std::move(e));
    }

    return v;
  }();
  return list;
}

} // namespace sprayholo
