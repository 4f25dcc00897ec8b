#include "flowcouple/report.hpp"

namespace flowcouple {

using nlohmann::json;

std::string to_string(ClosureVerdict verdict) {
  switch (verdict) {
    case ClosureVerdict::closed: return "closed";
    case ClosureVerdict::broken: return "broken";
    case ClosureVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(OrderKind kind) { return kind == OrderKind::flow ? "flow" : "population"; }

json to_json(const ConditionReport& report) {
  json j;
  j["order"] = to_string(report.kind);
  j["verdict"] = report.pass() ? "pass" : "fail";
  j["domain"] = report.domain;
  j["conditions"] = json::array();
  for (const auto& c : report.conditions)
    j["conditions"].push_back({{"id", c.id},
                               {"statement", c.statement},
                               {"verdict", c.pass ? "pass" : "fail"},
                               {"pairs_checked", c.pairs_checked},
                               {"violations", c.violations}});
  j["witnesses"] = json::array();
  for (const auto& w : report.witnesses)
    j["witnesses"].push_back({{"condition", w.condition},
                              {"link", to_string(w.link)},
                              {"x", w.a},
                              {"x_prime", w.b},
                              {"rate", w.rate_a},
                              {"rate_prime", w.rate_b},
                              {"required", "rate " + w.requirement + " rate_prime"}});
  return j;
}

json to_json(const ClosureReport& report) {
  json j;
  j["verdict"] = to_string(report.verdict);
  j["gap_bound"] = report.gap_bound;
  j["configurations"] = report.configurations;
  j["witnesses"] = json::array();
  for (const auto& b : report.breaks)
    j["witnesses"].push_back({{"link_index", b.config.link},
                              {"x", b.config.a},
                              {"x_prime", b.config.b},
                              {"gaps", b.config.gaps},
                              {"rate", b.rate_a},
                              {"rate_prime", b.rate_b}});
  j["over_bound"] = json::array();
  for (const auto& c : report.over_bound)
    j["over_bound"].push_back({{"link_index", c.link}, {"x", c.a}, {"x_prime", c.b}, {"gaps", c.gaps}});
  return j;
}

json to_json(const TailOrderReport& report) {
  json j;
  j["verdict"] = report.consistent ? "consistent" : "inconsistent";
  j["samples_a"] = report.samples_a;
  j["samples_b"] = report.samples_b;
  j["max_violation"] = report.max_violation;
  j["points"] = json::array();
  for (const auto& p : report.points)
    j["points"].push_back({{"threshold", p.threshold},
                           {"survival_a", p.survival_a},
                           {"survival_b", p.survival_b},
                           {"margin", p.margin}});
  return j;
}

json to_json(const MeanOrderReport& report) {
  json j;
  j["verdict"] = report.pass ? "pass" : "fail";
  j["link"] = to_string(report.link);
  j["solver_tol"] = report.solver_tol;
  j["margin_tol"] = report.margin_tol;
  j["margins"] = json::array();
  for (std::size_t k = 0; k < report.times.size(); ++k)
    j["margins"].push_back({{"time", report.times[k]},
                            {"mean_a", report.mean_a[k]},
                            {"mean_b", report.mean_b[k]},
                            {"margin", report.margins[k]}});
  return j;
}

json to_json(const ValidationReport& report) {
  json j;
  j["verdict"] = report.ok() ? "pass" : "fail";
  j["violations"] = json::array();
  for (const auto& v : report.violations)
    j["violations"].push_back({{"state", v.state}, {"link", to_string(v.link)}, {"rate", v.rate}});
  return j;
}

json to_json(const std::vector<FlowOrderViolation>& violations, const NetworkSpec& spec) {
  json j = json::array();
  for (const auto& v : violations)
    j.push_back({{"time", v.time},
                 {"link", to_string(spec.links()[v.link])},
                 {"count_a", v.count_a},
                 {"count_b", v.count_b}});
  return j;
}

}  // namespace flowcouple
