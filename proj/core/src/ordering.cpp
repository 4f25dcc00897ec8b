#include "flowcouple/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "flowcouple/ctmc.hpp"
#include "flowcouple/error.hpp"

namespace flowcouple {

namespace {

void require_linear_pair(const NetworkSpec& a, const NetworkSpec& b) {
  if (!a.is_linear() || !b.is_linear())
    throw ModelError("ordering conditions need open linear networks with links (0,1),(1,2),...,(n,0)");
  if (a.nodes() != b.nodes())
    throw ModelError("models have different node counts (" + std::to_string(a.nodes()) + " vs " +
                     std::to_string(b.nodes()) + ")");
}

// One rate comparison attached to a condition.
struct Clause {
  std::size_t link;
  bool a_below;  // true: require rate_a <= rate_b, false: rate_a >= rate_b
};

struct Condition {
  std::string id;
  std::string statement;
  std::function<bool(const State&, const State&)> premise;
  std::vector<Clause> clauses;
};

ConditionReport evaluate(const NetworkSpec& a, const NetworkSpec& b, OrderKind kind, std::string domain,
                         const std::vector<Condition>& conditions, bool ordered_pairs_only, bool all_witnesses) {
  ConditionReport report;
  report.kind = kind;
  report.domain = std::move(domain);
  for (const auto& c : conditions) report.conditions.push_back({c.id, c.statement, true, 0, 0});

  std::vector<std::vector<ConditionWitness>> found(conditions.size());
  for (std::size_t ia = 0; ia < a.size(); ++ia) {
    const State& x = a.states()[ia];
    for (std::size_t ib = 0; ib < b.size(); ++ib) {
      const State& y = b.states()[ib];
      if (ordered_pairs_only) {
        bool le = true;
        for (std::size_t i = 0; i < x.size() && le; ++i) le = x[i] <= y[i];
        if (!le) continue;
      }
      for (std::size_t c = 0; c < conditions.size(); ++c) {
        const Condition& cond = conditions[c];
        if (!cond.premise(x, y)) continue;
        auto& verdict = report.conditions[c];
        ++verdict.pairs_checked;
        for (const Clause& clause : cond.clauses) {
          double ra = a.rate(ia, clause.link);
          double rb = b.rate(ib, clause.link);
          bool holds = clause.a_below ? ra <= rb : ra >= rb;
          if (holds) continue;
          ++verdict.violations;
          verdict.pass = false;
          if (all_witnesses || found[c].empty())
            found[c].push_back({cond.id, a.links()[clause.link], x, y, ra, rb, clause.a_below ? "<=" : ">="});
        }
      }
    }
  }
  for (auto& w : found) report.witnesses.insert(report.witnesses.end(), w.begin(), w.end());
  return report;
}

}  // namespace

ConditionReport check_flow_conditions(const NetworkSpec& a, const NetworkSpec& b, bool all_witnesses) {
  require_linear_pair(a, b);
  const int n = a.nodes();
  std::vector<Condition> conditions;
  conditions.push_back({"arrival", "x1 >= x1' => lambda(x) <= lambda'(x')",
                        [](const State& x, const State& y) { return x[0] >= y[0]; },
                        {{0, true}}});
  for (int i = 1; i < n; ++i) {
    std::size_t c = static_cast<std::size_t>(i - 1);
    std::string si = std::to_string(i), sj = std::to_string(i + 1);
    conditions.push_back({"service[" + si + "]",
                          "x" + si + " <= x" + si + "' and x" + sj + " >= x" + sj + "' => mu" + si + "(x) <= mu" + si +
                              "'(x')",
                          [c](const State& x, const State& y) { return x[c] <= y[c] && x[c + 1] >= y[c + 1]; },
                          {{static_cast<std::size_t>(i), true}}});
  }
  std::string sn = std::to_string(n);
  std::size_t last = static_cast<std::size_t>(n - 1);
  conditions.push_back({"departure", "x" + sn + " <= x" + sn + "' => mu" + sn + "(x) <= mu" + sn + "'(x')",
                        [last](const State& x, const State& y) { return x[last] <= y[last]; },
                        {{static_cast<std::size_t>(n), true}}});
  return evaluate(a, b, OrderKind::flow, "x in S_A, x' in S_B", conditions, false, all_witnesses);
}

ConditionReport check_population_conditions(const NetworkSpec& a, const NetworkSpec& b, bool all_witnesses) {
  require_linear_pair(a, b);
  const int n = a.nodes();
  std::vector<Condition> conditions;
  conditions.push_back({"entry", "x1 = x1' => lambda(x) <= lambda'(x') and mu1(x) >= mu1'(x')",
                        [](const State& x, const State& y) { return x[0] == y[0]; },
                        {{0, true}, {1, false}}});
  for (int i = 2; i <= n; ++i) {
    std::size_t c = static_cast<std::size_t>(i - 1);
    std::string si = std::to_string(i), sp = std::to_string(i - 1);
    conditions.push_back({"node[" + si + "]",
                          "x" + si + " = x" + si + "' => mu" + sp + "(x) <= mu" + sp + "'(x') and mu" + si +
                              "(x) >= mu" + si + "'(x')",
                          [c](const State& x, const State& y) { return x[c] == y[c]; },
                          {{static_cast<std::size_t>(i - 1), true}, {static_cast<std::size_t>(i), false}}});
  }
  return evaluate(a, b, OrderKind::population, "x in S_A, x' in S_B, x <= x'", conditions, true, all_witnesses);
}

std::int64_t sufficient_gap_bound(const NetworkSpec& a, const NetworkSpec& b) {
  std::int64_t largest = 0;
  for (const auto* spec : {&a, &b})
    for (const State& x : spec->states())
      for (int v : x) largest = std::max<std::int64_t>(largest, v);
  return static_cast<std::int64_t>(a.nodes()) * largest;
}

namespace {

// Gaps d with d_link = 0 solving x'_i - x_i = d_{i-1} - d_i for i = 1..n.
std::vector<std::int64_t> solve_gaps(const State& x, const State& y, std::size_t link) {
  const std::size_t n = x.size();
  std::vector<std::int64_t> d(n + 1, 0);
  for (std::size_t j = link + 1; j <= n; ++j) d[j] = d[j - 1] - (y[j - 1] - x[j - 1]);
  for (std::size_t j = link; j >= 1; --j) d[j - 1] = d[j] + (y[j - 1] - x[j - 1]);
  return d;
}

template <class Visit>
void for_each_tight(const NetworkSpec& a, const NetworkSpec& b, Visit&& visit) {
  const std::size_t links = a.link_count();
  for (std::size_t k = 0; k < links; ++k)
    for (std::size_t ia = 0; ia < a.size(); ++ia)
      for (std::size_t ib = 0; ib < b.size(); ++ib) {
        auto d = solve_gaps(a.states()[ia], b.states()[ib], k);
        if (std::all_of(d.begin(), d.end(), [](std::int64_t g) { return g >= 0; })) visit(k, ia, ib, std::move(d));
      }
}

}  // namespace

std::vector<TightConfiguration> tight_configurations(const NetworkSpec& a, const NetworkSpec& b) {
  require_linear_pair(a, b);
  std::vector<TightConfiguration> out;
  for_each_tight(a, b, [&](std::size_t k, std::size_t ia, std::size_t ib, std::vector<std::int64_t> d) {
    out.push_back({k, a.states()[ia], b.states()[ib], std::move(d)});
  });
  return out;
}

ClosureReport verify_tight_configurations(const NetworkSpec& a, const NetworkSpec& b, std::int64_t gap_bound) {
  require_linear_pair(a, b);
  if (gap_bound < 0) throw std::invalid_argument("gap bound must be nonnegative");
  ClosureReport report;
  report.gap_bound = gap_bound;
  for_each_tight(a, b, [&](std::size_t k, std::size_t ia, std::size_t ib, std::vector<std::int64_t> d) {
    ++report.configurations;
    TightConfiguration config{k, a.states()[ia], b.states()[ib], std::move(d)};
    if (*std::max_element(config.gaps.begin(), config.gaps.end()) > gap_bound) {
      report.over_bound.push_back(std::move(config));
      return;
    }
    double ra = a.rate(ia, k), rb = b.rate(ib, k);
    if (ra > rb) report.breaks.push_back({std::move(config), ra, rb});
  });
  if (!report.breaks.empty()) {
    report.verdict = ClosureVerdict::broken;
  } else if (!report.over_bound.empty()) {
    report.verdict = ClosureVerdict::inconclusive;
  } else {
    report.verdict = ClosureVerdict::closed;
  }
  return report;
}

std::vector<FlowOrderViolation> pathwise_flow_order_check(const PairedEventLog& log) {
  std::vector<FlowOrderViolation> out;
  auto scan = [&](double t, const FlowVector& fa, const FlowVector& fb) {
    for (std::size_t l = 0; l < fa.size(); ++l)
      if (fa[l] > fb[l]) out.push_back({t, l, fa[l], fb[l]});
  };
  scan(0.0, log.initial_fa, log.initial_fb);
  for (const auto& e : log.events) scan(e.time, e.fa, e.fb);
  return out;
}

std::vector<PopulationOrderViolation> pathwise_population_order_check(const PairedEventLog& log) {
  std::vector<PopulationOrderViolation> out;
  auto scan = [&](double t, const State& x, const State& y) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > y[i]) out.push_back({t, static_cast<int>(i) + 1, x[i], y[i]});
  };
  scan(0.0, log.initial_a, log.initial_b);
  for (const auto& e : log.events) scan(e.time, e.a, e.b);
  return out;
}

TailOrderReport empirical_tail_order(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empirical_tail_order: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> support;
  std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(support));
  support.erase(std::unique(support.begin(), support.end()), support.end());

  TailOrderReport report;
  report.samples_a = sa.size();
  report.samples_b = sb.size();
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  for (double s : support) {
    double pa = static_cast<double>(sa.end() - std::upper_bound(sa.begin(), sa.end(), s)) / na;
    double pb = static_cast<double>(sb.end() - std::upper_bound(sb.begin(), sb.end(), s)) / nb;
    double se = std::sqrt(pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb);
    TailPoint p{s, pa, pb, 3.0 * se};
    double violation = pa - pb;
    report.max_violation = std::max(report.max_violation, violation);
    if (violation > p.margin) report.consistent = false;
    report.points.push_back(p);
  }
  return report;
}

MeanOrderReport mean_order_check(const NetworkSpec& a, const NetworkSpec& b, const Link& link,
                                 std::span<const double> times,
                                 const std::vector<std::pair<State, double>>& initial, double solver_tol,
                                 double margin_tol) {
  auto la = a.link_index(link), lb = b.link_index(link);
  if (!la || !lb) throw ModelError("link " + to_string(link) + " is not in both models");
  if (initial.empty()) throw ModelError("initial distribution is empty");
  Distribution pa(a.size(), 0.0), pb(b.size(), 0.0);
  double total = 0.0;
  for (const auto& [x, w] : initial) {
    std::size_t ia = a.index_of(x), ib = b.index_of(x);
    if (ia == npos || ib == npos)
      throw ModelError("initial state " + format_state(x) + " is not in both state spaces");
    if (w < 0.0) throw ModelError("negative initial weight");
    pa[ia] += w;
    pb[ib] += w;
    total += w;
  }
  if (!(total > 0.0)) throw ModelError("initial distribution has zero mass");
  for (double& v : pa) v /= total;
  for (double& v : pb) v /= total;

  MeanOrderReport report;
  report.link = link;
  report.solver_tol = solver_tol;
  report.margin_tol = margin_tol;
  report.times.assign(times.begin(), times.end());
  report.mean_a = transient_mean_flow_curve(a, pa, *la, times, solver_tol);
  report.mean_b = transient_mean_flow_curve(b, pb, *lb, times, solver_tol);
  for (std::size_t k = 0; k < times.size(); ++k) {
    double m = report.mean_b[k] - report.mean_a[k];
    report.margins.push_back(m);
    if (m < -margin_tol) report.pass = false;
  }
  return report;
}

}  // namespace flowcouple
