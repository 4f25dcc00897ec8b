#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowcouple/coupling.hpp"
#include "flowcouple/model.hpp"

namespace flowcouple {

enum class OrderKind { flow, population };

/// One offending (x, x') pair for a rate implication. `a` is a state of model A, `b` of
/// model B; the implication demanded `rate_a <= rate_b` (or `>=`, per `requirement`).
struct ConditionWitness {
  std::string condition;
  Link link;
  State a;
  State b;
  double rate_a = 0.0;
  double rate_b = 0.0;
  std::string requirement;  // "<=" or ">="
};

struct ConditionVerdict {
  std::string id;
  std::string statement;
  bool pass = true;
  std::size_t pairs_checked = 0;  // pairs satisfying the premise
  std::size_t violations = 0;
};

struct ConditionReport {
  OrderKind kind = OrderKind::flow;
  std::string domain;  // quantifier domain of (x, x')
  std::vector<ConditionVerdict> conditions;
  std::vector<ConditionWitness> witnesses;

  bool pass() const { return witnesses.empty(); }
};

/// Sufficient rate conditions for ordering the flow counters of a linear network pair:
///
///   arrival     x1 >= x1'                 => lambda(x) <= lambda'(x')
///   service[i]  x_i <= x_i', x_i+1 >= x_i+1' => mu_i(x) <= mu_i'(x')     (i = 1..n-1)
///   departure   x_n <= x_n'               => mu_n(x) <= mu_n'(x')
///
/// checked exactly over all x in S_A and x' in S_B. Records the first witness of each
/// failing condition, or every witness when `all_witnesses` is set. Throws ModelError
/// when either spec is not a linear network or their node counts differ.
ConditionReport check_flow_conditions(const NetworkSpec& a, const NetworkSpec& b, bool all_witnesses = false);

/// Sufficient rate conditions for coordinatewise ordering of populations, over pairs
/// x <= x':
///
///   entry    x1 = x1' => lambda(x) <= lambda'(x') and mu_1(x) >= mu_1'(x')
///   node[i]  x_i = x_i' => mu_i-1(x) <= mu_i-1'(x') and mu_i(x) >= mu_i'(x')   (i = 2..n)
ConditionReport check_population_conditions(const NetworkSpec& a, const NetworkSpec& b,
                                            bool all_witnesses = false);

/// Coupled configuration in which the counters of link `link` are equal. The remaining
/// per-link gaps d_j = f'_j - f_j follow from node balance with zero initial flows:
/// x'_i - x_i = d_{i-1} - d_i.
struct TightConfiguration {
  std::size_t link = 0;
  State a;
  State b;
  std::vector<std::int64_t> gaps;
};

struct ClosureBreak {
  TightConfiguration config;
  double rate_a = 0.0;
  double rate_b = 0.0;
};

enum class ClosureVerdict { closed, broken, inconclusive };

struct ClosureReport {
  ClosureVerdict verdict = ClosureVerdict::closed;
  std::int64_t gap_bound = 0;
  std::size_t configurations = 0;
  std::vector<ClosureBreak> breaks;
  std::vector<TightConfiguration> over_bound;  // consistent gaps exceeding gap_bound

  bool closed() const { return verdict == ClosureVerdict::closed; }
};

/// Gap bound that covers every consistent configuration: n times the largest coordinate.
std::int64_t sufficient_gap_bound(const NetworkSpec& a, const NetworkSpec& b);

/// All tight configurations with nonnegative gaps, in (link, a, b) order.
std::vector<TightConfiguration> tight_configurations(const NetworkSpec& a, const NetworkSpec& b);

/// Checks that no A-only move on a tight link can fire, i.e. alpha_k(x) <= alpha'_k(x')
/// in every tight configuration. `closed` means the flow order f <= f' can never break
/// along a marching soldiers coupling started from equal states and zero counters.
/// Configurations whose gaps exceed `gap_bound` are not checked and make the verdict
/// inconclusive (unless some checked configuration already breaks).
ClosureReport verify_tight_configurations(const NetworkSpec& a, const NetworkSpec& b, std::int64_t gap_bound);

struct FlowOrderViolation {
  double time = 0.0;
  std::size_t link = 0;
  std::int64_t count_a = 0;
  std::int64_t count_b = 0;
};

/// Every (event, link) at which model A's counter exceeds model B's.
std::vector<FlowOrderViolation> pathwise_flow_order_check(const PairedEventLog& log);

struct PopulationOrderViolation {
  double time = 0.0;
  int node = 0;  // 1-based
  int a = 0;
  int b = 0;
};

/// Every (event, node) at which x_i > x'_i.
std::vector<PopulationOrderViolation> pathwise_population_order_check(const PairedEventLog& log);

struct TailPoint {
  double threshold = 0.0;
  double survival_a = 0.0;  // empirical P(A > threshold)
  double survival_b = 0.0;
  double margin = 0.0;      // 3 standard errors of the difference
};

struct TailOrderReport {
  std::size_t samples_a = 0;
  std::size_t samples_b = 0;
  std::vector<TailPoint> points;
  double max_violation = 0.0;  // max(0, max_s P_A(>s) - P_B(>s))
  bool consistent = true;
};

/// Compares empirical survival functions on the merged support. Throws
/// std::invalid_argument on empty input.
TailOrderReport empirical_tail_order(std::span<const double> a, std::span<const double> b);

struct MeanOrderReport {
  Link link;
  double solver_tol = 0.0;
  double margin_tol = 0.0;
  std::vector<double> times;
  std::vector<double> mean_a;
  std::vector<double> mean_b;
  std::vector<double> margins;  // mean_b - mean_a
  bool pass = true;
};

/// Expected flow counts of both models on a time grid, from a shared initial
/// distribution (weights over states that must lie in both spaces).
MeanOrderReport mean_order_check(const NetworkSpec& a, const NetworkSpec& b, const Link& link,
                                 std::span<const double> times,
                                 const std::vector<std::pair<State, double>>& initial, double solver_tol,
                                 double margin_tol);

}  // namespace flowcouple
