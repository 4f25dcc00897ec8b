#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "flowcouple/ctmc.hpp"
#include "flowcouple/model.hpp"

namespace flowcouple {

/// Per-link transition counters f, indexed like the spec's link list.
class FlowVector {
 public:
  FlowVector() = default;
  explicit FlowVector(std::size_t links) : counts_(links, 0) {}
  explicit FlowVector(std::vector<std::int64_t> counts);

  std::size_t size() const { return counts_.size(); }
  std::int64_t operator[](std::size_t link) const { return counts_[link]; }
  const std::vector<std::int64_t>& counts() const { return counts_; }

  /// f + e_link. Throws std::overflow_error at the 64-bit limit.
  void advance(std::size_t link);

  friend bool operator==(const FlowVector&, const FlowVector&) = default;

 private:
  std::vector<std::int64_t> counts_;
};

/// Population paired with its flow counters, (x, f).
struct StateFlow {
  State x;
  FlowVector f;

  friend bool operator==(const StateFlow&, const StateFlow&) = default;
};

struct StateFlowMove {
  std::size_t link = 0;
  double rate = 0.0;
  StateFlow target;
};

/// Transition rule of the flow-augmented process: (x, f) -> (x - e_i + e_j, f + e_ij) at
/// rate alpha_ij(x). Rates never depend on f. Holds a reference to `spec`.
class StateFlowRule {
 public:
  explicit StateFlowRule(const NetworkSpec& spec) : spec_(spec) {}

  const NetworkSpec& spec() const { return spec_; }

  /// Enabled transitions (positive rate) in link order.
  std::vector<StateFlowMove> moves(const StateFlow& sf) const;

  /// T_link(x, f)
  StateFlow apply(const StateFlow& sf, std::size_t link) const;

 private:
  const NetworkSpec& spec_;
};

StateFlowRule augment(const NetworkSpec& spec);

struct StateFlowEvent {
  double time = 0.0;
  std::size_t link = 0;
  StateFlow after;
};

struct StateFlowPath {
  StateFlow initial;
  std::vector<StateFlowEvent> events;
  double horizon = 0.0;
  bool absorbed = false;

  /// Population projection (flows dropped).
  EventLog project(const NetworkSpec& spec) const;
};

/// Simulates the augmented process directly, advancing counters at each jump.
StateFlowPath simulate_stateflow(const NetworkSpec& spec, const StateFlow& init, double horizon,
                                 std::uint64_t seed);

/// Right-continuous flow step functions recovered from a population path.
class FlowTrajectory {
 public:
  FlowTrajectory(FlowVector initial, std::vector<double> times, std::vector<std::size_t> links);

  /// F(t): initial counters plus the number of events on each link with time <= t.
  FlowVector at(double t) const;

  /// Counters right after jump k (0-based). Throws std::out_of_range past the last jump.
  FlowVector after_event(std::size_t k) const;

  std::size_t jumps() const { return times_.size(); }
  const FlowVector& initial() const { return initial_; }

  /// CSV: time,link,counter (one row per jump; link as "i->j").
  void write_csv(std::ostream& out, std::span<const Link> links) const;

 private:
  FlowVector initial_;
  std::vector<double> times_;
  std::vector<std::size_t> links_;
  std::vector<std::int64_t> snapshots_;  // all counters after each jump, row-major
};

FlowTrajectory recover_flows(const EventLog& log, const FlowVector& f0);

/// b_i = x_i - sum_{(j,i)} f_ji + sum_{(i,j)} f_ij for nodes i = 1..n.
using BalanceSignature = std::vector<std::int64_t>;

BalanceSignature balance_signature(std::span<const Link> links, const State& x, const FlowVector& f);

}  // namespace flowcouple
