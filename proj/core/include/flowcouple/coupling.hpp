#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "flowcouple/ctmc.hpp"
#include "flowcouple/model.hpp"
#include "flowcouple/stateflow.hpp"

namespace flowcouple {

/// Three-way split of a link's rates in the marching soldiers coupling.
struct MarchingRates {
  double joint = 0.0;   // min(a, b)
  double b_only = 0.0;  // (b - a)+
  double a_only = 0.0;  // (a - b)+
};

/// Throws std::invalid_argument on negative input.
MarchingRates marching_rates(double a, double b);

enum class CouplingKind { population, state_flow };

/// Which component a coupled transition moves.
enum class Mover { joint, a_only, b_only };

std::string_view to_string(Mover which);

/// Marching soldiers coupling of two population processes (or of their flow
/// augmentations) on a common node and link set. Rates are computed on demand from the
/// component specs, which must outlive this object.
class CoupledSpec {
 public:
  CoupledSpec(const NetworkSpec& a, const NetworkSpec& b, CouplingKind kind);

  const NetworkSpec& a() const { return a_; }
  const NetworkSpec& b() const { return b_; }
  CouplingKind kind() const { return kind_; }

  /// Rates of `link` at state indices (ia, ib).
  MarchingRates rates(std::size_t ia, std::size_t ib, std::size_t link) const {
    return marching_rates(a_.rate(ia, link), b_.rate(ib, link));
  }

  struct Move {
    std::size_t link = 0;
    Mover which = Mover::joint;
    double rate = 0.0;
    std::size_t next_a = 0;
    std::size_t next_b = 0;
  };

  /// Positive-rate coupled transitions from (ia, ib): per link in link order, joint then
  /// A-only then B-only.
  std::vector<Move> moves(std::size_t ia, std::size_t ib) const;

 private:
  const NetworkSpec& a_;
  const NetworkSpec& b_;
  CouplingKind kind_;
};

/// Throws ModelError when the node counts or link lists differ.
CoupledSpec build_population_coupling(const NetworkSpec& a, const NetworkSpec& b);
CoupledSpec build_stateflow_coupling(const NetworkSpec& a, const NetworkSpec& b);

struct PairedEvent {
  double time = 0.0;
  std::size_t link = 0;
  Link via;
  Mover which = Mover::joint;
  State a;  // states and counters after the event
  State b;
  FlowVector fa;
  FlowVector fb;
};

struct PairedEventLog {
  CouplingKind kind = CouplingKind::state_flow;
  State initial_a;
  State initial_b;
  FlowVector initial_fa;
  FlowVector initial_fb;
  std::vector<PairedEvent> events;
  double horizon = 0.0;
  bool absorbed = false;

  /// Joint and A-only events, as a path of model A.
  EventLog project_a() const;
  /// Joint and B-only events, as a path of model B.
  EventLog project_b() const;

  /// Fraction of events that moved both components.
  double joint_fraction() const;
};

/// Gillespie simulation of the coupled chain with zero initial flow counters.
PairedEventLog simulate_coupled(const CoupledSpec& coupled, const State& init_a, const State& init_b,
                                double horizon, std::uint64_t seed);

std::vector<PairedEventLog> simulate_coupled_replications(const CoupledSpec& coupled, const State& init_a,
                                                          const State& init_b, double horizon,
                                                          std::uint64_t base_seed, std::size_t reps,
                                                          unsigned jobs = 1);

/// CSV: time,link_from,link_to,which,stateA,stateB,flowA,flowB
void write_paired_log_csv(std::ostream& out, const PairedEventLog& log);

}  // namespace flowcouple
