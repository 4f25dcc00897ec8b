#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "flowcouple/model.hpp"

namespace flowcouple {

/// One off-diagonal generator entry, labeled by the link that produced it.
struct GeneratorEntry {
  std::size_t target = 0;
  double rate = 0.0;
  std::size_t link = 0;
};

/// Sparse generator of a population process. Entries with equal targets but different
/// links are kept apart; solvers sum them.
class Generator {
 public:
  explicit Generator(const NetworkSpec& spec);

  std::size_t size() const { return diagonal_.size(); }
  std::span<const GeneratorEntry> row(std::size_t state) const {
    return {entries_.data() + offsets_[state], entries_.data() + offsets_[state + 1]};
  }
  double diagonal(std::size_t state) const { return diagonal_[state]; }
  /// Largest total exit rate.
  double uniformization_rate() const { return max_exit_; }
  const std::vector<State>& states() const { return states_; }

  /// out = p Q
  void left_multiply(std::span<const double> p, std::span<double> out) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<GeneratorEntry> entries_;
  std::vector<double> diagonal_;
  std::vector<State> states_;
  double max_exit_ = 0.0;
};

Generator build_generator(const NetworkSpec& spec);

struct Event {
  double time = 0.0;
  std::size_t link = 0;   // index into the spec's link list
  Link via;
  State pre;
  State post;
};

/// Time-stamped transitions of one simulated path on [0, horizon].
struct EventLog {
  State initial;
  std::vector<Event> events;
  double horizon = 0.0;
  bool absorbed = false;  // path reached a state with zero exit rate
};

/// Competing-clocks simulation: Exponential(total exit rate) holding times, next link
/// chosen proportionally to its rate, ties in the draw resolved by link order.
EventLog simulate_path(const NetworkSpec& spec, const State& init, double horizon, std::uint64_t seed);

/// Replication r uses seed replication_seed(base_seed, r). Output order is by replication.
std::vector<EventLog> simulate_replications(const NetworkSpec& spec, const State& init, double horizon,
                                            std::uint64_t base_seed, std::size_t reps, unsigned jobs = 1);

using Distribution = std::vector<double>;

/// max_j |(pi Q)_j|
double stationary_residual(const Generator& gen, std::span<const double> pi);

/// Stationary distribution of the unique closed communicating class; states outside it
/// get mass 0. Throws SolverError when there are several closed classes or when the
/// residual cannot be brought below `tol`.
Distribution stationary_distribution(const Generator& gen, double tol = 1e-12);

/// p0 exp(Qt) by uniformization. The Poisson series is truncated once the remaining
/// tail mass is below `tol`.
Distribution transient_distribution(const Generator& gen, std::span<const double> p0, double t,
                                    double tol = 1e-12);

/// E F_link(t) for each t in `times` (nondecreasing, >= 0), flow counters starting at 0
/// and initial distribution p0. Integrates the mean instantaneous rate with Romberg
/// refinement until successive estimates agree within `tol`.
std::vector<double> transient_mean_flow_curve(const NetworkSpec& spec, std::span<const double> p0,
                                              std::size_t link, std::span<const double> times,
                                              double tol = 1e-10);

double transient_mean_flow(const NetworkSpec& spec, std::span<const double> p0, std::size_t link, double t,
                           double tol = 1e-10);

/// sum_x pi(x) alpha_link(x)
double throughput(const NetworkSpec& spec, std::span<const double> pi, std::size_t link);

/// Point mass at `x`; throws ModelError when x is not a state of `spec`.
Distribution point_mass(const NetworkSpec& spec, const State& x);

/// CSV: time,link_from,link_to,state_after
void write_event_log_csv(std::ostream& out, const EventLog& log);

/// CSV: state,probability
void write_distribution_csv(std::ostream& out, const NetworkSpec& spec, std::span<const double> p);

}  // namespace flowcouple
