#include "flowcouple/coupling.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "flowcouple/error.hpp"
#include "flowcouple/parallel.hpp"
#include "flowcouple/rng.hpp"

namespace flowcouple {

MarchingRates marching_rates(double a, double b) {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("marching_rates: negative rate");
  return {std::min(a, b), std::max(b - a, 0.0), std::max(a - b, 0.0)};
}

std::string_view to_string(Mover which) {
  switch (which) {
    case Mover::joint: return "joint";
    case Mover::a_only: return "A";
    case Mover::b_only: return "B";
  }
  return "?";
}

CoupledSpec::CoupledSpec(const NetworkSpec& a, const NetworkSpec& b, CouplingKind kind)
    : a_(a), b_(b), kind_(kind) {
  if (a.nodes() != b.nodes())
    throw ModelError("coupled networks have different node counts (" + std::to_string(a.nodes()) + " vs " +
                     std::to_string(b.nodes()) + ")");
  if (a.links() != b.links()) throw ModelError("coupled networks have different link sets");
}

std::vector<CoupledSpec::Move> CoupledSpec::moves(std::size_t ia, std::size_t ib) const {
  std::vector<Move> out;
  for (std::size_t l = 0; l < a_.link_count(); ++l) {
    MarchingRates r = rates(ia, ib, l);
    if (r.joint > 0.0) out.push_back({l, Mover::joint, r.joint, a_.target(ia, l), b_.target(ib, l)});
    if (r.a_only > 0.0) out.push_back({l, Mover::a_only, r.a_only, a_.target(ia, l), ib});
    if (r.b_only > 0.0) out.push_back({l, Mover::b_only, r.b_only, ia, b_.target(ib, l)});
  }
  return out;
}

CoupledSpec build_population_coupling(const NetworkSpec& a, const NetworkSpec& b) {
  return CoupledSpec(a, b, CouplingKind::population);
}

CoupledSpec build_stateflow_coupling(const NetworkSpec& a, const NetworkSpec& b) {
  return CoupledSpec(a, b, CouplingKind::state_flow);
}

namespace {

EventLog project(const PairedEventLog& log, bool side_a) {
  EventLog out;
  out.initial = side_a ? log.initial_a : log.initial_b;
  out.horizon = log.horizon;
  State pre = out.initial;
  for (const auto& e : log.events) {
    bool moved = e.which == Mover::joint || (side_a ? e.which == Mover::a_only : e.which == Mover::b_only);
    if (!moved) continue;
    const State& post = side_a ? e.a : e.b;
    out.events.push_back({e.time, e.link, e.via, pre, post});
    pre = post;
  }
  return out;
}

}  // namespace

EventLog PairedEventLog::project_a() const { return project(*this, true); }
EventLog PairedEventLog::project_b() const { return project(*this, false); }

double PairedEventLog::joint_fraction() const {
  if (events.empty()) return 1.0;
  auto joint = std::count_if(events.begin(), events.end(), [](const PairedEvent& e) { return e.which == Mover::joint; });
  return static_cast<double>(joint) / static_cast<double>(events.size());
}

PairedEventLog simulate_coupled(const CoupledSpec& coupled, const State& init_a, const State& init_b,
                                double horizon, std::uint64_t seed) {
  const NetworkSpec& a = coupled.a();
  const NetworkSpec& b = coupled.b();
  std::size_t ia = a.index_of(init_a);
  std::size_t ib = b.index_of(init_b);
  if (ia == npos) throw ModelError("initial state " + format_state(init_a) + " is not in the state space of model A");
  if (ib == npos) throw ModelError("initial state " + format_state(init_b) + " is not in the state space of model B");
  if (horizon < 0.0) throw ModelError("horizon must be nonnegative");

  PairedEventLog log;
  log.kind = coupled.kind();
  log.initial_a = init_a;
  log.initial_b = init_b;
  log.initial_fa = FlowVector(a.link_count());
  log.initial_fb = FlowVector(b.link_count());
  log.horizon = horizon;
  FlowVector fa = log.initial_fa, fb = log.initial_fb;
  Rng rng(seed);
  double t = 0.0;
  for (;;) {
    auto moves = coupled.moves(ia, ib);
    double total = 0.0;
    for (const auto& m : moves) total += m.rate;
    if (moves.empty()) {
      log.absorbed = true;
      break;
    }
    t += rng.exponential(total);
    if (t > horizon) break;
    double u = rng.uniform() * total;
    std::size_t pick = moves.size() - 1;
    for (std::size_t k = 0; k < moves.size(); ++k) {
      if (u < moves[k].rate) {
        pick = k;
        break;
      }
      u -= moves[k].rate;
    }
    const auto& m = moves[pick];
    if (m.next_a == npos || m.next_b == npos)
      throw ModelError("coupled move on link " + to_string(a.links()[m.link]) + " leaves a state space");
    if (m.which != Mover::b_only) fa.advance(m.link);
    if (m.which != Mover::a_only) fb.advance(m.link);
    ia = m.next_a;
    ib = m.next_b;
    log.events.push_back({t, m.link, a.links()[m.link], m.which, a.states()[ia], b.states()[ib], fa, fb});
  }
  return log;
}

std::vector<PairedEventLog> simulate_coupled_replications(const CoupledSpec& coupled, const State& init_a,
                                                          const State& init_b, double horizon,
                                                          std::uint64_t base_seed, std::size_t reps, unsigned jobs) {
  std::vector<PairedEventLog> logs(reps);
  parallel_for(reps, jobs, [&](std::size_t r) {
    logs[r] = simulate_coupled(coupled, init_a, init_b, horizon, replication_seed(base_seed, r));
  });
  return logs;
}

namespace {

std::string counts_field(const FlowVector& f) {
  std::string out;
  for (std::size_t l = 0; l < f.size(); ++l) {
    if (l) out += ';';
    out += std::to_string(f[l]);
  }
  return out;
}

}  // namespace

void write_paired_log_csv(std::ostream& out, const PairedEventLog& log) {
  out << "time,link_from,link_to,which,stateA,stateB,flowA,flowB\n";
  for (const auto& e : log.events)
    out << format_number(e.time) << ',' << e.via.from << ',' << e.via.to << ',' << to_string(e.which) << ','
        << state_field(e.a) << ',' << state_field(e.b) << ',' << counts_field(e.fa) << ',' << counts_field(e.fb)
        << '\n';
}

}  // namespace flowcouple
