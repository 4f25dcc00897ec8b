#include "flowcouple/stateflow.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "flowcouple/error.hpp"
#include "flowcouple/rng.hpp"

namespace flowcouple {

FlowVector::FlowVector(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  for (auto c : counts_)
    if (c < 0) throw ModelError("flow counters must be nonnegative");
}

void FlowVector::advance(std::size_t link) {
  if (counts_[link] == std::numeric_limits<std::int64_t>::max())
    throw std::overflow_error("flow counter overflow on link index " + std::to_string(link));
  ++counts_[link];
}

std::vector<StateFlowMove> StateFlowRule::moves(const StateFlow& sf) const {
  std::size_t s = spec_.index_of(sf.x);
  if (s == npos) throw ModelError("state " + format_state(sf.x) + " is not in the state space");
  std::vector<StateFlowMove> out;
  for (std::size_t l = 0; l < spec_.link_count(); ++l) {
    double r = spec_.rate(s, l);
    if (r > 0.0) out.push_back({l, r, apply(sf, l)});
  }
  return out;
}

StateFlow StateFlowRule::apply(const StateFlow& sf, std::size_t link) const {
  StateFlow next = sf;
  const Link& l = spec_.links()[link];
  if (l.from > 0) --next.x[static_cast<std::size_t>(l.from - 1)];
  if (l.to > 0) ++next.x[static_cast<std::size_t>(l.to - 1)];
  next.f.advance(link);
  return next;
}

StateFlowRule augment(const NetworkSpec& spec) { return StateFlowRule(spec); }

EventLog StateFlowPath::project(const NetworkSpec& spec) const {
  EventLog log;
  log.initial = initial.x;
  log.horizon = horizon;
  log.absorbed = absorbed;
  State pre = initial.x;
  for (const auto& e : events) {
    log.events.push_back({e.time, e.link, spec.links()[e.link], pre, e.after.x});
    pre = e.after.x;
  }
  return log;
}

StateFlowPath simulate_stateflow(const NetworkSpec& spec, const StateFlow& init, double horizon,
                                 std::uint64_t seed) {
  if (init.f.size() != spec.link_count()) throw ModelError("flow vector has wrong dimension");
  if (!spec.contains(init.x)) throw ModelError("initial state " + format_state(init.x) + " is not in the state space");
  StateFlowRule rule(spec);
  StateFlowPath path;
  path.initial = init;
  path.horizon = horizon;
  Rng rng(seed);
  StateFlow cur = init;
  double t = 0.0;
  for (;;) {
    auto moves = rule.moves(cur);
    double total = 0.0;
    for (const auto& m : moves) total += m.rate;
    if (moves.empty()) {
      path.absorbed = true;
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
    cur = std::move(moves[pick].target);
    path.events.push_back({t, moves[pick].link, cur});
  }
  return path;
}

FlowTrajectory::FlowTrajectory(FlowVector initial, std::vector<double> times, std::vector<std::size_t> links)
    : initial_(std::move(initial)), times_(std::move(times)), links_(std::move(links)) {
  if (times_.size() != links_.size()) throw ModelError("flow trajectory needs one link per jump time");
  FlowVector f = initial_;
  snapshots_.reserve(links_.size() * f.size());
  for (std::size_t l : links_) {
    if (l >= f.size()) throw ModelError("event link index exceeds flow vector dimension");
    f.advance(l);
    snapshots_.insert(snapshots_.end(), f.counts().begin(), f.counts().end());
  }
}

FlowVector FlowTrajectory::at(double t) const {
  auto seen = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  return seen == 0 ? initial_ : after_event(seen - 1);
}

FlowVector FlowTrajectory::after_event(std::size_t k) const {
  if (k >= links_.size()) throw std::out_of_range("flow trajectory has no jump " + std::to_string(k));
  auto first = snapshots_.begin() + static_cast<std::ptrdiff_t>(k * initial_.size());
  return FlowVector(std::vector<std::int64_t>(first, first + static_cast<std::ptrdiff_t>(initial_.size())));
}

void FlowTrajectory::write_csv(std::ostream& out, std::span<const Link> links) const {
  out << "time,link,counter\n";
  for (std::size_t k = 0; k < times_.size(); ++k)
    out << format_number(times_[k]) << ',' << to_string(links[links_[k]]) << ',' << snapshots_[k * initial_.size() + links_[k]] << '\n';
}

FlowTrajectory recover_flows(const EventLog& log, const FlowVector& f0) {
  std::vector<double> times;
  std::vector<std::size_t> links;
  times.reserve(log.events.size());
  links.reserve(log.events.size());
  for (const auto& e : log.events) {
    times.push_back(e.time);
    links.push_back(e.link);
  }
  return FlowTrajectory(f0, std::move(times), std::move(links));
}

BalanceSignature balance_signature(std::span<const Link> links, const State& x, const FlowVector& f) {
  if (f.size() != links.size()) throw ModelError("flow vector has wrong dimension");
  BalanceSignature b(x.begin(), x.end());
  for (std::size_t l = 0; l < links.size(); ++l) {
    if (links[l].to > 0) b[static_cast<std::size_t>(links[l].to - 1)] -= f[l];
    if (links[l].from > 0) b[static_cast<std::size_t>(links[l].from - 1)] += f[l];
  }
  return b;
}

}  // namespace flowcouple
