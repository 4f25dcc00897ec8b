#include "flowcouple/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "flowcouple/error.hpp"
#include "flowcouple/parallel.hpp"
#include "flowcouple/rng.hpp"

namespace flowcouple {

Generator::Generator(const NetworkSpec& spec) : states_(spec.states()) {
  const std::size_t m = spec.size();
  offsets_.reserve(m + 1);
  offsets_.push_back(0);
  diagonal_.assign(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    double exit = 0.0;
    for (std::size_t l = 0; l < spec.link_count(); ++l) {
      double r = spec.rate(s, l);
      if (r <= 0.0) continue;
      std::size_t t = spec.target(s, l);
      if (t == npos)
        throw ModelError("link " + to_string(spec.links()[l]) + " leaves the state space from " +
                         format_state(spec.states()[s]));
      entries_.push_back({t, r, l});
      exit += r;
    }
    diagonal_[s] = -exit;
    max_exit_ = std::max(max_exit_, exit);
    offsets_.push_back(entries_.size());
  }
}

void Generator::left_multiply(std::span<const double> p, std::span<double> out) const {
  for (std::size_t s = 0; s < size(); ++s) out[s] = p[s] * diagonal_[s];
  for (std::size_t s = 0; s < size(); ++s) {
    if (p[s] == 0.0) continue;
    for (const auto& e : row(s)) out[e.target] += p[s] * e.rate;
  }
}

Generator build_generator(const NetworkSpec& spec) { return Generator(spec); }

EventLog simulate_path(const NetworkSpec& spec, const State& init, double horizon, std::uint64_t seed) {
  std::size_t s = spec.index_of(init);
  if (s == npos) throw ModelError("initial state " + format_state(init) + " is not in the state space");
  if (horizon < 0.0) throw ModelError("horizon must be nonnegative");
  EventLog log;
  log.initial = init;
  log.horizon = horizon;
  Rng rng(seed);
  const std::size_t nl = spec.link_count();
  double t = 0.0;
  for (;;) {
    double total = spec.exit_rate(s);
    if (total <= 0.0) {
      log.absorbed = true;
      break;
    }
    t += rng.exponential(total);
    if (t > horizon) break;
    double u = rng.uniform() * total;
    std::size_t chosen = npos;
    for (std::size_t l = 0; l < nl; ++l) {
      double r = spec.rate(s, l);
      if (r <= 0.0) continue;
      chosen = l;
      if (u < r) break;
      u -= r;
    }
    std::size_t next = spec.target(s, chosen);
    if (next == npos)
      throw ModelError("link " + to_string(spec.links()[chosen]) + " leaves the state space from " +
                       format_state(spec.states()[s]));
    log.events.push_back({t, chosen, spec.links()[chosen], spec.states()[s], spec.states()[next]});
    s = next;
  }
  return log;
}

std::vector<EventLog> simulate_replications(const NetworkSpec& spec, const State& init, double horizon,
                                            std::uint64_t base_seed, std::size_t reps, unsigned jobs) {
  std::vector<EventLog> logs(reps);
  parallel_for(reps, jobs, [&](std::size_t r) {
    logs[r] = simulate_path(spec, init, horizon, replication_seed(base_seed, r));
  });
  return logs;
}

double stationary_residual(const Generator& gen, std::span<const double> pi) {
  std::vector<double> r(gen.size());
  gen.left_multiply(pi, r);
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  return worst;
}

namespace {

// Strongly connected components over positive-rate edges (iterative Tarjan).
std::vector<std::size_t> components(const Generator& gen, std::size_t& count) {
  const std::size_t m = gen.size();
  std::vector<std::size_t> index(m, npos), low(m, 0), comp(m, npos);
  std::vector<bool> on_stack(m, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (vertex, next edge)
  std::size_t counter = 0;
  count = 0;
  for (std::size_t root = 0; root < m; ++root) {
    if (index[root] != npos) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& [v, edge] = call.back();
      if (edge == 0 && index[v] == npos) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      auto row = gen.row(v);
      if (edge < row.size()) {
        std::size_t w = row[edge++].target;
        if (index[w] == npos) {
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  return comp;
}

// Solves pi Q_C = 0, sum pi = 1 on the closed class C by Gaussian elimination.
std::vector<double> dense_solve(const Generator& gen, const std::vector<std::size_t>& cls) {
  const std::size_t k = cls.size();
  std::vector<std::size_t> local(gen.size(), npos);
  for (std::size_t i = 0; i < k; ++i) local[cls[i]] = i;
  // A = Q_C^T with the last equation replaced by normalization.
  std::vector<double> a(k * k, 0.0), b(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t s = cls[i];
    a[i * k + i] += gen.diagonal(s);
    for (const auto& e : gen.row(s)) a[local[e.target] * k + i] += e.rate;
  }
  for (std::size_t j = 0; j < k; ++j) a[(k - 1) * k + j] = 1.0;
  b[k - 1] = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
    if (a[pivot * k + col] == 0.0) throw SolverError("singular system in dense stationary solve");
    if (pivot != col) {
      for (std::size_t j = 0; j < k; ++j) std::swap(a[pivot * k + j], a[col * k + j]);
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = col + 1; r < k; ++r) {
      double f = a[r * k + col] / a[col * k + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < k; ++j) a[r * k + j] -= f * a[col * k + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(k);
  for (std::size_t r = k; r-- > 0;) {
    double v = b[r];
    for (std::size_t j = r + 1; j < k; ++j) v -= a[r * k + j] * x[j];
    x[r] = v / a[r * k + r];
  }
  return x;
}

void normalize(std::span<double> p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum > 0.0)
    for (double& v : p) v /= sum;
}

}  // namespace

Distribution stationary_distribution(const Generator& gen, double tol) {
  const std::size_t m = gen.size();
  std::size_t count = 0;
  std::vector<std::size_t> comp = components(gen, count);
  std::vector<bool> closed(count, true);
  for (std::size_t s = 0; s < m; ++s)
    for (const auto& e : gen.row(s))
      if (comp[e.target] != comp[s]) closed[comp[s]] = false;
  std::vector<std::size_t> closed_ids;
  for (std::size_t c = 0; c < count; ++c)
    if (closed[c]) closed_ids.push_back(c);
  if (closed_ids.size() != 1) {
    std::string msg = "chain has " + std::to_string(closed_ids.size()) + " closed classes:";
    for (std::size_t c : closed_ids) {
      msg += " {";
      bool first = true;
      for (std::size_t s = 0; s < m; ++s) {
        if (comp[s] != c) continue;
        if (!first) msg += ' ';
        msg += format_state(gen.states()[s]);
        first = false;
      }
      msg += '}';
    }
    throw SolverError(msg);
  }
  std::vector<std::size_t> cls;
  for (std::size_t s = 0; s < m; ++s)
    if (comp[s] == closed_ids[0]) cls.push_back(s);

  Distribution pi(m, 0.0);
  if (cls.size() == 1) {
    pi[cls[0]] = 1.0;
    return pi;
  }

  // Power iteration on the uniformized kernel; the 1.1 factor keeps it aperiodic.
  double lambda = 0.0;
  for (std::size_t s : cls) lambda = std::max(lambda, -gen.diagonal(s));
  lambda *= 1.1;
  for (std::size_t s : cls) pi[s] = 1.0 / static_cast<double>(cls.size());
  std::vector<double> next(m, 0.0), flux(m, 0.0);
  const std::size_t max_iterations = 50000;
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    gen.left_multiply(pi, flux);
    for (std::size_t s = 0; s < m; ++s) next[s] = pi[s] + flux[s] / lambda;
    pi.swap(next);
    if (it % 32 == 0) {
      normalize(pi);
      residual = stationary_residual(gen, pi);
      if (residual < 0.5 * tol) return pi;
    }
  }

  if (cls.size() <= 2000) {
    std::vector<double> x = dense_solve(gen, cls);
    std::fill(pi.begin(), pi.end(), 0.0);
    for (std::size_t i = 0; i < cls.size(); ++i) pi[cls[i]] = x[i];
    normalize(pi);
    residual = stationary_residual(gen, pi);
  }
  if (!(residual < tol))
    throw SolverError("stationary solve did not converge: residual " + format_number(residual) +
                      " >= tolerance " + format_number(tol));
  return pi;
}

Distribution transient_distribution(const Generator& gen, std::span<const double> p0, double t, double tol) {
  const std::size_t m = gen.size();
  if (p0.size() != m) throw SolverError("initial distribution has wrong dimension");
  if (t < 0.0) throw SolverError("time must be nonnegative");
  if (!(tol >= 4.0 * std::numeric_limits<double>::epsilon()))
    throw SolverError("tolerance " + format_number(tol) + " is below the resolution of double-precision Poisson weights");
  Distribution result(p0.begin(), p0.end());
  const double q = gen.uniformization_rate();
  if (t == 0.0 || q == 0.0) return result;

  const double qt = q * t;
  const double log_qt = std::log(qt);
  std::vector<double> v(p0.begin(), p0.end()), flux(m), next(m);
  std::fill(result.begin(), result.end(), 0.0);
  double log_w = -qt;
  const double max_terms = qt + 20.0 * std::sqrt(qt) + 1000.0;
  for (std::size_t k = 0;; ++k) {
    double w = std::exp(log_w);
    if (w > 0.0)
      for (std::size_t s = 0; s < m; ++s) result[s] += w * v[s];
    double log_w_next = log_w + log_qt - std::log(static_cast<double>(k + 1));
    double kk = static_cast<double>(k);
    if (kk + 2.0 > qt) {
      double tail = std::exp(log_w_next) / (1.0 - qt / (kk + 2.0));
      if (tail < tol) break;
    }
    if (kk > max_terms) throw SolverError("uniformization series did not reach tolerance " + format_number(tol));
    gen.left_multiply(v, flux);
    for (std::size_t s = 0; s < m; ++s) next[s] = v[s] + flux[s] / q;
    v.swap(next);
    log_w = log_w_next;
  }
  normalize(result);
  return result;
}

namespace {

double mean_rate(const NetworkSpec& spec, std::span<const double> p, std::size_t link) {
  double r = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) r += p[s] * spec.rate(s, link);
  return r;
}

// Romberg integral of the mean instantaneous rate over [0, h] starting from p.
double romberg_segment(const NetworkSpec& spec, const Generator& gen, std::span<const double> p,
                       std::size_t link, double h, double tol) {
  const double step_tol = std::max(8.0 * std::numeric_limits<double>::epsilon(), std::min(1e-14, tol * 1e-3));
  const int max_level = 18;
  std::vector<std::vector<double>> table;
  double f0 = mean_rate(spec, p, link);
  double f1 = mean_rate(spec, transient_distribution(gen, p, h, step_tol), link);
  table.push_back({0.5 * h * (f0 + f1)});
  for (int level = 1; level <= max_level; ++level) {
    const std::size_t intervals = std::size_t{1} << level;
    const double dt = h / static_cast<double>(intervals);
    // midpoints of the previous level: walk the fine grid and sample odd nodes
    double odd_sum = 0.0;
    Distribution cur(p.begin(), p.end());
    for (std::size_t k = 1; k < intervals; k += 2) {
      cur = transient_distribution(gen, cur, k == 1 ? dt : 2.0 * dt, step_tol);
      odd_sum += mean_rate(spec, cur, link);
    }
    std::vector<double> row(static_cast<std::size_t>(level) + 1);
    row[0] = 0.5 * table.back()[0] + dt * odd_sum;
    double factor = 1.0;
    for (int j = 1; j <= level; ++j) {
      factor *= 4.0;
      row[j] = row[j - 1] + (row[j - 1] - table.back()[j - 1]) / (factor - 1.0);
    }
    double change = std::abs(row.back() - table.back().back());
    table.push_back(std::move(row));
    if (level >= 3 && change < tol) return table.back().back();
  }
  throw SolverError("mean-flow quadrature did not converge to tolerance " + format_number(tol));
}

}  // namespace

std::vector<double> transient_mean_flow_curve(const NetworkSpec& spec, std::span<const double> p0,
                                              std::size_t link, std::span<const double> times, double tol) {
  if (link >= spec.link_count()) throw ModelError("link index out of range");
  if (p0.size() != spec.size()) throw SolverError("initial distribution has wrong dimension");
  Generator gen(spec);
  const double q = gen.uniformization_rate();
  // pieces short enough that the integrand is well resolved by a handful of Romberg levels
  const double max_piece = q > 0.0 ? 4.0 / q : std::numeric_limits<double>::infinity();
  const double step_tol = std::max(8.0 * std::numeric_limits<double>::epsilon(), std::min(1e-14, tol * 1e-3));

  std::vector<double> out;
  out.reserve(times.size());
  Distribution p(p0.begin(), p0.end());
  double now = 0.0, acc = 0.0;
  for (double t : times) {
    if (t < now) throw SolverError("time grid must be nonnegative and nondecreasing");
    double span_len = t - now;
    if (span_len > 0.0) {
      std::size_t pieces = static_cast<std::size_t>(std::ceil(span_len / max_piece));
      pieces = std::max<std::size_t>(pieces, 1);
      double h = span_len / static_cast<double>(pieces);
      double piece_tol = tol / static_cast<double>(pieces);
      for (std::size_t k = 0; k < pieces; ++k) {
        acc += romberg_segment(spec, gen, p, link, h, piece_tol);
        p = transient_distribution(gen, p, h, step_tol);
      }
      now = t;
    }
    out.push_back(acc);
  }
  return out;
}

double transient_mean_flow(const NetworkSpec& spec, std::span<const double> p0, std::size_t link, double t,
                           double tol) {
  double times[] = {t};
  return transient_mean_flow_curve(spec, p0, link, times, tol)[0];
}

double throughput(const NetworkSpec& spec, std::span<const double> pi, std::size_t link) {
  if (pi.size() != spec.size())
    throw SolverError("distribution has " + std::to_string(pi.size()) + " entries, spec has " +
                      std::to_string(spec.size()) + " states");
  if (link >= spec.link_count()) throw ModelError("link index out of range");
  return mean_rate(spec, pi, link);
}

Distribution point_mass(const NetworkSpec& spec, const State& x) {
  std::size_t s = spec.index_of(x);
  if (s == npos) throw ModelError("state " + format_state(x) + " is not in the state space");
  Distribution p(spec.size(), 0.0);
  p[s] = 1.0;
  return p;
}

void write_event_log_csv(std::ostream& out, const EventLog& log) {
  out << "time,link_from,link_to,state_after\n";
  for (const auto& e : log.events)
    out << format_number(e.time) << ',' << e.via.from << ',' << e.via.to << ',' << state_field(e.post) << '\n';
}

void write_distribution_csv(std::ostream& out, const NetworkSpec& spec, std::span<const double> p) {
  out << "state,probability\n";
  for (std::size_t s = 0; s < spec.size(); ++s) out << state_field(spec.states()[s]) << ',' << format_number(p[s]) << '\n';
}

}  // namespace flowcouple
