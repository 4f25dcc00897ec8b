#include "flowcouple/tandem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "flowcouple/ctmc.hpp"
#include "flowcouple/error.hpp"

namespace flowcouple {

TandemParams TandemParams::linear_service(int s1, int s2, double beta, double c1, double c2) {
  TandemParams p;
  p.s1 = s1;
  p.s2 = s2;
  p.beta = beta;
  for (int k = 0; k <= s1; ++k) p.delta1.push_back(c1 * k);
  for (int k = 0; k <= s2; ++k) p.delta2.push_back(c2 * k);
  return p;
}

void TandemParams::validate() const {
  if (s1 < 1 || s2 < 1) throw ModelError("buffer capacities must be positive");
  if (!std::isfinite(beta) || beta < 0.0) throw ModelError("arrival rate must be finite and nonnegative");
  auto check = [](const std::vector<double>& table, int s, const char* name) {
    if (static_cast<int>(table.size()) != s + 1)
      throw ModelError(std::string(name) + " needs " + std::to_string(s + 1) + " entries (queue lengths 0.." +
                       std::to_string(s) + "), got " + std::to_string(table.size()));
    if (table[0] != 0.0) throw ModelError(std::string(name) + "(0) must be 0");
    for (double v : table)
      if (!std::isfinite(v) || v < 0.0) throw ModelError(std::string(name) + " entries must be finite and nonnegative");
  };
  check(delta1, s1, "delta1");
  check(delta2, s2, "delta2");
}

bool is_nondecreasing(std::span<const double> table) {
  return std::is_sorted(table.begin(), table.end());
}

namespace {

// Tables become parameters delta1_k / delta2_k and a sum of indicators over queue lengths.
std::string table_term(const char* name, int coordinate, const std::vector<double>& table) {
  std::string out;
  for (std::size_t k = 1; k < table.size(); ++k) {
    if (!out.empty()) out += " + ";
    out += std::string(name) + "_" + std::to_string(k) + "*ind(x" + std::to_string(coordinate) + " = " +
           std::to_string(k) + ")";
  }
  return out.empty() ? "0" : "(" + out + ")";
}

ModelDocument tandem_document(const TandemParams& p, bool balanced) {
  p.validate();
  ModelDocument doc;
  doc.n = 2;
  BoxSpace box{{p.s1, p.s2}, {}};
  if (balanced) box.exclude.push_back({p.s1, p.s2});
  doc.space = box;
  doc.links = linear_links(2);
  doc.params["beta"] = p.beta;
  doc.params["s1"] = p.s1;
  doc.params["s2"] = p.s2;
  for (std::size_t k = 1; k < p.delta1.size(); ++k) doc.params["delta1_" + std::to_string(k)] = p.delta1[k];
  for (std::size_t k = 1; k < p.delta2.size(); ++k) doc.params["delta2_" + std::to_string(k)] = p.delta2[k];
  std::string d1 = table_term("delta1", 1, p.delta1);
  std::string d2 = table_term("delta2", 2, p.delta2);
  if (balanced) {
    doc.rates = {"beta * ind(x1 < s1, x2 < s2)", d1 + " * ind(x2 < s2)", d2 + " * ind(x1 < s1)"};
  } else {
    doc.rates = {"beta * ind(x1 < s1)", d1 + " * ind(x2 < s2)", d2};
  }
  return doc;
}

}  // namespace

NetworkSpec build_original_tandem(const TandemParams& p) { return make_spec(tandem_document(p, false)); }

NetworkSpec build_balanced_tandem(const TandemParams& p) { return make_spec(tandem_document(p, true)); }

double loss_rate(const NetworkSpec& spec, std::span<const double> pi) {
  const double beta = spec.param("beta");
  auto arrival = spec.link_index({0, 1});
  if (!arrival) throw ModelError("loss rate needs an arrival link (0,1)");
  if (pi.size() != spec.size()) throw SolverError("distribution has wrong dimension");
  double blocked = 0.0;
  for (std::size_t s = 0; s < spec.size(); ++s) {
    double r = spec.rate(s, *arrival);
    if (r == 0.0) {
      blocked += pi[s];
    } else if (std::abs(r - beta) > 1e-12 * std::max(1.0, beta)) {
      throw ModelError("arrival rate " + format_number(r) + " at " + format_state(spec.states()[s]) +
                       " is neither 0 nor beta");
    }
  }
  double by_throughput = beta - throughput(spec, pi, *arrival);
  double by_blocking = beta * blocked;
  if (std::abs(by_throughput - by_blocking) > 1e-10)
    throw SolverError("loss rate formulas disagree: " + format_number(by_throughput) + " vs " +
                      format_number(by_blocking));
  return std::max(0.0, by_blocking);
}

double product_form_residual(const NetworkSpec& spec, std::span<const double> pi) {
  if (pi.size() != spec.size()) throw SolverError("distribution has wrong dimension");
  const auto& states = spec.states();
  for (std::size_t s = 0; s < states.size(); ++s)
    if (!(pi[s] > 0.0))
      throw SolverError("stationary mass vanishes at " + format_state(states[s]) + "; chain is not irreducible");
  const std::size_t n = static_cast<std::size_t>(spec.nodes());

  // log g_i(k), with g_i at the smallest observed coordinate set to 1
  std::vector<std::map<int, double>> log_g(n);
  for (std::size_t i = 0; i < n; ++i) {
    int lo = states.front()[i], hi = lo;
    for (const State& x : states) {
      lo = std::min(lo, x[i]);
      hi = std::max(hi, x[i]);
    }
    log_g[i][lo] = 0.0;
    for (int k = lo; k < hi; ++k) {
      bool found = false;
      for (std::size_t s = 0; s < states.size() && !found; ++s) {
        if (states[s][i] != k) continue;
        State up = states[s];
        ++up[i];
        std::size_t t = spec.index_of(up);
        if (t == npos) continue;
        log_g[i][k + 1] = log_g[i][k] + std::log(pi[t]) - std::log(pi[s]);
        found = true;
      }
      if (!found)
        throw SolverError("cannot extract ratio g" + std::to_string(i + 1) + "(" + std::to_string(k + 1) + ")/g" +
                          std::to_string(i + 1) + "(" + std::to_string(k) + ")");
    }
  }
  std::vector<double> fit(states.size());
  double total = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    double lg = 0.0;
    for (std::size_t i = 0; i < n; ++i) lg += log_g[i].at(states[s][i]);
    fit[s] = std::exp(lg);
    total += fit[s];
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) worst = std::max(worst, std::abs(pi[s] - fit[s] / total));
  return worst;
}

}  // namespace flowcouple
