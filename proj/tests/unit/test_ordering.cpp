#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <tuple>

#include "flowcouple/ctmc.hpp"
#include "flowcouple/error.hpp"
#include "flowcouple/ordering.hpp"
#include "flowcouple/report.hpp"
#include "flowcouple/stateflow.hpp"
#include "flowcouple/tandem.hpp"
#include "oracles.hpp"

using namespace flowcouple;
using flowcouple::testing::birth_death;

namespace {

TandemParams params(int s1, int s2) { return TandemParams::linear_service(s1, s2, 1.0, 1.0, 1.0); }

using WitnessKey = std::tuple<std::string, State, State, double, double>;

std::set<WitnessKey> witness_set(const ConditionReport& r) {
  std::set<WitnessKey> out;
  for (const auto& w : r.witnesses) out.insert({w.condition, w.a, w.b, w.rate_a, w.rate_b});
  return out;
}

NetworkSpec clamped_constant(int n, int cap, std::vector<std::string> rates) {
  ModelDocument doc;
  doc.n = n;
  doc.space = BoxSpace{std::vector<int>(static_cast<std::size_t>(n), cap), {}};
  doc.rates = std::move(rates);
  doc.clamp = true;
  return make_spec(doc);
}

}  // namespace

TEST_SUITE("ordering") {

TEST_CASE("flow conditions") {
  SUBCASE("balanced vs original with increasing service passes") {
    auto r = check_flow_conditions(build_balanced_tandem(params(2, 2)), build_original_tandem(params(2, 2)));
    CHECK(r.pass());
    CHECK(r.kind == OrderKind::flow);
    REQUIRE(r.conditions.size() == 3);
    CHECK(r.conditions[0].id == "arrival");
    CHECK(r.conditions[1].id == "service[1]");
    CHECK(r.conditions[2].id == "departure");
    CHECK(r.domain == "x in S_A, x' in S_B");
  }
  SUBCASE("decreasing second service table fails") {
    TandemParams p{1, 2, 1.0, {0, 1}, {0, 2, 1}};
    auto r = check_flow_conditions(build_balanced_tandem(p), build_original_tandem(p));
    CHECK(!r.pass());
    REQUIRE(!r.witnesses.empty());
    for (const auto& w : r.witnesses) CHECK((w.condition == "service[1]" || w.condition == "departure"));
    const auto& w = r.witnesses.front();
    CHECK(w.rate_a > w.rate_b);
  }
  SUBCASE("constant rates against themselves") {
    NetworkSpec a = clamped_constant(2, 2, {"1", "1", "1"});
    CHECK(check_flow_conditions(a, a).pass());
  }
  SUBCASE("pass iff no witnesses") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 30; ++k) {
      NetworkSpec a = make_spec(testing::random_document(rng, {2, 2}));
      NetworkSpec b = make_spec(testing::random_document(rng, {2, 2}));
      auto r = check_flow_conditions(a, b, true);
      bool all_pass = std::all_of(r.conditions.begin(), r.conditions.end(), [](const auto& c) { return c.pass; });
      CHECK(r.pass() == all_pass);
      std::size_t total = 0;
      for (const auto& c : r.conditions) total += c.violations;
      CHECK(total == r.witnesses.size());
    }
  }
  SUBCASE("non-linear link sets are rejected") {
    ModelDocument doc;
    doc.n = 2;
    doc.space = BoxSpace{{1, 1}, {}};
    doc.links = {{0, 2}, {2, 1}, {1, 0}};
    doc.rates = {"0", "0", "0"};
    NetworkSpec odd = make_spec(doc);
    CHECK_THROWS_AS(check_flow_conditions(odd, odd), ModelError);
    CHECK_THROWS_AS(check_population_conditions(odd, odd), ModelError);
  }
}

TEST_CASE("population conditions") {
  SUBCASE("balanced vs original fails at node 2") {
    auto r = check_population_conditions(build_balanced_tandem(params(2, 2)), build_original_tandem(params(2, 2)),
                                         true);
    CHECK(!r.pass());
    for (const auto& w : r.witnesses) {
      CHECK(w.condition == "node[2]");
      CHECK(w.a[0] == 2);
      CHECK(w.b[0] == 2);
      CHECK(w.a[1] == w.b[1]);
      CHECK(w.a[1] > 0);
      CHECK(w.a[1] < 2);
    }
  }
  SUBCASE("swapped order fails at entry") {
    auto r = check_population_conditions(build_original_tandem(params(2, 2)), build_balanced_tandem(params(2, 2)),
                                         true);
    CHECK(!r.pass());
    bool shape = false;
    for (const auto& w : r.witnesses) {
      CHECK(w.condition == "entry");
      shape = shape || (w.a[0] == w.b[0] && w.a[0] < 2 && w.b[1] == 2 && w.a[1] < 2);
    }
    CHECK(shape);
  }
  SUBCASE("M/M/1/3 chains with lambda <= lambda' and mu >= mu' pass") {
    NetworkSpec a = birth_death(3, "ind(x1 < 3)", "2 * x1");
    NetworkSpec b = birth_death(3, "2 * ind(x1 < 3)", "x1");
    auto r = check_population_conditions(a, b);
    // hand enumeration: the only premise pairs are x = x'
    bool expected = true;
    for (int x = 0; x <= 3; ++x) {
      double lam = x < 3 ? 1.0 : 0.0, lam_p = x < 3 ? 2.0 : 0.0;
      double mu = 2.0 * x, mu_p = 1.0 * x;
      expected = expected && lam <= lam_p && mu >= mu_p;
    }
    CHECK(expected);
    CHECK(r.pass() == expected);
    CHECK(r.conditions.size() == 1);
    CHECK(r.conditions[0].pairs_checked == 4);
  }
}

TEST_CASE("witness sets do not depend on enumeration order") {
  TandemParams p = params(2, 2);
  NetworkSpec bal = build_balanced_tandem(p);
  NetworkSpec orig = build_original_tandem(p);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    std::vector<State> shuffled = orig.states();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    ModelDocument doc = orig.document();
    doc.space = ListSpace{shuffled};
    NetworkSpec permuted = make_spec(doc);
    CHECK(witness_set(check_population_conditions(bal, permuted, true)) ==
          witness_set(check_population_conditions(bal, orig, true)));
    CHECK(witness_set(check_flow_conditions(permuted, bal, true)) ==
          witness_set(check_flow_conditions(orig, bal, true)));
  }
}

TEST_CASE("tight configurations") {
  SUBCASE("tandem pair with increasing service is closed") {
    NetworkSpec bal = build_balanced_tandem(params(2, 2));
    NetworkSpec orig = build_original_tandem(params(2, 2));
    auto r = verify_tight_configurations(bal, orig, sufficient_gap_bound(bal, orig));
    CHECK(r.closed());
    CHECK(r.configurations > 0);
    CHECK(r.over_bound.empty());
  }
  SUBCASE("constant arrival 2 vs 1 breaks at the arrival link") {
    NetworkSpec a = clamped_constant(1, 2, {"2", "1"});
    NetworkSpec b = clamped_constant(1, 2, {"1", "1"});
    auto r = verify_tight_configurations(a, b, sufficient_gap_bound(a, b));
    CHECK(r.verdict == ClosureVerdict::broken);
    bool found = false;
    for (const auto& br : r.breaks)
      found = found || (br.config.link == 0 && br.config.a == br.config.b &&
                        std::all_of(br.config.gaps.begin(), br.config.gaps.end(), [](auto d) { return d == 0; }));
    CHECK(found);
  }
  SUBCASE("configurations satisfy node balance") {
    NetworkSpec bal = build_balanced_tandem(params(3, 2));
    NetworkSpec orig = build_original_tandem(params(2, 3));
    for (const auto& c : tight_configurations(bal, orig)) {
      CHECK(c.gaps[c.link] == 0);
      for (std::size_t i = 1; i <= 2; ++i) {
        CHECK(c.gaps[i] >= 0);
        CHECK(c.b[i - 1] - c.a[i - 1] == c.gaps[i - 1] - c.gaps[i]);
      }
      CHECK(bal.contains(c.a));
      CHECK(orig.contains(c.b));
    }
  }
  SUBCASE("a small gap bound makes the verdict inconclusive") {
    NetworkSpec bal = build_balanced_tandem(params(3, 3));
    NetworkSpec orig = build_original_tandem(params(3, 3));
    auto r = verify_tight_configurations(bal, orig, 1);
    CHECK(r.verdict == ClosureVerdict::inconclusive);
    CHECK(!r.over_bound.empty());
  }
  SUBCASE("conditions passing implies closed on random instances") {
    std::mt19937_64 rng(21);
    int closed_but_failing = 0;
    for (int k = 0; k < 100; ++k) {
      auto [da, db] = testing::random_passing_pair(rng);
      NetworkSpec a = make_spec(da), b = make_spec(db);
      REQUIRE(check_flow_conditions(a, b).pass());
      CHECK(verify_tight_configurations(a, b, sufficient_gap_bound(a, b)).closed());

      NetworkSpec c = make_spec(testing::random_document(rng, {2, 2}));
      NetworkSpec d = make_spec(testing::random_document(rng, {2, 2}));
      bool pass = check_flow_conditions(c, d).pass();
      bool closed = verify_tight_configurations(c, d, sufficient_gap_bound(c, d)).closed();
      if (pass) CHECK(closed);
      if (closed && !pass) ++closed_but_failing;
    }
    MESSAGE("closed although the rate conditions fail: " << closed_but_failing << " of 100");
  }
}

TEST_CASE("pathwise flow order") {
  SUBCASE("certified tandem pair") {
    NetworkSpec bal = build_balanced_tandem(params(2, 2));
    NetworkSpec orig = build_original_tandem(params(2, 2));
    CoupledSpec c = build_stateflow_coupling(bal, orig);
    for (std::uint64_t seed = 0; seed < 50; ++seed)
      CHECK(pathwise_flow_order_check(simulate_coupled(c, {0, 0}, {0, 0}, 50.0, seed)).empty());
  }
  SUBCASE("hand-built log with A ahead on the arrival link") {
    PairedEventLog log;
    log.initial_a = log.initial_b = {0, 0};
    log.initial_fa = log.initial_fb = FlowVector(3);
    PairedEvent e;
    e.time = 0.3;
    e.link = 0;
    e.via = {0, 1};
    e.which = Mover::a_only;
    e.a = {1, 0};
    e.b = {0, 0};
    e.fa = FlowVector(std::vector<std::int64_t>{1, 0, 0});
    e.fb = FlowVector(3);
    log.events.push_back(e);
    auto v = pathwise_flow_order_check(log);
    REQUIRE(v.size() == 1);
    CHECK(v[0].time == 0.3);
    CHECK(v[0].link == 0);
    CHECK(v[0].count_a == 1);
    CHECK(v[0].count_b == 0);
  }
  SUBCASE("identical specs") {
    NetworkSpec a = build_original_tandem(params(2, 2));
    CoupledSpec c = build_stateflow_coupling(a, a);
    CHECK(pathwise_flow_order_check(simulate_coupled(c, {1, 1}, {1, 1}, 50.0, 4)).empty());
  }
  SUBCASE("population check flags x > x'") {
    NetworkSpec a = birth_death(3, "2 * ind(x1 < 3)", "x1");
    NetworkSpec b = birth_death(3, "ind(x1 < 3)", "x1");
    CoupledSpec c = build_population_coupling(a, b);
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      total += pathwise_population_order_check(simulate_coupled(c, {0}, {0}, 20.0, seed)).size();
    CHECK(total > 0);
  }
}

TEST_CASE("empirical tail order") {
  SUBCASE("identical samples") {
    std::vector<double> s{1, 2, 2, 3, 7};
    auto r = empirical_tail_order(s, s);
    CHECK(r.max_violation == 0.0);
    CHECK(r.consistent);
  }
  SUBCASE("zeros below ones") {
    std::vector<double> a(50, 0.0), b(40, 1.0);
    auto r = empirical_tail_order(a, b);
    CHECK(r.max_violation == 0.0);
    CHECK(r.consistent);
    auto reverse = empirical_tail_order(b, a);
    CHECK(reverse.max_violation == 1.0);
    CHECK(!reverse.consistent);
  }
  SUBCASE("empty input") {
    std::vector<double> none, one{1.0};
    CHECK_THROWS_AS(empirical_tail_order(none, one), std::invalid_argument);
  }
  SUBCASE("accepted arrivals of the tandem pair by t = 10") {
    NetworkSpec bal = build_balanced_tandem(params(2, 2));
    NetworkSpec orig = build_original_tandem(params(2, 2));
    const std::size_t reps = 10000;
    auto la = simulate_replications(bal, {0, 0}, 10.0, 1, reps, 2);
    auto lb = simulate_replications(orig, {0, 0}, 10.0, 1ull << 32, reps, 2);
    auto count = [](const EventLog& log) {
      return static_cast<double>(std::count_if(log.events.begin(), log.events.end(), [](const Event& e) { return e.link == 0; }));
    };
    std::vector<double> a, b;
    for (const auto& l : la) a.push_back(count(l));
    for (const auto& l : lb) b.push_back(count(l));
    auto r = empirical_tail_order(a, b);
    CHECK(r.consistent);
  }
}

TEST_CASE("mean order") {
  NetworkSpec bal = build_balanced_tandem(params(3, 3));
  NetworkSpec orig = build_original_tandem(params(3, 3));
  std::vector<std::pair<State, double>> start{{{0, 0}, 1.0}};
  SUBCASE("identical specs") {
    std::vector<double> times{0.0, 1.0, 5.0, 10.0};
    auto r = mean_order_check(orig, orig, {0, 1}, times, start, 1e-10, 1e-8);
    for (double m : r.margins) CHECK(std::abs(m) <= 2e-10);
    CHECK(r.pass);
  }
  SUBCASE("tandem pair on t = 0..20") {
    std::vector<double> times;
    for (int t = 0; t <= 20; ++t) times.push_back(t);
    auto r = mean_order_check(bal, orig, {0, 1}, times, start, 1e-10, 1e-8);
    CHECK(r.pass);
    CHECK(r.margins[0] == 0.0);
    for (double m : r.margins) CHECK(m >= -1e-8);
    CHECK(r.margins.back() > 0.1);
  }
  SUBCASE("reversed pair fails") {
    std::vector<double> times{5.0};
    CHECK(!mean_order_check(orig, bal, {0, 1}, times, start, 1e-10, 1e-8).pass);
  }
}

TEST_CASE("reports serialize") {
  NetworkSpec bal = build_balanced_tandem(params(2, 2));
  NetworkSpec orig = build_original_tandem(params(2, 2));
  auto j = to_json(check_population_conditions(bal, orig));
  CHECK(j["verdict"] == "fail");
  CHECK(j["order"] == "population");
  CHECK(j["witnesses"].size() == 1);
  CHECK(j["witnesses"][0]["condition"] == "node[2]");
  auto c = to_json(verify_tight_configurations(bal, orig, sufficient_gap_bound(bal, orig)));
  CHECK(c["verdict"] == "closed");
}

}  // TEST_SUITE
