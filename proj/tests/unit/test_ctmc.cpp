#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "flowcouple/ctmc.hpp"
#include "flowcouple/error.hpp"
#include "flowcouple/tandem.hpp"
#include "oracles.hpp"

using namespace flowcouple;
using flowcouple::testing::birth_death;

namespace {

NetworkSpec two_state() { return birth_death(1, "ind(x1 < 1)", "x1"); }
NetworkSpec mm12() { return birth_death(2, "ind(x1 < 2)", "2 * ind(x1 > 0)"); }

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_SUITE("ctmc") {

TEST_CASE("generator entries") {
  SUBCASE("blocked transfer in the 1x1 tandem") {
    NetworkSpec spec = build_original_tandem(TandemParams::linear_service(1, 1, 1.0, 1.0, 1.0));
    Generator gen(spec);
    auto row = gen.row(spec.index_of({1, 1}));
    REQUIRE(row.size() == 1);
    CHECK(row[0].link == 2);
    CHECK(row[0].rate == 1.0);
    CHECK(gen.states()[row[0].target] == State{1, 0});
  }
  SUBCASE("two-state chain") {
    NetworkSpec spec = two_state();
    Generator gen(spec);
    REQUIRE(gen.row(0).size() == 1);
    CHECK(gen.row(0)[0].target == 1);
    CHECK(gen.row(0)[0].rate == 1.0);
    CHECK(gen.row(1)[0].target == 0);
    CHECK(gen.diagonal(0) == -1.0);
    CHECK(gen.uniformization_rate() == 1.0);
  }
  SUBCASE("all-zero rates give the zero matrix") {
    NetworkSpec spec = birth_death(3, "0", "0");
    Generator gen(spec);
    for (std::size_t s = 0; s < gen.size(); ++s) {
      CHECK(gen.row(s).empty());
      CHECK(gen.diagonal(s) == 0.0);
    }
  }
  SUBCASE("parallel links to one target stay separate") {
    ModelDocument doc;
    doc.n = 2;
    doc.space = BoxSpace{{1, 1}, {}};
    doc.links = {{1, 0}, {1, 2}, {2, 0}, {0, 2}, {2, 1}};
    doc.rates = {"x1", "x1 * ind(x2 < 1)", "x2", "ind(x2 < 1)", "0.5 * x2 * ind(x1 < 1)"};
    NetworkSpec spec = make_spec(doc);
    Generator gen(spec);
    auto row = gen.row(spec.index_of({1, 0}));
    CHECK(row.size() == 3);
  }
}

TEST_CASE("generator rows sum to zero") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    NetworkSpec spec = make_spec(testing::random_document(rng, {3, 2}));
    Generator gen(spec);
    for (std::size_t s = 0; s < gen.size(); ++s) {
      double sum = gen.diagonal(s);
      for (const auto& e : gen.row(s)) {
        CHECK(e.rate > 0.0);
        sum += e.rate;
      }
      CHECK(std::abs(sum) < 1e-12);
      CHECK(-gen.diagonal(s) <= gen.uniformization_rate());
    }
  }
}

TEST_CASE("simulate_path") {
  SUBCASE("zero horizon") {
    auto log = simulate_path(two_state(), {0}, 0.0, 1);
    CHECK(log.events.empty());
  }
  SUBCASE("absorbing start") {
    auto log = simulate_path(birth_death(2, "0", "0"), {1}, 10.0, 1);
    CHECK(log.events.empty());
    CHECK(log.absorbed);
  }
  SUBCASE("start outside the space") { CHECK_THROWS_AS(simulate_path(two_state(), {4}, 1.0, 1), ModelError); }
  SUBCASE("switching rate of the two-state chain") {
    // stationary throughput 0.5 on each link
    auto log = simulate_path(two_state(), {0}, 1000.0, 2024);
    double rate = static_cast<double>(log.events.size()) / 1000.0;
    CHECK(rate >= 0.9);
    CHECK(rate <= 1.1);
  }
  SUBCASE("event log structure") {
    NetworkSpec spec = build_original_tandem(TandemParams::linear_service(2, 2, 1.0, 1.0, 1.0));
    auto log = simulate_path(spec, {0, 0}, 30.0, 5);
    REQUIRE(!log.events.empty());
    State cur = log.initial;
    double last = 0.0;
    for (const auto& e : log.events) {
      CHECK(e.time > last);
      CHECK(e.time <= 30.0);
      CHECK(e.pre == cur);
      CHECK(spec.contains(e.post));
      State expect = e.pre;
      if (e.via.from) --expect[e.via.from - 1];
      if (e.via.to) ++expect[e.via.to - 1];
      CHECK(e.post == expect);
      cur = e.post;
      last = e.time;
    }
  }
  SUBCASE("same seed, identical logs") {
    NetworkSpec spec = build_original_tandem(TandemParams::linear_service(3, 3, 1.0, 1.0, 1.0));
    std::ostringstream a, b;
    write_event_log_csv(a, simulate_path(spec, {0, 0}, 50.0, 99));
    write_event_log_csv(b, simulate_path(spec, {0, 0}, 50.0, 99));
    CHECK(a.str() == b.str());
  }
  SUBCASE("replications do not depend on thread count") {
    NetworkSpec spec = build_original_tandem(TandemParams::linear_service(2, 2, 1.0, 1.0, 1.0));
    auto one = simulate_replications(spec, {0, 0}, 20.0, 17, 12, 1);
    auto four = simulate_replications(spec, {0, 0}, 20.0, 17, 12, 4);
    for (std::size_t r = 0; r < one.size(); ++r) {
      std::ostringstream a, b;
      write_event_log_csv(a, one[r]);
      write_event_log_csv(b, four[r]);
      CHECK(a.str() == b.str());
    }
  }
}

TEST_CASE("flow conservation along simulated paths") {
  NetworkSpec spec = build_balanced_tandem(TandemParams::linear_service(3, 2, 1.5, 1.0, 0.7));
  auto log = simulate_path(spec, {1, 1}, 100.0, 8);
  std::vector<long> in(3, 0), out(3, 0);
  for (const auto& e : log.events) {
    ++out[static_cast<std::size_t>(e.via.from)];
    ++in[static_cast<std::size_t>(e.via.to)];
    for (int i = 1; i <= 2; ++i)
      CHECK(e.post[i - 1] - log.initial[i - 1] == in[static_cast<std::size_t>(i)] - out[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("stationary distribution") {
  SUBCASE("two-state chain") {
    NetworkSpec spec = two_state();
    auto pi = stationary_distribution(Generator(spec));
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(throughput(spec, pi, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(throughput(spec, pi, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("M/M/1/2") {
    NetworkSpec spec = mm12();
    Generator gen(spec);
    auto pi = stationary_distribution(gen);
    CHECK(std::abs(pi[0] - 4.0 / 7.0) < 1e-12);
    CHECK(std::abs(pi[1] - 2.0 / 7.0) < 1e-12);
    CHECK(std::abs(pi[2] - 1.0 / 7.0) < 1e-12);
    CHECK(std::abs(throughput(spec, pi, 0) - 6.0 / 7.0) < 1e-12);
    CHECK(stationary_residual(gen, pi) < 1e-12);
  }
  SUBCASE("balanced tandem matches the dense null-space solve") {
    NetworkSpec spec = build_balanced_tandem(TandemParams::linear_service(2, 2, 1.0, 1.0, 1.0));
    REQUIRE(spec.size() == 8);
    auto pi = stationary_distribution(Generator(spec));
    auto oracle = testing::null_space_stationary(spec);
    CHECK(sup_diff(pi, oracle) < 1e-12);
    for (std::size_t s = 0; s < spec.size(); ++s) {
      const State& x = spec.states()[s];
      double expected = (x[0] <= 1 && x[1] <= 1) ? 1.0 / 6.0 : 1.0 / 12.0;
      CHECK(std::abs(pi[s] - expected) < 1e-12);
    }
  }
  SUBCASE("random instances against the null-space oracle") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
      NetworkSpec spec = make_spec(testing::random_document(rng, {2, 3}));
      Generator gen(spec);
      auto pi = stationary_distribution(gen);
      CHECK(sup_diff(pi, testing::null_space_stationary(spec)) < 1e-10);
      CHECK(stationary_residual(gen, pi) < 1e-12);
    }
  }
  SUBCASE("flow in equals flow out per node") {
    NetworkSpec spec = build_original_tandem(TandemParams::linear_service(3, 2, 1.3, 0.8, 1.1));
    auto pi = stationary_distribution(Generator(spec));
    double t01 = throughput(spec, pi, 0), t12 = throughput(spec, pi, 1), t20 = throughput(spec, pi, 2);
    CHECK(std::abs(t01 - t12) < 1e-10);
    CHECK(std::abs(t12 - t20) < 1e-10);
  }
  SUBCASE("transient states get zero mass") {
    // 0 -> 1 -> 2 <-> 3 : {2, 3} is the only closed class
    NetworkSpec spec = birth_death(3, "ind(x1 < 3)", "ind(x1 = 3)");
    auto pi = stationary_distribution(Generator(spec));
    CHECK(pi[0] == 0.0);
    CHECK(pi[1] == 0.0);
    CHECK(pi[2] == doctest::Approx(0.5));
    CHECK(pi[3] == doctest::Approx(0.5));
  }
  SUBCASE("several closed classes are reported") {
    NetworkSpec spec = birth_death(2, "0", "0");
    try {
      stationary_distribution(Generator(spec));
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(std::string(e.what()).find("closed classes") != std::string::npos);
    }
  }
  SUBCASE("all-zero rates, singleton space") {
    NetworkSpec spec = birth_death(0, "0", "0");
    auto pi = stationary_distribution(Generator(spec));
    CHECK(pi == Distribution{1.0});
    CHECK(throughput(spec, pi, 0) == 0.0);
  }
  SUBCASE("throughput dimension mismatch") {
    NetworkSpec spec = two_state();
    CHECK_THROWS(throughput(spec, Distribution{1.0}, 0));
  }
}

TEST_CASE("transient distribution") {
  SUBCASE("t = 0 returns p0") {
    NetworkSpec spec = mm12();
    Distribution p0{0.2, 0.3, 0.5};
    CHECK(transient_distribution(Generator(spec), p0, 0.0) == p0);
  }
  SUBCASE("long-run limit of the two-state chain") {
    auto p = transient_distribution(Generator(two_state()), Distribution{1.0, 0.0}, 60.0, 1e-12);
    CHECK(std::abs(p[0] - 0.5) < 1e-12);
    CHECK(std::abs(p[1] - 0.5) < 1e-12);
  }
  SUBCASE("two-state closed form") {
    // p_0(t) = 1/2 + e^{-2t}/2
    auto p = transient_distribution(Generator(two_state()), Distribution{1.0, 0.0}, 0.7, 1e-13);
    CHECK(std::abs(p[0] - (0.5 + 0.5 * std::exp(-1.4))) < 1e-12);
  }
  SUBCASE("M/M/1/2 at t = 1 against RK4") {
    NetworkSpec spec = mm12();
    Distribution p0{1.0, 0.0, 0.0};
    auto p = transient_distribution(Generator(spec), p0, 1.0, 1e-12);
    auto oracle = testing::rk4_transient(spec, p0, 1.0, 1e-4);
    CHECK(sup_diff(p, oracle) < 1e-6);
  }
  SUBCASE("semigroup property") {
    NetworkSpec spec = build_balanced_tandem(TandemParams::linear_service(2, 3, 1.2, 1.0, 0.9));
    Generator gen(spec);
    auto p0 = point_mass(spec, {0, 0});
    const double tol = 1e-11;
    auto direct = transient_distribution(gen, p0, 3.5, tol);
    auto split = transient_distribution(gen, transient_distribution(gen, p0, 1.25, tol), 2.25, tol);
    CHECK(sup_diff(direct, split) < 2 * tol);
    double total = 0.0;
    for (double v : direct) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-14);
  }
  SUBCASE("tolerance too small") {
    CHECK_THROWS_AS(transient_distribution(Generator(two_state()), Distribution{1.0, 0.0}, 1.0, 1e-17),
                    SolverError);
  }
}

TEST_CASE("transient mean flow") {
  SUBCASE("t = 0") { CHECK(transient_mean_flow(two_state(), Distribution{1.0, 0.0}, 0, 0.0) == 0.0); }
  SUBCASE("two-state chain from stationarity") {
    CHECK(std::abs(transient_mean_flow(two_state(), Distribution{0.5, 0.5}, 0, 10.0, 1e-10) - 5.0) < 1e-10);
  }
  SUBCASE("pure arrivals against Monte Carlo") {
    NetworkSpec spec = birth_death(10, "ind(x1 < 10)", "0");
    auto p0 = point_mass(spec, {0});
    double value = transient_mean_flow(spec, p0, 0, 1.0, 1e-10);
    // F(1) = min(N(1), 10), N Poisson(1)
    std::mt19937_64 rng(4242);
    std::poisson_distribution<int> poisson(1.0);
    const int paths = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < paths; ++k) {
      double f = std::min(poisson(rng), 10);
      sum += f;
      sum_sq += f * f;
    }
    double mean = sum / paths;
    double se = std::sqrt((sum_sq / paths - mean * mean) / paths);
    CHECK(std::abs(value - mean) < 3.0 * se);
    CHECK(std::abs(value - 0.9999999890521851) < 1e-9);
  }
  SUBCASE("against the block matrix exponential") {
    NetworkSpec spec = build_original_tandem(TandemParams::linear_service(3, 3, 1.0, 1.0, 1.0));
    auto p0 = point_mass(spec, {0, 0});
    std::vector<double> times{0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
    for (std::size_t link = 0; link < 3; ++link) {
      auto curve = transient_mean_flow_curve(spec, p0, link, times, 1e-10);
      for (std::size_t k = 0; k < times.size(); ++k)
        CHECK(std::abs(curve[k] - testing::expm_mean_flow(spec, p0, link, times[k])) < 1e-8);
    }
  }
  SUBCASE("curve is nondecreasing") {
    NetworkSpec spec = build_balanced_tandem(TandemParams::linear_service(2, 2, 2.0, 1.0, 1.0));
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(0.25 * k);
    auto curve = transient_mean_flow_curve(spec, point_mass(spec, {0, 0}), 0, times, 1e-10);
    for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] >= curve[k - 1]);
  }
}

TEST_CASE("csv export") {
  NetworkSpec spec = mm12();
  std::ostringstream d;
  write_distribution_csv(d, spec, Distribution{0.5, 0.25, 0.25});
  CHECK(d.str() == "state,probability\n0,0.5\n1,0.25\n2,0.25\n");
  EventLog log;
  log.initial = {0};
  log.events.push_back({0.5, 0, {0, 1}, {0}, {1}});
  std::ostringstream e;
  write_event_log_csv(e, log);
  CHECK(e.str().rfind("time,link_from,link_to,state_after\n", 0) == 0);
  CHECK(e.str().find("0,1,1\n") != std::string::npos);
}

}  // TEST_SUITE
