#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowcouple/coupling.hpp"
#include "flowcouple/ctmc.hpp"
#include "flowcouple/error.hpp"
#include "flowcouple/model.hpp"
#include "flowcouple/ordering.hpp"
#include "flowcouple/report.hpp"
#include "flowcouple/stateflow.hpp"
#include "flowcouple/tandem.hpp"

namespace flowcouple::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kToolName = "flowcouple";
constexpr const char* kToolVersion = "0.1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedModel {
  std::string source;
  std::unique_ptr<NetworkSpec> spec;
};

std::string hex_digest(std::uint64_t d) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(d));
  return buf;
}

TandemParams tandem_params(const RunConfig& c) {
  TandemParams p = TandemParams::linear_service(c.s1, c.s2, c.beta, 1.0, 1.0);
  if (!c.delta1.empty()) p.delta1 = c.delta1;
  if (!c.delta2.empty()) p.delta2 = c.delta2;
  return p;
}

std::optional<LoadedModel> from_family(const std::string& family, const RunConfig& c) {
  if (family == "tandem-original")
    return LoadedModel{family, std::make_unique<NetworkSpec>(build_original_tandem(tandem_params(c)))};
  if (family == "tandem-balanced")
    return LoadedModel{family, std::make_unique<NetworkSpec>(build_balanced_tandem(tandem_params(c)))};
  throw UsageError("unknown model family '" + family + "' (expected tandem-original, tandem-balanced or tandem-pair)");
}

// Resolves model A and (optionally) B from paths and families.
std::pair<std::optional<LoadedModel>, std::optional<LoadedModel>> load_models(const RunConfig& c) {
  std::optional<LoadedModel> a, b;
  std::string family_a = c.family_a, family_b = c.family_b;
  if (family_a == "tandem-pair") {
    family_a = "tandem-balanced";
    if (family_b.empty() && c.model_b.empty()) family_b = "tandem-original";
  }
  if (!c.model_a.empty() && !family_a.empty()) throw UsageError("give either --model-a or --family, not both");
  if (!c.model_b.empty() && !family_b.empty()) throw UsageError("give either --model-b or --family-b, not both");
  if (!c.model_a.empty()) a = LoadedModel{c.model_a, std::make_unique<NetworkSpec>(load_model(c.model_a))};
  if (!family_a.empty()) a = from_family(family_a, c);
  if (!c.model_b.empty()) b = LoadedModel{c.model_b, std::make_unique<NetworkSpec>(load_model(c.model_b))};
  if (!family_b.empty()) b = from_family(family_b, c);
  return {std::move(a), std::move(b)};
}

const char* command_name(Command cmd) {
  switch (cmd) {
    case Command::check: return "check";
    case Command::verify: return "verify";
    case Command::couple: return "couple";
    case Command::simulate: return "simulate";
    case Command::solve: return "solve";
    case Command::transient: return "transient";
    case Command::sweep: return "sweep";
  }
  return "?";
}

class Context {
 public:
  Context(const RunConfig& c, std::ostream& out) : config(c), out(out) {}

  const RunConfig& config;
  std::ostream& out;
  std::optional<LoadedModel> a;
  std::optional<LoadedModel> b;

  json header() const {
    json h;
    h["tool"] = kToolName;
    h["version"] = kToolVersion;
    h["command"] = command_name(config.command);
    h["seed"] = config.seed;
    h["tol"] = config.tol;
    h["margin_tol"] = config.margin_tol;
    json models = json::object();
    if (a) models["A"] = {{"source", a->source}, {"digest", hex_digest(model_digest(*a->spec))}};
    if (b) models["B"] = {{"source", b->source}, {"digest", hex_digest(model_digest(*b->spec))}};
    h["models"] = models;
    return h;
  }

  std::string csv_header() const {
    std::ostringstream s;
    s << "# tool=" << kToolName << ' ' << kToolVersion << "\n";
    s << "# command=" << command_name(config.command) << "\n";
    s << "# seed=" << config.seed << "\n";
    s << "# tol=" << format_number(config.tol) << " margin_tol=" << format_number(config.margin_tol) << "\n";
    if (a) s << "# model_a=" << a->source << " digest=" << hex_digest(model_digest(*a->spec)) << "\n";
    if (b) s << "# model_b=" << b->source << " digest=" << hex_digest(model_digest(*b->spec)) << "\n";
    return s.str();
  }

  std::filesystem::path path(const std::string& name) const { return config.out_dir / name; }

  void write_json(const std::string& name, json body) const {
    body["header"] = header();
    write_text(name, body.dump(2) + "\n");
  }

  void write_csv(const std::string& name, const std::string& body) const { write_text(name, csv_header() + body); }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path(name).string());
    f << text;
  }

  const NetworkSpec& spec_a() const {
    if (!a) throw UsageError("this command needs a model (--model-a or --family)");
    return *a->spec;
  }
  const NetworkSpec& spec_b() const {
    if (!b) throw UsageError(std::string("'") + command_name(config.command) +
                             "' compares two models; give --model-b, --family-b or --family tandem-pair");
    return *b->spec;
  }
};

State parse_state_arg(const std::string& text, int n) {
  if (text.empty()) return State(static_cast<std::size_t>(n), 0);
  State x;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    try {
      x.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("malformed state '" + text + "'");
    }
  }
  if (static_cast<int>(x.size()) != n) throw UsageError("state '" + text + "' needs " + std::to_string(n) + " coordinates");
  return x;
}

Link parse_link_arg(const std::string& text) {
  auto arrow = text.find("->");
  if (arrow == std::string::npos) throw UsageError("malformed link '" + text + "', expected i->j");
  try {
    return {std::stoi(text.substr(0, arrow)), std::stoi(text.substr(arrow + 2))};
  } catch (const std::exception&) {
    throw UsageError("malformed link '" + text + "'");
  }
}

std::vector<double> parse_grid(const std::string& text) {
  double t0 = 0, t1 = 0;
  long steps = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(text);
  if (!(ss >> t0 >> c1 >> t1 >> c2 >> steps) || c1 != ':' || c2 != ':' || steps < 0 || t0 < 0 || t1 < t0)
    throw UsageError("malformed grid '" + text + "', expected t0:t1:steps with 0 <= t0 <= t1");
  std::vector<double> times;
  if (steps == 0) return {t0};
  for (long k = 0; k <= steps; ++k) times.push_back(t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(steps));
  return times;
}

void add_runtime(json& j, const RunConfig& c, Clock::time_point start) {
  if (c.timing) j["runtime"] = std::chrono::duration<double>(Clock::now() - start).count();
}

int cmd_check(Context& ctx) {
  auto start = Clock::now();
  const auto& a = ctx.spec_a();
  const auto& b = ctx.spec_b();
  ConditionReport flow = check_flow_conditions(a, b, ctx.config.all_witnesses);
  ConditionReport pop = check_population_conditions(a, b, ctx.config.all_witnesses);
  if (ctx.config.format == Format::json) {
    json j;
    j["verdict"] = flow.pass() ? "pass" : "fail";
    j["flow"] = to_json(flow);
    j["population"] = to_json(pop);
    add_runtime(j, ctx.config, start);
    ctx.write_json("check_report.json", j);
  } else {
    std::ostringstream s;
    s << "order,condition,link,x,x_prime,rate,rate_prime,required\n";
    for (const auto* r : {&flow, &pop})
      for (const auto& w : r->witnesses)
        s << to_string(r->kind) << ',' << w.condition << ',' << to_string(w.link) << ',' << state_field(w.a) << ','
          << state_field(w.b) << ',' << format_number(w.rate_a) << ',' << format_number(w.rate_b) << ','
          << w.requirement << '\n';
    ctx.write_csv("check_witnesses.csv", s.str());
  }
  ctx.out << "flow-order conditions: " << (flow.pass() ? "pass" : "fail") << " (" << flow.witnesses.size()
          << " witness(es))\n";
  ctx.out << "population-order conditions: " << (pop.pass() ? "pass" : "fail") << " (" << pop.witnesses.size()
          << " witness(es))\n";
  return flow.pass() ? exit_ok : exit_verdict_fail;
}

int cmd_verify(Context& ctx) {
  auto start = Clock::now();
  const auto& a = ctx.spec_a();
  const auto& b = ctx.spec_b();
  std::int64_t bound = ctx.config.gap_bound.value_or(sufficient_gap_bound(a, b));
  ClosureReport report = verify_tight_configurations(a, b, bound);
  if (ctx.config.format == Format::json) {
    json j = to_json(report);
    add_runtime(j, ctx.config, start);
    ctx.write_json("closure_report.json", j);
  } else {
    std::ostringstream s;
    s << "kind,link_from,link_to,x,x_prime,gaps,rate,rate_prime\n";
    auto gaps = [](const std::vector<std::int64_t>& d) {
      std::string g;
      for (std::size_t k = 0; k < d.size(); ++k) g += (k ? ";" : "") + std::to_string(d[k]);
      return g;
    };
    for (const auto& br : report.breaks) {
      const Link& l = a.links()[br.config.link];
      s << "break," << l.from << ',' << l.to << ',' << state_field(br.config.a) << ',' << state_field(br.config.b) << ','
        << gaps(br.config.gaps) << ',' << format_number(br.rate_a) << ',' << format_number(br.rate_b) << '\n';
    }
    for (const auto& c : report.over_bound) {
      const Link& l = a.links()[c.link];
      s << "over_bound," << l.from << ',' << l.to << ',' << state_field(c.a) << ',' << state_field(c.b) << ','
        << gaps(c.gaps) << ",,\n";
    }
    ctx.write_csv("closure_witnesses.csv", s.str());
  }
  ctx.out << "tight configurations: " << report.configurations << ", verdict: " << to_string(report.verdict) << "\n";
  return report.closed() ? exit_ok : exit_verdict_fail;
}

int cmd_couple(Context& ctx) {
  auto start = Clock::now();
  const auto& a = ctx.spec_a();
  const auto& b = ctx.spec_b();
  const auto& c = ctx.config;
  CoupledSpec coupled = c.population ? build_population_coupling(a, b) : build_stateflow_coupling(a, b);
  State init = parse_state_arg(c.init, a.nodes());
  auto logs = simulate_coupled_replications(coupled, init, init, c.horizon, c.seed, c.reps, c.jobs);

  std::size_t events = 0, violating_reps = 0, violations = 0;
  double joint = 0.0;
  json first_violations = json::array();
  for (std::size_t r = 0; r < logs.size(); ++r) {
    events += logs[r].events.size();
    joint += logs[r].joint_fraction();
    std::size_t found = 0;
    if (c.population) {
      auto v = pathwise_population_order_check(logs[r]);
      found = v.size();
      if (!v.empty() && first_violations.size() < 10)
        first_violations.push_back({{"replication", r}, {"time", v[0].time}, {"node", v[0].node}});
    } else {
      auto v = pathwise_flow_order_check(logs[r]);
      found = v.size();
      if (!v.empty() && first_violations.size() < 10)
        first_violations.push_back({{"replication", r}, {"time", v[0].time}, {"link", to_string(a.links()[v[0].link])}});
    }
    violations += found;
    if (found) ++violating_reps;
    if (r < c.keep_logs) {
      std::ostringstream s;
      write_paired_log_csv(s, logs[r]);
      ctx.write_csv("paired_" + std::to_string(r) + ".csv", s.str());
    }
  }
  json j;
  j["verdict"] = violations == 0 ? "pass" : "fail";
  j["coupling"] = c.population ? "population" : "state_flow";
  j["order_checked"] = c.population ? "x <= x'" : "f <= f'";
  j["replications"] = c.reps;
  j["horizon"] = c.horizon;
  j["initial_state"] = init;
  j["events"] = events;
  j["mean_joint_fraction"] = logs.empty() ? 1.0 : joint / static_cast<double>(logs.size());
  j["violations"] = violations;
  j["violating_replications"] = violating_reps;
  j["first_violations"] = first_violations;
  add_runtime(j, c, start);
  ctx.write_json("couple_summary.json", j);
  ctx.out << c.reps << " coupled replications, " << events << " events, " << violations << " order violation(s)\n";
  return violations == 0 ? exit_ok : exit_verdict_fail;
}

int cmd_simulate(Context& ctx) {
  auto start = Clock::now();
  const auto& c = ctx.config;
  const auto& spec = ctx.spec_a();
  State init = parse_state_arg(c.init, spec.nodes());
  auto logs = simulate_replications(spec, init, c.horizon, c.seed, c.reps, c.jobs);
  std::vector<double> mean_counts(spec.link_count(), 0.0);
  std::size_t events = 0, absorbed = 0;
  for (std::size_t r = 0; r < logs.size(); ++r) {
    events += logs[r].events.size();
    if (logs[r].absorbed) ++absorbed;
    FlowTrajectory flows = recover_flows(logs[r], FlowVector(spec.link_count()));
    FlowVector end = flows.at(c.horizon);
    for (std::size_t l = 0; l < spec.link_count(); ++l) mean_counts[l] += static_cast<double>(end[l]);
    if (r < c.keep_logs) {
      std::ostringstream s;
      write_event_log_csv(s, logs[r]);
      ctx.write_csv("path_" + std::to_string(r) + ".csv", s.str());
      std::ostringstream fs;
      flows.write_csv(fs, spec.links());
      ctx.write_csv("flows_" + std::to_string(r) + ".csv", fs.str());
    }
  }
  json j;
  j["replications"] = c.reps;
  j["horizon"] = c.horizon;
  j["initial_state"] = init;
  j["events"] = events;
  j["absorbed_replications"] = absorbed;
  j["mean_flow_at_horizon"] = json::object();
  for (std::size_t l = 0; l < spec.link_count(); ++l)
    j["mean_flow_at_horizon"][to_string(spec.links()[l])] =
        c.reps ? mean_counts[l] / static_cast<double>(c.reps) : 0.0;
  add_runtime(j, c, start);
  ctx.write_json("simulate_summary.json", j);
  ctx.out << c.reps << " replications, " << events << " events\n";
  return exit_ok;
}

json solve_one(const NetworkSpec& spec, double tol, Distribution& pi) {
  Generator gen(spec);
  pi = stationary_distribution(gen, tol);
  json j;
  j["residual"] = stationary_residual(gen, pi);
  j["throughput"] = json::object();
  for (std::size_t l = 0; l < spec.link_count(); ++l) j["throughput"][to_string(spec.links()[l])] = throughput(spec, pi, l);
  if (spec.params().count("beta") && spec.link_index({0, 1})) {
    try {
      j["loss_rate"] = loss_rate(spec, pi);
    } catch (const ModelError&) {
      // arrival rates not of the blocking form; loss rate undefined
    }
  }
  return j;
}

int cmd_solve(Context& ctx) {
  auto start = Clock::now();
  const auto& c = ctx.config;
  // stationary residuals are checked against max(tol, 1e-12)-style bars inside the solver
  double tol = std::max(c.tol, 1e-12);
  json j;
  std::vector<std::pair<std::string, const NetworkSpec*>> models = {{"A", &ctx.spec_a()}};
  if (ctx.b) models.push_back({"B", ctx.b->spec.get()});
  for (const auto& [name, spec] : models) {
    Distribution pi;
    json s = solve_one(*spec, tol, pi);
    if (c.format == Format::csv) {
      std::ostringstream d;
      write_distribution_csv(d, *spec, pi);
      ctx.write_csv("stationary_" + name + ".csv", d.str());
    } else {
      s["distribution"] = json::array();
      for (std::size_t k = 0; k < spec->size(); ++k)
        s["distribution"].push_back({{"state", spec->states()[k]}, {"probability", pi[k]}});
    }
    ctx.out << "model " << name << ": residual " << format_number(s["residual"].get<double>());
    if (s.contains("loss_rate")) ctx.out << ", loss rate " << format_number(s["loss_rate"].get<double>());
    ctx.out << "\n";
    j[name] = s;
  }
  add_runtime(j, c, start);
  ctx.write_json("solve.json", j);
  return exit_ok;
}

int cmd_transient(Context& ctx) {
  auto start = Clock::now();
  const auto& c = ctx.config;
  const auto& a = ctx.spec_a();
  const auto& b = ctx.spec_b();
  Link link = parse_link_arg(c.link);
  State init = parse_state_arg(c.init, a.nodes());
  auto times = parse_grid(c.grid);
  MeanOrderReport report = mean_order_check(a, b, link, times, {{init, 1.0}}, c.tol, c.margin_tol);
  if (c.format == Format::csv) {
    std::ostringstream s;
    s << "time,mean_flow_a,mean_flow_b,margin\n";
    for (std::size_t k = 0; k < times.size(); ++k)
      s << format_number(times[k]) << ',' << format_number(report.mean_a[k]) << ',' << format_number(report.mean_b[k])
        << ',' << format_number(report.margins[k]) << '\n';
    ctx.write_csv("transient.csv", s.str());
  } else {
    json j = to_json(report);
    j["initial_state"] = init;
    add_runtime(j, c, start);
    ctx.write_json("transient.json", j);
  }
  double worst = 0.0;
  for (double m : report.margins) worst = std::min(worst, m);
  ctx.out << "mean-flow margins on " << to_string(link) << ": " << (report.pass ? "pass" : "fail")
          << " (smallest " << format_number(worst) << ")\n";
  return report.pass ? exit_ok : exit_verdict_fail;
}

int cmd_sweep(Context& ctx) {
  auto start = Clock::now();
  const auto& c = ctx.config;
  struct Row {
    double beta;
    int s1, s2;
    double thr_bal, thr_orig, loss_bal, loss_orig;
    bool ordered;
  };
  std::vector<Row> rows;
  bool all_ordered = true;
  for (double beta : c.betas)
    for (int s1 : c.sizes)
      for (int s2 : c.sizes) {
        TandemParams p = TandemParams::linear_service(s1, s2, beta, c.c1, c.c2);
        NetworkSpec bal = build_balanced_tandem(p), orig = build_original_tandem(p);
        Distribution pb = stationary_distribution(Generator(bal), std::max(c.tol, 1e-12));
        Distribution po = stationary_distribution(Generator(orig), std::max(c.tol, 1e-12));
        Row r{beta, s1, s2, throughput(bal, pb, 0), throughput(orig, po, 0), loss_rate(bal, pb), loss_rate(orig, po), false};
        r.ordered = r.thr_bal <= r.thr_orig + c.margin_tol;
        all_ordered = all_ordered && r.ordered;
        rows.push_back(r);
      }
  if (c.format == Format::csv) {
    std::ostringstream s;
    s << "beta,s1,s2,throughput_balanced,throughput_original,loss_balanced,loss_original,ordered\n";
    for (const auto& r : rows)
      s << format_number(r.beta) << ',' << r.s1 << ',' << r.s2 << ',' << format_number(r.thr_bal) << ','
        << format_number(r.thr_orig) << ',' << format_number(r.loss_bal) << ',' << format_number(r.loss_orig) << ','
        << (r.ordered ? 1 : 0) << '\n';
    ctx.write_csv("sweep.csv", s.str());
  } else {
    json j;
    j["verdict"] = all_ordered ? "pass" : "fail";
    j["service"] = {{"c1", c.c1}, {"c2", c.c2}};
    j["rows"] = json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"beta", r.beta},
                           {"s1", r.s1},
                           {"s2", r.s2},
                           {"throughput_balanced", r.thr_bal},
                           {"throughput_original", r.thr_orig},
                           {"loss_balanced", r.loss_bal},
                           {"loss_original", r.loss_orig},
                           {"ordered", r.ordered}});
    add_runtime(j, c, start);
    ctx.write_json("sweep.json", j);
  }
  ctx.out << rows.size() << " grid points, accepted throughput ordered: " << (all_ordered ? "yes" : "no") << "\n";
  return all_ordered ? exit_ok : exit_verdict_fail;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Context ctx(config, out);
    if (config.command != Command::sweep) {
      auto [a, b] = load_models(config);
      ctx.a = std::move(a);
      ctx.b = std::move(b);
    }
    std::filesystem::create_directories(config.out_dir);
    switch (config.command) {
      case Command::check: return cmd_check(ctx);
      case Command::verify: return cmd_verify(ctx);
      case Command::couple: return cmd_couple(ctx);
      case Command::simulate: return cmd_simulate(ctx);
      case Command::solve: return cmd_solve(ctx);
      case Command::transient: return cmd_transient(ctx);
      case Command::sweep: return cmd_sweep(ctx);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return exit_usage;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  if (const char* env = std::getenv("FLOWCOUPLE_OUT"); env && *env) config.out_dir = env;

  CLI::App app{"Flow-coupling simulator and verifier for Markov population processes", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string out_dir = config.out_dir.string();
  std::string format = "json";
  auto common = [&](CLI::App* sub) {
    sub->add_option("--model-a", config.model_a, "Model A file (JSON)");
    sub->add_option("--model-b", config.model_b, "Model B file (JSON)");
    sub->add_option("--family", config.family_a, "Built-in model A: tandem-original, tandem-balanced, tandem-pair");
    sub->add_option("--family-b", config.family_b, "Built-in model B");
    sub->add_option("--s1", config.s1, "Tandem buffer 1 capacity");
    sub->add_option("--s2", config.s2, "Tandem buffer 2 capacity");
    sub->add_option("--beta", config.beta, "Tandem arrival rate");
    sub->add_option("--delta1", config.delta1, "Tandem service table delta1(0..s1)")->delimiter(',');
    sub->add_option("--delta2", config.delta2, "Tandem service table delta2(0..s2)")->delimiter(',');
    sub->add_option("--seed", config.seed, "Base RNG seed");
    sub->add_option("--horizon", config.horizon, "Simulation horizon");
    sub->add_option("--reps", config.reps, "Replications");
    sub->add_option("--grid", config.grid, "Time grid t0:t1:steps");
    sub->add_option("--tol", config.tol, "Solver tolerance");
    sub->add_option("--margin-tol", config.margin_tol, "Pass bar for mean-flow margins");
    sub->add_option("--out", out_dir, "Output directory (default $FLOWCOUPLE_OUT or .)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--jobs", config.jobs, "Worker threads for replications");
    sub->add_option("--link", config.link, "Link i->j for flow curves");
    sub->add_option("--init", config.init, "Initial state x1;x2;... (default zeros)");
    sub->add_option("--keep-logs", config.keep_logs, "Event logs written to disk");
    sub->add_flag("--population", config.population, "couple: population coupling, check x <= x'");
    sub->add_option("--gap-bound", config.gap_bound, "verify: largest counter gap enumerated");
    sub->add_flag("--all-witnesses", config.all_witnesses, "check: record every witness");
    sub->add_flag("--timing", config.timing, "Add runtime fields to reports");
    sub->add_option("--betas", config.betas, "sweep: arrival rates")->delimiter(',');
    sub->add_option("--sizes", config.sizes, "sweep: buffer capacities")->delimiter(',');
    sub->add_option("--c1", config.c1, "sweep: delta1(x) = c1*x");
    sub->add_option("--c2", config.c2, "sweep: delta2(x) = c2*x");
  };
  const std::pair<const char*, const char*> commands[] = {
      {"check", "Check flow- and population-order rate conditions for A vs B"},
      {"verify", "Exhaustively verify closure of the flow order over tight configurations"},
      {"couple", "Simulate marching soldiers couplings and check pathwise order"},
      {"simulate", "Simulate paths of model A"},
      {"solve", "Stationary distribution, throughputs and loss rate"},
      {"transient", "Transient mean-flow curves of A and B and their margins"},
      {"sweep", "Tandem grid: equilibrium throughput of balanced vs original"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    subs[name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_usage;
  }
  config.out_dir = out_dir;
  config.format = format == "csv" ? Format::csv : Format::json;
  static const std::map<std::string, Command> by_name = {
      {"check", Command::check},       {"verify", Command::verify}, {"couple", Command::couple},
      {"simulate", Command::simulate}, {"solve", Command::solve},   {"transient", Command::transient},
      {"sweep", Command::sweep}};
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) config.command = by_name.at(name);
  return run(config, out, err);
}

}  // namespace flowcouple::cli
