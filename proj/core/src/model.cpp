#include "flowcouple/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowcouple/error.hpp"

namespace flowcouple {

using nlohmann::json;

std::string to_string(const Link& link) {
  return std::to_string(link.from) + "->" + std::to_string(link.to);
}

std::string format_state(const State& x) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(x[i]);
  }
  return out + ")";
}

std::string state_field(const State& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(x[i]);
  }
  return out;
}

std::vector<Link> linear_links(int n) {
  std::vector<Link> links;
  for (int k = 0; k < n; ++k) links.push_back({k, k + 1});
  links.push_back({n, 0});
  return links;
}

namespace {

void check_state_shape(const State& x, int n, const char* what) {
  if (static_cast<int>(x.size()) != n)
    throw ModelError(std::string(what) + " " + format_state(x) + " has length " +
                     std::to_string(x.size()) + ", expected " + std::to_string(n));
  for (int v : x)
    if (v < 0) throw ModelError(std::string(what) + " " + format_state(x) + " has a negative coordinate");
}

std::vector<State> expand_space(const ModelDocument& doc) {
  std::vector<State> states;
  if (const auto* box = std::get_if<BoxSpace>(&doc.space)) {
    if (static_cast<int>(box->capacity.size()) != doc.n)
      throw ModelError("box has " + std::to_string(box->capacity.size()) + " capacities, expected " +
                       std::to_string(doc.n));
    for (int c : box->capacity)
      if (c < 0) throw ModelError("box capacity must be nonnegative");
    std::set<State> excluded;
    for (const State& x : box->exclude) {
      check_state_shape(x, doc.n, "excluded state");
      for (int i = 0; i < doc.n; ++i)
        if (x[i] > box->capacity[i])
          throw ModelError("excluded state " + format_state(x) + " lies outside the box");
      excluded.insert(x);
    }
    State x(static_cast<std::size_t>(doc.n), 0);
    for (;;) {
      if (!excluded.count(x)) states.push_back(x);
      int i = doc.n - 1;
      while (i >= 0 && x[i] == box->capacity[i]) x[i--] = 0;
      if (i < 0) break;
      ++x[i];
    }
  } else {
    const auto& list = std::get<ListSpace>(doc.space);
    for (const State& x : list.states) check_state_shape(x, doc.n, "state");
    states = list.states;
    std::sort(states.begin(), states.end());
    auto dup = std::adjacent_find(states.begin(), states.end());
    if (dup != states.end()) throw ModelError("duplicate state " + format_state(*dup));
  }
  if (states.empty()) throw ModelError("empty state space");
  return states;
}

}  // namespace

NetworkSpec::NetworkSpec(ModelDocument doc) : doc_(std::move(doc)) {
  if (doc_.n < 1) throw ModelError("node count must be at least 1");
  if (doc_.links.empty()) doc_.links = linear_links(doc_.n);
  {
    std::set<Link> seen;
    for (const Link& l : doc_.links) {
      if (l.from < 0 || l.from > doc_.n || l.to < 0 || l.to > doc_.n)
        throw ModelError("link " + to_string(l) + " refers to a node outside 0.." + std::to_string(doc_.n));
      if (l.from == l.to) throw ModelError("self-loop link " + to_string(l));
      if (!seen.insert(l).second) throw ModelError("duplicate link " + to_string(l));
    }
  }
  if (doc_.rates.size() != doc_.links.size())
    throw ModelError("expected one rate per link (" + std::to_string(doc_.links.size()) + "), got " +
                     std::to_string(doc_.rates.size()));
  for (const auto& [name, value] : doc_.params) {
    if (!std::isfinite(value)) throw ModelError("parameter '" + name + "' is not finite");
    if (name == "min" || name == "max" || name == "ind")
      throw ModelError("parameter name '" + name + "' is reserved");
    if (name.size() > 1 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ModelError("parameter name '" + name + "' shadows a state coordinate");
  }

  for (const std::string& text : doc_.rates) exprs_.push_back(RateExpr::parse(text, doc_.n, doc_.params));

  states_ = expand_space(doc_);

  const std::size_t m = states_.size();
  const std::size_t nl = doc_.links.size();
  rates_.assign(m * nl, 0.0);
  targets_.assign(m * nl, npos);
  for (std::size_t s = 0; s < m; ++s) {
    const State& x = states_[s];
    for (std::size_t l = 0; l < nl; ++l) {
      double r = exprs_[l].evaluate(x, doc_.params);
      if (!std::isfinite(r))
        throw ModelError("rate of link " + to_string(doc_.links[l]) + " is not finite at state " + format_state(x));
      if (r < 0.0)
        throw ModelError("negative rate " + format_number(r) + " on link " + to_string(doc_.links[l]) +
                         " at state " + format_state(x));
      State y = x;
      const Link& link = doc_.links[l];
      if (link.from > 0) --y[static_cast<std::size_t>(link.from - 1)];
      if (link.to > 0) ++y[static_cast<std::size_t>(link.to - 1)];
      std::size_t t = index_of(y);
      targets_[s * nl + l] = t;
      if (t == npos && doc_.clamp) r = 0.0;
      rates_[s * nl + l] = r;
    }
  }
}

std::size_t NetworkSpec::index_of(const State& x) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), x);
  if (it == states_.end() || *it != x) return npos;
  return static_cast<std::size_t>(it - states_.begin());
}

std::optional<std::size_t> NetworkSpec::link_index(const Link& link) const {
  for (std::size_t l = 0; l < doc_.links.size(); ++l)
    if (doc_.links[l] == link) return l;
  return std::nullopt;
}

double NetworkSpec::exit_rate(std::size_t state) const {
  double total = 0.0;
  for (std::size_t l = 0; l < doc_.links.size(); ++l) total += rate(state, l);
  return total;
}

bool NetworkSpec::is_linear() const { return doc_.links == linear_links(doc_.n); }

double NetworkSpec::param(const std::string& name) const {
  auto it = doc_.params.find(name);
  if (it == doc_.params.end()) throw ModelError("unknown parameter '" + name + "'");
  return it->second;
}

bool operator==(const NetworkSpec& a, const NetworkSpec& b) {
  return a.doc_.n == b.doc_.n && a.doc_.space == b.doc_.space && a.doc_.links == b.doc_.links &&
         a.doc_.params == b.doc_.params && a.doc_.clamp == b.doc_.clamp && a.exprs_ == b.exprs_;
}

ValidationReport validate_spec(const NetworkSpec& spec) {
  ValidationReport report;
  const auto& doc = spec.document();
  for (std::size_t s = 0; s < spec.size(); ++s) {
    for (std::size_t l = 0; l < spec.link_count(); ++l) {
      if (spec.target(s, l) != npos) continue;
      // clamped tables are zero here by construction; report against the raw expression
      double raw = spec.rate_expr(l).evaluate(spec.states()[s], doc.params);
      if (raw > 0.0) report.violations.push_back({spec.states()[s], spec.links()[l], raw});
    }
  }
  return report;
}

NetworkSpec make_spec(ModelDocument doc) {
  NetworkSpec spec(std::move(doc));
  if (!spec.document().clamp) {
    ValidationReport report = validate_spec(spec);
    if (!report.ok()) {
      const auto& v = report.violations.front();
      throw ModelError("boundary-zero rule violated: link " + to_string(v.link) + " has rate " +
                       format_number(v.rate) + " at state " + format_state(v.state) +
                       " but its target lies outside the state space (" +
                       std::to_string(report.violations.size()) + " violation(s); set \"clamp\": true to zero them)");
    }
  }
  return spec;
}

namespace {

Link parse_link(const json& j) {
  if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    auto arrow = s.find("->");
    if (arrow != std::string::npos) {
      try {
        std::size_t used1 = 0, used2 = 0;
        std::string lhs = s.substr(0, arrow), rhs = s.substr(arrow + 2);
        int from = std::stoi(lhs, &used1);
        int to = std::stoi(rhs, &used2);
        if (used1 == lhs.size() && used2 == rhs.size()) return {from, to};
      } catch (const std::exception&) {
      }
    }
    throw ModelError("malformed link \"" + s + "\", expected \"i->j\"");
  }
  throw ModelError("malformed link " + j.dump());
}

State parse_state(const json& j) {
  if (!j.is_array()) throw ModelError("state must be an array, got " + j.dump());
  State x;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ModelError("state coordinates must be integers, got " + j.dump());
    x.push_back(v.get<int>());
  }
  return x;
}

ModelDocument document_from_json(const json& j) {
  if (!j.is_object()) throw ModelError("model document must be a JSON object");
  static const std::set<std::string> known = {"n", "space", "links", "params", "rates", "clamp"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ModelError("unknown field '" + key + "'");
  ModelDocument doc;
  if (!j.contains("n") || !j["n"].is_number_integer()) throw ModelError("missing integer field 'n'");
  doc.n = j["n"].get<int>();
  if (doc.n < 1) throw ModelError("node count must be at least 1");

  if (!j.contains("space") || !j["space"].is_object()) throw ModelError("missing object field 'space'");
  const json& space = j["space"];
  if (space.contains("box") == space.contains("list"))
    throw ModelError("'space' must contain exactly one of 'box' or 'list'");
  if (space.contains("box")) {
    for (const auto& [key, _] : space.items())
      if (key != "box" && key != "exclude") throw ModelError("unknown field 'space." + key + "'");
    BoxSpace box;
    for (const auto& c : space["box"]) {
      if (!c.is_number_integer()) throw ModelError("box capacities must be integers");
      box.capacity.push_back(c.get<int>());
    }
    if (space.contains("exclude"))
      for (const auto& x : space["exclude"]) box.exclude.push_back(parse_state(x));
    doc.space = std::move(box);
  } else {
    if (space.size() != 1) throw ModelError("'space.list' takes no sibling fields");
    ListSpace list;
    for (const auto& x : space["list"]) list.states.push_back(parse_state(x));
    doc.space = std::move(list);
  }

  if (j.contains("links")) {
    if (!j["links"].is_array()) throw ModelError("'links' must be an array");
    for (const auto& l : j["links"]) doc.links.push_back(parse_link(l));
  } else {
    doc.links = linear_links(doc.n);
  }

  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ModelError("'params' must be an object");
    for (const auto& [name, value] : j["params"].items()) {
      if (!value.is_number()) throw ModelError("parameter '" + name + "' must be a number");
      doc.params[name] = value.get<double>();
    }
  }

  if (!j.contains("rates") || !j["rates"].is_object()) throw ModelError("missing object field 'rates'");
  std::map<Link, std::string> by_link;
  for (const auto& [key, value] : j["rates"].items()) {
    Link l = parse_link(json(key));
    if (std::find(doc.links.begin(), doc.links.end(), l) == doc.links.end())
      throw ModelError("rate given for link " + key + " which is not in the link set");
    if (value.is_number()) {
      by_link[l] = format_number(value.get<double>());
    } else if (value.is_string()) {
      by_link[l] = value.get<std::string>();
    } else {
      throw ModelError("rate for link " + key + " must be an expression string");
    }
  }
  for (const Link& l : doc.links) {
    auto it = by_link.find(l);
    if (it == by_link.end()) throw ModelError("no rate given for link " + to_string(l));
    doc.rates.push_back(it->second);
  }

  if (j.contains("clamp")) {
    if (!j["clamp"].is_boolean()) throw ModelError("'clamp' must be a boolean");
    doc.clamp = j["clamp"].get<bool>();
  }
  return doc;
}

}  // namespace

NetworkSpec parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return make_spec(document_from_json(j));
  } catch (const json::exception& e) {
    throw ModelError(std::string("schema violation: ") + e.what());
  }
}

NetworkSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

std::string serialize_model(const NetworkSpec& spec) {
  const ModelDocument& doc = spec.document();
  json j = json::object();
  j["n"] = doc.n;
  json space = json::object();
  if (const auto* box = std::get_if<BoxSpace>(&doc.space)) {
    space["box"] = box->capacity;
    if (!box->exclude.empty()) space["exclude"] = box->exclude;
  } else {
    space["list"] = std::get<ListSpace>(doc.space).states;
  }
  j["space"] = space;
  json links = json::array();
  for (const Link& l : doc.links) links.push_back({l.from, l.to});
  j["links"] = links;
  j["params"] = json::object();
  for (const auto& [name, value] : doc.params) j["params"][name] = value;
  json rates = json::object();
  for (std::size_t l = 0; l < doc.links.size(); ++l) rates[to_string(doc.links[l])] = spec.rate_expr(l).to_string();
  j["rates"] = rates;
  j["clamp"] = doc.clamp;
  return j.dump(2);
}

std::vector<State> enumerate_states(const NetworkSpec& spec) { return spec.states(); }

std::uint64_t model_digest(const NetworkSpec& spec) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : serialize_model(spec)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace flowcouple
