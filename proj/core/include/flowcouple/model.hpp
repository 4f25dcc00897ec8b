#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowcouple/expr.hpp"
#include "flowcouple/types.hpp"

namespace flowcouple {

/// Box {0..c_1} x ... x {0..c_n} with optional excluded points.
struct BoxSpace {
  std::vector<int> capacity;
  std::vector<State> exclude;

  friend bool operator==(const BoxSpace&, const BoxSpace&) = default;
};

/// Explicit list of states.
struct ListSpace {
  std::vector<State> states;

  friend bool operator==(const ListSpace&, const ListSpace&) = default;
};

using SpaceDef = std::variant<BoxSpace, ListSpace>;

/// Serializable description of a network; the in-memory form of a model file.
struct ModelDocument {
  int n = 0;
  SpaceDef space;
  std::vector<Link> links;          // empty means the linear family
  ParamMap params;
  std::vector<std::string> rates;   // one expression per link, same order as `links`
  bool clamp = false;
};

/// A validated population-process specification over a finite state space.
///
/// States are held in lexicographic order; rates and transition targets are tabulated
/// for every (state, link) pair at construction. Immutable after construction.
class NetworkSpec {
 public:
  /// Compiles and tabulates `doc`. Throws ModelError on schema problems, an empty state
  /// space, unknown identifiers, and negative or non-finite rates. Does not enforce the
  /// boundary-zero rule; see make_spec() and validate_spec().
  explicit NetworkSpec(ModelDocument doc);

  int nodes() const { return doc_.n; }
  const std::vector<Link>& links() const { return doc_.links; }
  std::size_t link_count() const { return doc_.links.size(); }
  const std::vector<State>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  const ParamMap& params() const { return doc_.params; }
  const ModelDocument& document() const { return doc_; }
  const RateExpr& rate_expr(std::size_t link) const { return exprs_[link]; }

  /// Index of `x` in states(), or npos.
  std::size_t index_of(const State& x) const;
  bool contains(const State& x) const { return index_of(x) != npos; }

  std::optional<std::size_t> link_index(const Link& link) const;

  /// Tabulated rate of `link` at state index `state` (after clamping, if enabled).
  double rate(std::size_t state, std::size_t link) const {
    return rates_[state * doc_.links.size() + link];
  }
  /// Index of x - e_i + e_j, or npos when that point lies outside the state space.
  std::size_t target(std::size_t state, std::size_t link) const {
    return targets_[state * doc_.links.size() + link];
  }
  double exit_rate(std::size_t state) const;

  /// True when the link set is exactly (0,1), (1,2), ..., (n,0) in that order.
  bool is_linear() const;

  double param(const std::string& name) const;

  friend bool operator==(const NetworkSpec& a, const NetworkSpec& b);

 private:
  ModelDocument doc_;
  std::vector<RateExpr> exprs_;
  std::vector<State> states_;
  std::vector<double> rates_;
  std::vector<std::size_t> targets_;
};

/// Every (state, link) pair that violates the boundary-zero rule.
struct BoundaryViolation {
  State state;
  Link link;
  double rate = 0.0;
};

struct ValidationReport {
  std::vector<BoundaryViolation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_spec(const NetworkSpec& spec);

/// Constructs a spec and rejects boundary-zero violations unless the document sets `clamp`.
NetworkSpec make_spec(ModelDocument doc);

/// Parses a JSON model document (see README for the schema) into a validated spec.
NetworkSpec parse_model(std::string_view text);
NetworkSpec load_model(const std::filesystem::path& path);

/// JSON text that parse_model() maps back to an equal spec.
std::string serialize_model(const NetworkSpec& spec);

/// Canonical lexicographic enumeration (same as spec.states()).
std::vector<State> enumerate_states(const NetworkSpec& spec);

/// 64-bit FNV-1a digest of serialize_model(spec), for report headers.
std::uint64_t model_digest(const NetworkSpec& spec);

}  // namespace flowcouple
