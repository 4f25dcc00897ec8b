#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace flowcouple {

/// Population vector (x_1, ..., x_n). Node 0, the outside world, has no coordinate.
using State = std::vector<int>;

/// Named scalar constants referenced by rate expressions.
using ParamMap = std::map<std::string, double>;

/// Directed link (from, to) over nodes {0, 1, ..., n}; 0 is the outside world.
struct Link {
  int from = 0;
  int to = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// "i->j"
std::string to_string(const Link& link);

/// "(x1,x2,...)"
std::string format_state(const State& x);

/// "x1;x2;..." as used in CSV exports.
std::string state_field(const State& x);

/// Links of the open linear network: (0,1), (1,2), ..., (n-1,n), (n,0).
std::vector<Link> linear_links(int n);

}  // namespace flowcouple
