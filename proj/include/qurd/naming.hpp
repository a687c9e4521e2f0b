#pragma once

// Instance naming used by both the composed P/T models and the colored
// unfolding: `available.M1`, `reserved.(M1,J1)`, `begin.J1` for places and
// `t1@(M1,J1)`, `launch@(J1)`, `publish@(M1)` for transitions.

#include <optional>
#include <string>
#include <string_view>

namespace qurd::names {

inline std::string place(std::string_view base, std::string_view color) {
  return std::string(base) + "." + std::string(color);
}

inline std::string place(std::string_view base, std::string_view machine, std::string_view job) {
  return std::string(base) + ".(" + std::string(machine) + "," + std::string(job) + ")";
}

inline std::string transition(std::string_view base, std::string_view color) {
  return std::string(base) + "@(" + std::string(color) + ")";
}

inline std::string transition(std::string_view base, std::string_view machine, std::string_view job) {
  return std::string(base) + "@(" + std::string(machine) + "," + std::string(job) + ")";
}

struct Parsed {
  std::string base;
  std::string first;   // machine, or job for job-colored names
  std::string second;  // job when the name carries a pair
};

/// Splits `base.color`, `base.(m,j)`, `base@(c)` or `base@(m,j)`. Returns
/// nullopt for uncolored names.
inline std::optional<Parsed> parse(std::string_view name) {
  auto sep = name.find_first_of(".@");
  if (sep == std::string_view::npos) return std::nullopt;
  Parsed out{std::string(name.substr(0, sep)), {}, {}};
  auto rest = name.substr(sep + 1);
  if (!rest.empty() && rest.front() == '(') {
    if (rest.back() != ')') return std::nullopt;
    rest = rest.substr(1, rest.size() - 2);
    auto comma = rest.find(',');
    if (comma == std::string_view::npos) {
      out.first = std::string(rest);
    } else {
      out.first = std::string(rest.substr(0, comma));
      out.second = std::string(rest.substr(comma + 1));
    }
  } else {
    out.first = std::string(rest);
  }
  if (out.first.empty()) return std::nullopt;
  return out;
}

} // namespace qurd::names
