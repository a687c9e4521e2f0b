#pragma once

// Protocol trace lines:
//
//   t=<time> <actor> <kind>[ m=<machine>][ j=<job>]
//
// <actor> is a machine id, a job id (its launcher), `bus` or `fd`. Fields are
// separated by single spaces; one event per line.

#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qurd::trace {

struct TraceEvent {
  std::uint64_t time = 0;
  std::string actor;
  std::string kind;
  std::optional<std::string> machine;
  std::optional<std::string> job;

  bool operator==(const TraceEvent&) const = default;
};

inline std::string format(const TraceEvent& e) {
  std::string out = "t=" + std::to_string(e.time) + " " + e.actor + " " + e.kind;
  if (e.machine) out += " m=" + *e.machine;
  if (e.job) out += " j=" + *e.job;
  return out;
}

inline std::string format(const std::vector<TraceEvent>& events) {
  std::string out;
  for (const auto& e : events) out += format(e) + "\n";
  return out;
}

class TraceParseError : public std::runtime_error {
public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

inline TraceEvent parse_line(const std::string& text, std::size_t line_no = 1) {
  std::istringstream in(text);
  std::string time_field;
  TraceEvent e;
  if (!(in >> time_field >> e.actor >> e.kind)) throw TraceParseError(line_no, "expected 't=<int> <actor> <kind>'");
  if (time_field.rfind("t=", 0) != 0 || time_field.size() == 2) throw TraceParseError(line_no, "bad time field");
  try {
    std::size_t used = 0;
    e.time = std::stoull(time_field.substr(2), &used);
    if (used != time_field.size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw TraceParseError(line_no, "bad time field");
  }
  std::string arg;
  while (in >> arg) {
    if (arg.rfind("m=", 0) == 0 && arg.size() > 2 && !e.machine) {
      e.machine = arg.substr(2);
    } else if (arg.rfind("j=", 0) == 0 && arg.size() > 2 && !e.job) {
      e.job = arg.substr(2);
    } else {
      throw TraceParseError(line_no, "unexpected argument '" + arg + "'");
    }
  }
  return e;
}

inline std::vector<TraceEvent> parse(std::istream& in) {
  std::vector<TraceEvent> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(parse_line(line, n));
  }
  return out;
}

inline std::vector<TraceEvent> parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

} // namespace qurd::trace
