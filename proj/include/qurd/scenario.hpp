#pragma once

// Scenario files, one directive per line:
//
//   machines <int>
//   job <id> demand <int> semantics <fail|wait>
//   timeout <int|off>
//   zeroconf <on|off>
//   failure-detector <on|off>
//   crash <machine> at <int>
//   kill <job> at <int>
//   expect <job> <completed|failed|timed-out>
//   bus-latency <int>   msg-latency <int>   job-duration <int>
//   detection-delay <int>   horizon <int>   seed <int>
//
// `#` starts a comment. Machines are named M1..Mk.

#include "proto.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qurd::scenario {

class ScenarioError : public std::runtime_error {
public:
  ScenarioError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }  // 0 when not tied to a line

private:
  std::size_t line_;
};

/// A parsed file: the scenario plus the outcomes `simulate` should see.
struct ScenarioFile {
  proto::Scenario scenario;
  std::map<std::string, proto::Outcome> expected;  // jobs not listed expect completed

  bool operator==(const ScenarioFile&) const = default;

  proto::Outcome expected_outcome(const std::string& job) const {
    auto it = expected.find(job);
    return it == expected.end() ? proto::Outcome::completed : it->second;
  }
};

namespace detail {

inline std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line.substr(0, line.find('#')));
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::uint64_t number(const std::string& text, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw ScenarioError(line, std::string("expected a nonnegative integer for ") + what + ", got '" + text + "'");
  return v;
}

inline std::uint32_t number32(const std::string& text, std::size_t line, const char* what) {
  auto v = number(text, line, what);
  if (v > UINT32_MAX) throw ScenarioError(line, std::string(what) + " is too large");
  return static_cast<std::uint32_t>(v);
}

inline bool on_off(const std::string& text, std::size_t line) {
  if (text == "on") return true;
  if (text == "off") return false;
  throw ScenarioError(line, "expected on or off, got '" + text + "'");
}

inline std::optional<proto::Outcome> outcome(const std::string& text) {
  for (auto o : {proto::Outcome::completed, proto::Outcome::failed, proto::Outcome::timed_out})
    if (text == proto::to_string(o)) return o;
  return std::nullopt;
}

} // namespace detail

inline ScenarioFile parse_file(const std::string& text) {
  ScenarioFile file;
  auto& sc = file.scenario;
  auto& p = sc.params;
  std::vector<catalog::Semantics> semantics;
  std::optional<std::size_t> machines_line;
  std::vector<std::pair<std::size_t, std::string>> machine_refs;
  std::vector<std::pair<std::size_t, std::string>> job_refs;

  std::istringstream in(text);
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    auto w = detail::words(raw);
    if (w.empty()) continue;
    const auto& d = w[0];
    auto arity = [&](std::size_t k, const char* usage) {
      if (w.size() != k) throw ScenarioError(n, std::string("usage: ") + usage);
    };
    if (d == "machines") {
      arity(2, "machines <int>");
      if (machines_line) throw ScenarioError(n, "duplicate machines directive (first on line " + std::to_string(*machines_line) + ")");
      machines_line = n;
      p.machines = detail::number32(w[1], n, "machines");
      if (p.machines == 0) throw ScenarioError(n, "at least one machine is required");
    } else if (d == "job") {
      arity(6, "job <id> demand <int> semantics <fail|wait>");
      if (w[2] != "demand" || w[4] != "semantics") throw ScenarioError(n, "usage: job <id> demand <int> semantics <fail|wait>");
      auto demand = detail::number32(w[3], n, "demand");
      if (demand == 0) throw ScenarioError(n, "job " + w[1] + " has zero demand");
      for (const auto& j : p.jobs)
        if (j.id == w[1]) throw ScenarioError(n, "duplicate job " + w[1]);
      if (w[5] != "fail" && w[5] != "wait") throw ScenarioError(n, "semantics must be fail or wait, got '" + w[5] + "'");
      p.jobs.push_back({w[1], demand});
      semantics.push_back(w[5] == "fail" ? catalog::Semantics::fail : catalog::Semantics::wait);
    } else if (d == "timeout") {
      arity(2, "timeout <int|off>");
      if (w[1] == "off") {
        p.timeout = std::nullopt;
      } else {
        p.timeout = detail::number32(w[1], n, "timeout");
        if (*p.timeout == 0) throw ScenarioError(n, "timeout must be at least 1");
      }
    } else if (d == "zeroconf") {
      arity(2, "zeroconf <on|off>");
      p.zeroconf = detail::on_off(w[1], n);
    } else if (d == "failure-detector") {
      arity(2, "failure-detector <on|off>");
      p.failure_detector = detail::on_off(w[1], n);
    } else if (d == "crash" || d == "kill") {
      arity(4, d == "crash" ? "crash <machine> at <int>" : "kill <job> at <int>");
      if (w[2] != "at") throw ScenarioError(n, "expected 'at' after " + w[1]);
      auto t = detail::number(w[3], n, "time");
      if (d == "crash") {
        sc.sim.crashes.push_back({w[1], t});
        machine_refs.emplace_back(n, w[1]);
      } else {
        sc.sim.launcher_kills.push_back({w[1], t});
        job_refs.emplace_back(n, w[1]);
      }
    } else if (d == "expect") {
      arity(3, "expect <job> <completed|failed|timed-out>");
      auto o = detail::outcome(w[2]);
      if (!o) throw ScenarioError(n, "unknown outcome '" + w[2] + "'");
      file.expected[w[1]] = *o;
      job_refs.emplace_back(n, w[1]);
    } else if (d == "bus-latency") {
      arity(2, "bus-latency <int>");
      sc.sim.bus_latency = detail::number(w[1], n, "bus-latency");
    } else if (d == "msg-latency") {
      arity(2, "msg-latency <int>");
      sc.sim.msg_latency = detail::number(w[1], n, "msg-latency");
    } else if (d == "job-duration") {
      arity(2, "job-duration <int>");
      sc.sim.job_duration = detail::number(w[1], n, "job-duration");
      if (sc.sim.job_duration == 0) throw ScenarioError(n, "job-duration must be at least 1");
    } else if (d == "detection-delay") {
      arity(2, "detection-delay <int>");
      sc.sim.detection_delay = detail::number(w[1], n, "detection-delay");
    } else if (d == "horizon") {
      arity(2, "horizon <int>");
      sc.sim.horizon = detail::number(w[1], n, "horizon");
    } else if (d == "seed") {
      arity(2, "seed <int>");
      sc.sim.seed = detail::number(w[1], n, "seed");
    } else {
      throw ScenarioError(n, "unknown directive '" + d + "'");
    }
  }

  if (!machines_line) throw ScenarioError(0, "missing machines directive");
  if (p.jobs.empty()) throw ScenarioError(0, "at least one job directive is required");
  auto ids = p.machine_ids();
  for (const auto& [line, id] : machine_refs)
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw ScenarioError(line, "unknown machine " + id);
  for (const auto& [line, id] : job_refs) {
    bool found = std::any_of(p.jobs.begin(), p.jobs.end(), [&](const auto& j) { return j.id == id; });
    if (!found) throw ScenarioError(line, "unknown job " + id);
  }

  // One semantics for everyone is stored once; mixed semantics stay per job.
  p.semantics = semantics.front();
  if (std::any_of(semantics.begin(), semantics.end(), [&](auto s) { return s != semantics.front(); }))
    sc.job_semantics = semantics;

  try {
    proto::validate(sc);
  } catch (const proto::InvalidScenario& e) {
    throw ScenarioError(0, e.what());
  }
  return file;
}

inline proto::Scenario parse_scenario(const std::string& text) { return parse_file(text).scenario; }

/// Canonical text; parse_file(render(f)) == f for parsed files.
inline std::string render(const ScenarioFile& file) {
  const auto& sc = file.scenario;
  const auto& p = sc.params;
  const auto& sim = sc.sim;
  std::ostringstream out;
  out << "machines " << p.machines << "\n";
  for (std::size_t j = 0; j < p.jobs.size(); ++j)
    out << "job " << p.jobs[j].id << " demand " << p.jobs[j].demand << " semantics "
        << catalog::to_string(sc.semantics_of(j)) << "\n";
  out << "timeout " << (p.timeout ? std::to_string(*p.timeout) : "off") << "\n";
  out << "zeroconf " << (p.zeroconf ? "on" : "off") << "\n";
  out << "failure-detector " << (p.failure_detector ? "on" : "off") << "\n";
  for (const auto& c : sim.crashes) out << "crash " << c.machine << " at " << c.time << "\n";
  for (const auto& k : sim.launcher_kills) out << "kill " << k.job << " at " << k.time << "\n";
  for (const auto& [job, o] : file.expected) out << "expect " << job << " " << proto::to_string(o) << "\n";
  out << "bus-latency " << sim.bus_latency << "\n";
  out << "msg-latency " << sim.msg_latency << "\n";
  out << "job-duration " << sim.job_duration << "\n";
  out << "detection-delay " << sim.detection_delay << "\n";
  out << "horizon " << sim.horizon << "\n";
  out << "seed " << sim.seed << "\n";
  return out.str();
}

inline std::string render(const proto::Scenario& sc) { return render(ScenarioFile{sc, {}}); }

/// One-line summary for report headers.
inline std::string digest(const proto::Scenario& sc) {
  const auto& p = sc.params;
  std::string out = std::to_string(p.machines) + (p.machines == 1 ? " machine;" : " machines;");
  for (std::size_t j = 0; j < p.jobs.size(); ++j)
    out += " " + p.jobs[j].id + " demand " + std::to_string(p.jobs[j].demand) + " " +
           catalog::to_string(sc.semantics_of(j)) + ";";
  out += " timeout " + (p.timeout ? std::to_string(*p.timeout) : std::string("off"));
  if (p.zeroconf) out += "; zeroconf";
  if (p.failure_detector) out += "; failure-detector";
  if (!sc.sim.crashes.empty()) out += "; " + std::to_string(sc.sim.crashes.size()) + " crash(es)";
  return out;
}

} // namespace qurd::scenario
