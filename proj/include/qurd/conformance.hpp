#pragma once

// Trace conformance: project a protocol trace onto colored-net firings and
// replay them from the model's initial marking.

#include "catalog.hpp"
#include "colored.hpp"
#include "proto.hpp"
#include "trace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qurd::conformance {

using trace::TraceEvent;

/// Trace kinds with a net counterpart, and the kinds declared to have none.
struct EventMap {
  std::map<std::string, std::string> mapped;
  std::set<std::string> internal;

  static EventMap standard() {
    EventMap m;
    m.mapped = {
        {proto::ev::job_submitted, "start_job"},
        {proto::ev::ok_sent, "t1"},
        {proto::ev::launch, "launch"},
        {proto::ev::job_accepted, "t2"},
        {proto::ev::process_finished, "t3"},
        {proto::ev::done_sent, "t4"},
        {proto::ev::all_done, "t5"},
        {proto::ev::released, "cancel"},
        {proto::ev::reservation_timeout, "cancel"},
        {proto::ev::crash_running, "crash"},
        {proto::ev::release_lost, "cancel"},
        {proto::ev::detector_restart, "continue"},
    };
    m.internal = {
        proto::ev::discovered,  proto::ev::withdrawn,     proto::ev::reserve_sent,    proto::ev::ok_received,
        proto::ev::ko_received, proto::ev::job_sent,      proto::ev::done_received,   proto::ev::failed,
        proto::ev::killed,      proto::ev::timed_out,     proto::ev::dropped,         proto::ev::published,
        proto::ev::unpublished, proto::ev::ko_sent,       proto::ev::job_refused,     proto::ev::release_sent,
        proto::ev::release_ignored, proto::ev::crash,     proto::ev::suspect,
    };
    return m;
  }

  /// Mapped targets that the net lacks.
  std::vector<std::string> missing_targets(const colored::ColoredNet& net) const {
    std::vector<std::string> out;
    for (const auto& [kind, t] : mapped)
      if (!net.has_transition(t)) out.push_back(kind + " -> " + t);
    return out;
  }
};

class UnknownEvent : public std::runtime_error {
public:
  explicit UnknownEvent(const std::string& kind) : std::runtime_error("trace event kind neither mapped nor internal: " + kind) {}
};

struct Step {
  std::string transition;
  colored::Binding binding;
  std::size_t trace_index = 0;  // position of the originating event

  bool operator==(const Step&) const = default;
};

/// Order-preserving projection; bindings come from the event's m/j fields.
inline std::vector<Step> project(const std::vector<TraceEvent>& events, const EventMap& map,
                                 const colored::ColorUniverse& u) {
  std::vector<Step> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    auto it = map.mapped.find(e.kind);
    if (it == map.mapped.end()) {
      if (map.internal.count(e.kind)) continue;
      throw UnknownEvent(e.kind);
    }
    colored::Binding b;
    if (e.machine) {
      b.machine = u.machine_index(*e.machine);
      if (!b.machine) throw std::invalid_argument("trace names unknown machine " + *e.machine);
    }
    if (e.job) {
      b.job = u.job_index(*e.job);
      if (!b.job) throw std::invalid_argument("trace names unknown job " + *e.job);
    }
    out.push_back({it->second, b, i});
  }
  return out;
}

struct Divergence {
  std::size_t index = 0;  // position in the projected sequence
  Step step;
  std::string label;
  colored::ColoredMarking marking;  // where it blocked
};

struct ReplayResult {
  bool ok = true;
  std::optional<Divergence> divergence;
  colored::ColoredMarking final_marking;
  std::size_t fired = 0;
};

/// Untimed replay: only enabling is checked.
inline ReplayResult replay(const std::vector<Step>& steps, const colored::ColoredNet& net,
                           const colored::ColorUniverse& u) {
  ReplayResult r;
  r.final_marking = net.initial_marking(u);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    std::optional<std::size_t> t;
    if (net.has_transition(s.transition)) t = net.transition(s.transition);
    bool bound = t && [&] {
      const auto& ct = net.transitions()[*t];
      return ct.uses_machine() == s.binding.machine.has_value() && ct.uses_job() == s.binding.job.has_value();
    }();
    if (!bound || !colored::colored_is_enabled(net, u, r.final_marking, *t, s.binding)) {
      r.ok = false;
      auto label = t && bound ? colored::binding_label(net, u, *t, s.binding) : s.transition;
      r.divergence = Divergence{i, s, label, r.final_marking};
      return r;
    }
    r.final_marking = colored::colored_fire(net, u, r.final_marking, *t, s.binding);
    ++r.fired;
  }
  return r;
}

/// Colored model matching a scenario: failure-detector transitions whenever
/// the scenario injects crashes.
inline catalog::ColoredModel model_for(const proto::Scenario& sc) {
  auto p = sc.net_params();
  if (!sc.sim.crashes.empty()) p.failure_detector = true;
  return catalog::build_colored(p);
}

struct CheckResult {
  bool ok = true;
  std::string reason;  // empty when ok
  std::optional<Divergence> divergence;
  std::size_t projected = 0;
};

/// Replays a trace and cross-checks job_done against the completions it reports.
inline CheckResult check_trace(const std::vector<TraceEvent>& events, const proto::Scenario& sc,
                               const EventMap& map = EventMap::standard()) {
  auto model = model_for(sc);
  CheckResult out;
  auto steps = project(events, map, model.universe);
  out.projected = steps.size();
  auto r = replay(steps, model.net, model.universe);
  if (!r.ok) {
    out.ok = false;
    out.divergence = r.divergence;
    out.reason = "divergence at step " + std::to_string(r.divergence->index) + " (" + r.divergence->label + ")";
    return out;
  }
  std::size_t completed = 0;
  for (const auto& e : events)
    if (e.kind == proto::ev::all_done) ++completed;
  std::size_t done_tokens = 0;
  for (const auto& [tok, n] : r.final_marking.places[model.net.place("job_done")]) done_tokens += n;
  if (completed != done_tokens) {
    out.ok = false;
    out.reason = "job_done holds " + std::to_string(done_tokens) + " tokens but the trace completes " +
                 std::to_string(completed) + " jobs";
  }
  return out;
}

struct FuzzFailure {
  std::uint64_t seed;
  std::string reason;
};

struct FuzzSummary {
  std::size_t runs = 0;
  std::size_t passed = 0;
  std::vector<FuzzFailure> failures;

  bool ok() const { return passed == runs; }
};

/// Random scenario: 1-4 daemons, 1-2 jobs, demands 1-3, one semantics for
/// all jobs, optional crash and failure detector.
inline proto::Scenario random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };
  proto::Scenario sc;
  auto& p = sc.params;
  p.machines = static_cast<std::uint32_t>(pick(1, 4));
  auto jobs = pick(1, 2);
  for (std::uint64_t j = 0; j < jobs; ++j)
    p.jobs.push_back({"J" + std::to_string(j + 1), static_cast<std::uint32_t>(pick(1, 3))});
  p.semantics = pick(0, 1) ? catalog::Semantics::wait : catalog::Semantics::fail;
  if (pick(0, 3) != 0) p.timeout = static_cast<std::uint32_t>(pick(1, 6));
  else p.timeout = std::nullopt;
  p.failure_detector = pick(0, 1) == 1;
  sc.sim.bus_latency = pick(0, 2);
  sc.sim.msg_latency = pick(0, 2);
  sc.sim.job_duration = pick(1, 4);
  sc.sim.detection_delay = pick(0, 2);
  sc.sim.horizon = 200;
  sc.sim.seed = rng();
  if (pick(0, 1)) sc.sim.crashes.push_back({"M" + std::to_string(pick(1, p.machines)), pick(0, 12)});
  return sc;
}

inline FuzzSummary fuzz_conformance(std::size_t count, std::uint64_t seed = 0,
                                    const EventMap& map = EventMap::standard()) {
  FuzzSummary s;
  for (std::size_t i = 0; i < count; ++i) {
    auto scenario_seed = seed + i;
    auto sc = random_scenario(scenario_seed);
    ++s.runs;
    try {
      auto result = proto::run(sc);
      auto check = check_trace(result.trace, sc, map);
      if (check.ok) ++s.passed;
      else s.failures.push_back({scenario_seed, check.reason});
    } catch (const std::exception& e) {
      s.failures.push_back({scenario_seed, e.what()});
    }
  }
  return s;
}

/// The standard map with two targets exchanged; a negative control.
inline EventMap swapped(EventMap map, const std::string& a, const std::string& b) {
  for (auto& [kind, t] : map.mapped) {
    if (t == a) t = b;
    else if (t == b) t = a;
  }
  return map;
}

} // namespace qurd::conformance
