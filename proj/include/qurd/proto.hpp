#pragma once

// Executable reservation protocol: per-machine daemons, per-job launchers,
// a virtual service-discovery bus with latency, crash injection and an
// oracle failure detector, all driven by one deterministic event loop.
//
// Daemons and launchers are pure step functions from (state, event) to
// (state', effects). The simulator owns time and turns effects into future
// events.

#include "catalog.hpp"
#include "trace.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qurd::proto {

using catalog::Semantics;

namespace ev {
// launcher
inline constexpr const char* job_submitted = "job-submitted";
inline constexpr const char* discovered = "discovered";
inline constexpr const char* withdrawn = "withdrawn";
inline constexpr const char* reserve_sent = "reserve-sent";
inline constexpr const char* ok_received = "ok-received";
inline constexpr const char* ko_received = "ko-received";
inline constexpr const char* launch = "launch";
inline constexpr const char* job_sent = "job-sent";
inline constexpr const char* done_received = "done-received";
inline constexpr const char* all_done = "all-done";
inline constexpr const char* release_sent = "release-sent";
inline constexpr const char* failed = "failed";
inline constexpr const char* killed = "killed";
inline constexpr const char* timed_out = "timed-out";
inline constexpr const char* dropped = "dropped";
// daemon
inline constexpr const char* published = "published";
inline constexpr const char* unpublished = "unpublished";
inline constexpr const char* ok_sent = "ok-sent";
inline constexpr const char* ko_sent = "ko-sent";
inline constexpr const char* job_accepted = "job-accepted";
inline constexpr const char* job_refused = "job-refused";
inline constexpr const char* process_finished = "process-finished";
inline constexpr const char* done_sent = "done-sent";
inline constexpr const char* released = "released";
inline constexpr const char* release_ignored = "release-ignored";
inline constexpr const char* reservation_timeout = "reservation-timeout";
inline constexpr const char* crash = "crash";
inline constexpr const char* crash_running = "crash-running";
inline constexpr const char* release_lost = "release-lost";
// failure detector
inline constexpr const char* suspect = "suspect";
inline constexpr const char* detector_restart = "detector-restart";
} // namespace ev

enum class MsgKind { reserve, ok, ko, job, release, done };

inline const char* to_string(MsgKind k) {
  switch (k) {
  case MsgKind::reserve: return "RESERVE";
  case MsgKind::ok: return "OK";
  case MsgKind::ko: return "KO";
  case MsgKind::job: return "JOB";
  case MsgKind::release: return "RELEASE";
  case MsgKind::done: return "DONE";
  }
  return "?";
}

/// RESERVE, JOB and RELEASE travel launcher -> daemon; the rest the other way.
struct Message {
  MsgKind kind;
  std::size_t machine;
  std::size_t job;

  bool to_daemon() const { return kind == MsgKind::reserve || kind == MsgKind::job || kind == MsgKind::release; }
  bool operator==(const Message&) const = default;
};

enum class TimerKind { job_finished, reservation_expiry, launcher_hold };

struct Timer {
  TimerKind kind;
  std::uint64_t delay;
  std::uint64_t epoch;
  std::size_t machine;
  std::size_t job;
};

enum class BusOp { publish, unpublish };

struct Note {
  std::string kind;
  std::optional<std::size_t> machine;
  std::optional<std::size_t> job;
};

struct Effects {
  std::vector<Message> sends;
  std::vector<BusOp> bus;
  std::vector<Timer> timers;
  std::vector<Note> notes;

  void note(const char* kind, std::optional<std::size_t> m, std::optional<std::size_t> j) { notes.push_back({kind, m, j}); }
};

// ---------------------------------------------------------------- daemon

enum class DaemonPhase { available, reserved, running };

struct DaemonState {
  std::size_t index = 0;
  DaemonPhase phase = DaemonPhase::available;
  std::optional<std::size_t> client;
  bool published = false;
  bool crashed = false;
  std::uint64_t epoch = 0;  // bumped on every phase change; stale timers carry an old one

  bool operator==(const DaemonState&) const = default;
};

struct DaemonConfig {
  std::uint64_t job_duration = 2;
  std::optional<std::uint64_t> reservation_timeout;
};

namespace daemon_events {
struct Receive {
  Message msg;
};
struct Finished {
  std::uint64_t epoch;
};
struct Expired {
  std::uint64_t epoch;
};
struct Restart {
  std::size_t job;
};
struct Crash {};
} // namespace daemon_events

using DaemonEvent = std::variant<daemon_events::Receive, daemon_events::Finished, daemon_events::Expired,
                                 daemon_events::Restart, daemon_events::Crash>;

namespace detail {

inline void become_available(DaemonState& s, Effects& fx) {
  s.phase = DaemonPhase::available;
  s.client.reset();
  ++s.epoch;
  s.published = true;
  fx.bus.push_back(BusOp::publish);
  fx.note(ev::published, s.index, std::nullopt);
}

inline void leave_bus(DaemonState& s, Effects& fx) {
  if (!s.published) return;
  s.published = false;
  fx.bus.push_back(BusOp::unpublish);
  fx.note(ev::unpublished, s.index, std::nullopt);
}

inline void start_running(DaemonState& s, const DaemonConfig& cfg, std::size_t job, Effects& fx) {
  s.phase = DaemonPhase::running;
  s.client = job;
  ++s.epoch;
  fx.timers.push_back({TimerKind::job_finished, cfg.job_duration, s.epoch, s.index, job});
}

} // namespace detail

/// Daemon reaction to one event. A crashed daemon ignores everything.
inline std::pair<DaemonState, Effects> daemon_step(DaemonState s, const DaemonConfig& cfg, const DaemonEvent& event) {
  Effects fx;
  if (s.crashed) return {s, fx};
  const auto m = s.index;

  if (auto* rcv = std::get_if<daemon_events::Receive>(&event)) {
    const auto& msg = rcv->msg;
    const auto c = msg.job;
    switch (msg.kind) {
    case MsgKind::reserve:
      if (s.phase == DaemonPhase::available) {
        fx.sends.push_back({MsgKind::ok, m, c});
        fx.note(ev::ok_sent, m, c);
        s.phase = DaemonPhase::reserved;
        s.client = c;
        ++s.epoch;
        detail::leave_bus(s, fx);
        if (cfg.reservation_timeout)
          fx.timers.push_back({TimerKind::reservation_expiry, *cfg.reservation_timeout, s.epoch, m, c});
      } else {
        fx.sends.push_back({MsgKind::ko, m, c});
        fx.note(ev::ko_sent, m, c);
      }
      break;
    case MsgKind::job:
      // Accepted only while reserved by the sender.
      if (s.phase == DaemonPhase::reserved && s.client == c) {
        fx.note(ev::job_accepted, m, c);
        detail::start_running(s, cfg, c, fx);
      } else {
        fx.note(ev::job_refused, m, c);
      }
      break;
    case MsgKind::release:
      if (s.phase == DaemonPhase::reserved && s.client == c) {
        fx.note(ev::released, m, c);
        detail::become_available(s, fx);
      } else {
        fx.note(ev::release_ignored, m, c);
      }
      break;
    default:
      break;
    }
  } else if (auto* fin = std::get_if<daemon_events::Finished>(&event)) {
    if (fin->epoch == s.epoch && s.phase == DaemonPhase::running) {
      auto c = *s.client;
      fx.note(ev::process_finished, m, c);
      fx.sends.push_back({MsgKind::done, m, c});
      fx.note(ev::done_sent, m, c);
      detail::become_available(s, fx);
    }
  } else if (auto* exp = std::get_if<daemon_events::Expired>(&event)) {
    if (exp->epoch == s.epoch && s.phase == DaemonPhase::reserved) {
      fx.note(ev::reservation_timeout, m, *s.client);
      detail::become_available(s, fx);
    }
  } else if (auto* rs = std::get_if<daemon_events::Restart>(&event)) {
    if (s.phase != DaemonPhase::available) throw std::logic_error("restart on a daemon that is not available");
    detail::leave_bus(s, fx);
    detail::start_running(s, cfg, rs->job, fx);
  } else if (std::holds_alternative<daemon_events::Crash>(event)) {
    if (s.phase == DaemonPhase::running) fx.note(ev::crash_running, m, *s.client);
    else fx.note(ev::crash, m, std::nullopt);
    detail::leave_bus(s, fx);
    s.crashed = true;
  }
  return {s, fx};
}

// -------------------------------------------------------------- launcher

enum class LauncherPhase { idle, discovering, launching, done, failed, killed };

struct LauncherState {
  std::size_t index = 0;
  std::uint32_t needed = 1;
  Semantics semantics = Semantics::wait;
  LauncherPhase phase = LauncherPhase::idle;
  std::vector<std::size_t> machines;     // reserved, in OK order
  std::set<std::size_t> outstanding;     // RESERVE sent, no reply yet
  std::deque<std::size_t> queue;         // discovered, not yet contacted
  std::map<std::size_t, std::uint64_t> seen_generation;
  std::map<std::size_t, std::uint64_t> hold_epoch;
  std::uint64_t next_epoch = 0;
  std::uint32_t dones = 0;
};

struct LauncherConfig {
  std::optional<std::uint64_t> hold_timeout;  // release a reserved machine not launched within this
};

namespace launcher_events {
struct Start {};
struct Discover {
  std::size_t machine;
  std::uint64_t generation;
};
struct Withdraw {
  std::size_t machine;
};
struct Receive {
  Message msg;
};
struct HoldExpired {
  std::size_t machine;
  std::uint64_t epoch;
};
/// Fail semantics: nothing left to discover and no reply pending.
struct Exhausted {};
struct Kill {};
} // namespace launcher_events

using LauncherEvent =
    std::variant<launcher_events::Start, launcher_events::Discover, launcher_events::Withdraw, launcher_events::Receive,
                 launcher_events::HoldExpired, launcher_events::Exhausted, launcher_events::Kill>;

namespace detail {

inline void contact_more(LauncherState& s, Effects& fx) {
  while (s.machines.size() + s.outstanding.size() < s.needed && !s.queue.empty()) {
    auto m = s.queue.front();
    s.queue.pop_front();
    s.outstanding.insert(m);
    fx.sends.push_back({MsgKind::reserve, m, s.index});
    fx.note(ev::reserve_sent, m, s.index);
  }
}

inline void release_all(LauncherState& s, Effects& fx) {
  for (auto m : s.machines) {
    fx.sends.push_back({MsgKind::release, m, s.index});
    fx.note(ev::release_sent, m, s.index);
  }
  s.machines.clear();
  s.hold_epoch.clear();
}

inline bool known(const LauncherState& s, std::size_t m) {
  return std::find(s.machines.begin(), s.machines.end(), m) != s.machines.end() || s.outstanding.count(m) ||
         std::find(s.queue.begin(), s.queue.end(), m) != s.queue.end();
}

} // namespace detail

inline std::pair<LauncherState, Effects> launcher_step(LauncherState s, const LauncherConfig& cfg,
                                                       const LauncherEvent& event) {
  Effects fx;
  const auto j = s.index;
  if (s.phase == LauncherPhase::killed) return {s, fx};

  if (std::holds_alternative<launcher_events::Kill>(event)) {
    s.phase = LauncherPhase::killed;
    fx.note(ev::killed, std::nullopt, j);
    return {s, fx};
  }
  if (std::holds_alternative<launcher_events::Start>(event)) {
    if (s.phase == LauncherPhase::idle) {
      s.phase = LauncherPhase::discovering;
      fx.note(ev::job_submitted, std::nullopt, j);
    }
    return {s, fx};
  }

  const bool discovering = s.phase == LauncherPhase::discovering;
  if (auto* d = std::get_if<launcher_events::Discover>(&event)) {
    if (!discovering) return {s, fx};
    auto& seen = s.seen_generation[d->machine];
    if (d->generation <= seen) return {s, fx};
    seen = d->generation;
    if (detail::known(s, d->machine)) return {s, fx};
    fx.note(ev::discovered, d->machine, j);
    s.queue.push_back(d->machine);
    detail::contact_more(s, fx);
  } else if (auto* w = std::get_if<launcher_events::Withdraw>(&event)) {
    auto it = std::find(s.queue.begin(), s.queue.end(), w->machine);
    if (discovering && it != s.queue.end()) {
      s.queue.erase(it);
      fx.note(ev::withdrawn, w->machine, j);
    }
  } else if (auto* r = std::get_if<launcher_events::Receive>(&event)) {
    const auto m = r->msg.machine;
    switch (r->msg.kind) {
    case MsgKind::ok:
      s.outstanding.erase(m);
      fx.note(ev::ok_received, m, j);
      if (!discovering) break;
      s.machines.push_back(m);
      if (s.machines.size() == s.needed) {
        fx.note(ev::launch, std::nullopt, j);
        for (auto target : s.machines) {
          fx.sends.push_back({MsgKind::job, target, j});
          fx.note(ev::job_sent, target, j);
        }
        s.hold_epoch.clear();
        s.phase = LauncherPhase::launching;
      } else {
        if (cfg.hold_timeout) {
          s.hold_epoch[m] = ++s.next_epoch;
          fx.timers.push_back({TimerKind::launcher_hold, *cfg.hold_timeout, s.next_epoch, m, j});
        }
        detail::contact_more(s, fx);
      }
      break;
    case MsgKind::ko:
      s.outstanding.erase(m);
      fx.note(ev::ko_received, m, j);
      if (discovering) detail::contact_more(s, fx);
      break;
    case MsgKind::done:
      fx.note(ev::done_received, m, j);
      if (s.phase != LauncherPhase::launching) break;
      if (++s.dones == s.needed) {
        fx.note(ev::all_done, std::nullopt, j);
        s.phase = LauncherPhase::done;
      }
      break;
    default:
      break;
    }
  } else if (auto* h = std::get_if<launcher_events::HoldExpired>(&event)) {
    auto it = s.hold_epoch.find(h->machine);
    if (discovering && it != s.hold_epoch.end() && it->second == h->epoch) {
      s.hold_epoch.erase(it);
      s.machines.erase(std::find(s.machines.begin(), s.machines.end(), h->machine));
      fx.sends.push_back({MsgKind::release, h->machine, j});
      fx.note(ev::release_sent, h->machine, j);
      if (s.semantics == Semantics::fail) {
        // The lost slot is not returned under fail semantics.
        detail::release_all(s, fx);
        s.phase = LauncherPhase::failed;
        fx.note(ev::failed, std::nullopt, j);
      } else {
        detail::contact_more(s, fx);
      }
    }
  } else if (std::holds_alternative<launcher_events::Exhausted>(event)) {
    if (discovering && s.semantics == Semantics::fail && s.machines.size() < s.needed) {
      detail::release_all(s, fx);
      s.phase = LauncherPhase::failed;
      fx.note(ev::failed, std::nullopt, j);
    }
  }
  return {s, fx};
}

// ------------------------------------------------------------- scenario

struct Crash {
  std::string machine;
  std::uint64_t time = 0;

  bool operator==(const Crash&) const = default;
};

struct Kill {
  std::string job;
  std::uint64_t time = 0;

  bool operator==(const Kill&) const = default;
};

struct SimConfig {
  std::uint64_t bus_latency = 1;
  std::uint64_t msg_latency = 1;
  std::uint64_t job_duration = 2;
  std::map<std::string, std::uint64_t> job_duration_overrides;  // per machine id
  std::vector<Crash> crashes;
  std::vector<Kill> launcher_kills;
  std::uint64_t detection_delay = 1;
  std::uint64_t horizon = 1000;
  std::uint64_t seed = 0;

  bool operator==(const SimConfig&) const = default;
};

struct Scenario {
  catalog::CatalogParams params;
  std::vector<Semantics> job_semantics;  // per job; empty means params.semantics for all
  SimConfig sim;

  bool operator==(const Scenario&) const = default;

  Semantics semantics_of(std::size_t job) const {
    return job_semantics.empty() ? params.semantics : job_semantics.at(job);
  }

  /// Net parameters for analysis; every job must use the same semantics.
  catalog::CatalogParams net_params() const {
    auto p = params;
    if (!job_semantics.empty()) {
      for (auto s : job_semantics)
        if (s != job_semantics.front())
          throw std::invalid_argument("jobs use different semantics; nets need a single one");
      p.semantics = job_semantics.front();
    }
    return p;
  }
};

class InvalidScenario : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline void validate(const Scenario& sc) {
  try {
    sc.params.check();
  } catch (const std::invalid_argument& e) {
    throw InvalidScenario(e.what());
  }
  if (!sc.job_semantics.empty() && sc.job_semantics.size() != sc.params.jobs.size())
    throw InvalidScenario("per-job semantics must cover every job");
  auto machines = sc.params.machine_ids();
  auto is_machine = [&](const std::string& id) { return std::find(machines.begin(), machines.end(), id) != machines.end(); };
  for (const auto& c : sc.sim.crashes)
    if (!is_machine(c.machine)) throw InvalidScenario("unknown machine " + c.machine);
  for (const auto& [id, d] : sc.sim.job_duration_overrides) {
    if (!is_machine(id)) throw InvalidScenario("unknown machine " + id);
    if (d == 0) throw InvalidScenario("job duration must be at least 1");
  }
  if (sc.sim.job_duration == 0) throw InvalidScenario("job duration must be at least 1");
  for (const auto& k : sc.sim.launcher_kills) {
    bool found = std::any_of(sc.params.jobs.begin(), sc.params.jobs.end(), [&](const auto& j) { return j.id == k.job; });
    if (!found) throw InvalidScenario("unknown job " + k.job);
  }
}

enum class Outcome { completed, failed, timed_out };

inline const char* to_string(Outcome o) {
  switch (o) {
  case Outcome::completed: return "completed";
  case Outcome::failed: return "failed";
  case Outcome::timed_out: return "timed-out";
  }
  return "?";
}

struct SimResult {
  std::vector<Outcome> outcomes;  // aligned with params.jobs
  std::vector<trace::TraceEvent> trace;
  std::uint64_t end_time = 0;
  std::vector<DaemonState> daemons;
};

// ------------------------------------------------------------ simulator

class Simulator {
public:
  explicit Simulator(Scenario sc) : sc_(std::move(sc)), rng_(sc_.sim.seed) {
    validate(sc_);
    machine_ids_ = sc_.params.machine_ids();
    const auto& sim = sc_.sim;
    const auto& timeout = sc_.params.timeout;
    for (std::size_t m = 0; m < machine_ids_.size(); ++m) {
      DaemonConfig cfg;
      auto it = sim.job_duration_overrides.find(machine_ids_[m]);
      cfg.job_duration = it == sim.job_duration_overrides.end() ? sim.job_duration : it->second;
      // Outlives the launcher's own hold timer plus the RELEASE round trip,
      // so a live launcher always releases first.
      if (timeout) cfg.reservation_timeout = *timeout + 2 * sim.msg_latency;
      daemon_cfg_.push_back(cfg);
      DaemonState d;
      d.index = m;
      daemons_.push_back(d);
      generation_.push_back(0);
      ok_count_.push_back(0);
    }
    for (std::size_t j = 0; j < sc_.params.jobs.size(); ++j) {
      LauncherState l;
      l.index = j;
      l.needed = sc_.params.jobs[j].demand;
      l.semantics = sc_.semantics_of(j);
      launchers_.push_back(l);
      inflight_.push_back(0);
    }
    launcher_cfg_.hold_timeout = timeout ? std::optional<std::uint64_t>(*timeout) : std::nullopt;
  }

  SimResult run() {
    // Daemons publish themselves at start-up.
    for (std::size_t m = 0; m < daemons_.size(); ++m) {
      DaemonState& d = daemons_[m];
      d.published = true;
      Effects fx;
      fx.bus.push_back(BusOp::publish);
      fx.note(ev::published, m, std::nullopt);
      apply_daemon(m, fx);
    }
    std::vector<std::size_t> order(launchers_.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    shuffle(order);
    for (auto j : order) push(0, kExternal, Submit{j});
    for (const auto& c : sc_.sim.crashes) push(c.time, kExternal, CrashAt{machine_index(c.machine)});
    for (const auto& k : sc_.sim.launcher_kills) push(k.time, kExternal, KillAt{job_index(k.job)});

    while (!queue_.empty()) {
      auto item = queue_.top();
      if (item.time > sc_.sim.horizon) break;
      queue_.pop();
      now_ = item.time;
      dispatch(item.payload);
      settle();
    }

    SimResult out;
    for (std::size_t j = 0; j < launchers_.size(); ++j) {
      auto phase = launchers_[j].phase;
      auto o = phase == LauncherPhase::done ? Outcome::completed
               : phase == LauncherPhase::failed ? Outcome::failed
                                                : Outcome::timed_out;
      if (o == Outcome::timed_out) record(job_id(j), {ev::timed_out, std::nullopt, j});
      out.outcomes.push_back(o);
    }
    out.trace = std::move(trace_);
    out.end_time = now_;
    out.daemons = daemons_;
    return out;
  }

private:
  static constexpr int kDelivery = 0;
  static constexpr int kTimer = 1;
  static constexpr int kExternal = 2;

  struct Deliver {
    Message msg;
  };
  struct Notify {
    std::size_t launcher;
    std::size_t machine;
    std::uint64_t generation;
    bool publish;
  };
  struct FireTimer {
    Timer timer;
  };
  struct Submit {
    std::size_t job;
  };
  struct CrashAt {
    std::size_t machine;
  };
  struct KillAt {
    std::size_t job;
  };
  struct Detect {
    std::size_t machine;
    std::size_t job;
  };
  using Payload = std::variant<Deliver, Notify, FireTimer, Submit, CrashAt, KillAt, Detect>;

  struct Item {
    std::uint64_t time;
    int cls;
    std::uint64_t seq;
    Payload payload;
    bool operator>(const Item& o) const {
      if (time != o.time) return time > o.time;
      if (cls != o.cls) return cls > o.cls;
      return seq > o.seq;
    }
  };

  void push(std::uint64_t time, int cls, Payload p) { queue_.push(Item{time, cls, seq_++, std::move(p)}); }

  // Fisher-Yates over the raw engine output: identical on every platform.
  void shuffle(std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng_() % i]);
  }

  std::size_t machine_index(const std::string& id) const {
    return static_cast<std::size_t>(std::find(machine_ids_.begin(), machine_ids_.end(), id) - machine_ids_.begin());
  }
  std::size_t job_index(const std::string& id) const {
    const auto& jobs = sc_.params.jobs;
    return static_cast<std::size_t>(
        std::find_if(jobs.begin(), jobs.end(), [&](const auto& j) { return j.id == id; }) - jobs.begin());
  }
  const std::string& job_id(std::size_t j) const { return sc_.params.jobs[j].id; }

  void record(const std::string& actor, const Note& n) {
    trace::TraceEvent e{now_, actor, n.kind, std::nullopt, std::nullopt};
    if (n.machine) e.machine = machine_ids_[*n.machine];
    if (n.job) e.job = job_id(*n.job);
    trace_.push_back(std::move(e));
  }

  void send(const Message& msg) { push(now_ + sc_.sim.msg_latency, kDelivery, Deliver{msg}); }

  void apply_daemon(std::size_t m, const Effects& fx) {
    for (const auto& n : fx.notes) {
      record(machine_ids_[m], n);
      if (n.kind == ev::ok_sent && ++ok_count_[m] > 1) throw std::logic_error("daemon sent a second OK while reserved");
    }
    for (auto op : fx.bus) bus(m, op);
    for (const auto& msg : fx.sends) send(msg);
    for (const auto& t : fx.timers) push(now_ + t.delay, kTimer, FireTimer{t});
    check_daemon(m);
  }

  void apply_launcher(std::size_t j, const Effects& fx) {
    for (const auto& n : fx.notes) record(job_id(j), n);
    for (const auto& msg : fx.sends) send(msg);
    for (const auto& t : fx.timers) push(now_ + t.delay, kTimer, FireTimer{t});
  }

  void check_daemon(std::size_t m) {
    const auto& d = daemons_[m];
    if ((d.phase == DaemonPhase::available) != !d.client.has_value())
      throw std::logic_error("daemon client does not match its phase");
    if (d.published && (d.phase != DaemonPhase::available || d.crashed))
      throw std::logic_error("daemon published while not available");
    if (d.phase == DaemonPhase::available) ok_count_[m] = 0;
  }

  void step_daemon(std::size_t m, const DaemonEvent& e) {
    auto [next, fx] = daemon_step(daemons_[m], daemon_cfg_[m], e);
    daemons_[m] = next;
    apply_daemon(m, fx);
  }

  void step_launcher(std::size_t j, const LauncherEvent& e) {
    auto [next, fx] = launcher_step(launchers_[j], launcher_cfg_, e);
    launchers_[j] = std::move(next);
    apply_launcher(j, fx);
  }

  bool listening(std::size_t j) const { return launchers_[j].phase == LauncherPhase::discovering; }

  void bus(std::size_t m, BusOp op) {
    bool publish = op == BusOp::publish;
    if (publish) ++generation_[m];
    for (std::size_t j = 0; j < launchers_.size(); ++j) {
      if (!listening(j)) continue;
      if (publish) ++inflight_[j];
      push(now_ + sc_.sim.bus_latency, kDelivery, Notify{j, m, generation_[m], publish});
    }
  }

  // A launcher that starts browsing learns every daemon published right now.
  void browse(std::size_t j) {
    std::vector<std::size_t> visible;
    for (std::size_t m = 0; m < daemons_.size(); ++m)
      if (daemons_[m].published) visible.push_back(m);
    shuffle(visible);
    for (auto m : visible) {
      ++inflight_[j];
      push(now_ + sc_.sim.bus_latency, kDelivery, Notify{j, m, generation_[m], true});
    }
  }

  void dispatch(const Payload& p) {
    if (auto* d = std::get_if<Deliver>(&p)) {
      const auto& msg = d->msg;
      if (msg.to_daemon()) {
        auto& d = daemons_[msg.machine];
        if (d.crashed) {
          // A release reaching a daemon that died holding it ends the reservation on both sides.
          if (msg.kind == MsgKind::release && d.phase == DaemonPhase::reserved && d.client == msg.job) {
            d.phase = DaemonPhase::available;
            d.client.reset();
            record(machine_ids_[msg.machine], {ev::release_lost, msg.machine, msg.job});
            check_daemon(msg.machine);
          } else {
            record(machine_ids_[msg.machine], {ev::dropped, msg.machine, msg.job});
            // The connection is refused; the launcher sees a KO.
            if (msg.kind == MsgKind::reserve) send({MsgKind::ko, msg.machine, msg.job});
          }
          return;
        }
        step_daemon(msg.machine, daemon_events::Receive{msg});
      } else {
        if (launchers_[msg.job].phase == LauncherPhase::killed) {
          record(job_id(msg.job), {ev::dropped, msg.machine, msg.job});
          return;
        }
        step_launcher(msg.job, launcher_events::Receive{msg});
      }
    } else if (auto* n = std::get_if<Notify>(&p)) {
      if (n->publish) {
        --inflight_[n->launcher];
        step_launcher(n->launcher, launcher_events::Discover{n->machine, n->generation});
      } else {
        step_launcher(n->launcher, launcher_events::Withdraw{n->machine});
      }
    } else if (auto* t = std::get_if<FireTimer>(&p)) {
      const auto& timer = t->timer;
      switch (timer.kind) {
      case TimerKind::job_finished: step_daemon(timer.machine, daemon_events::Finished{timer.epoch}); break;
      case TimerKind::reservation_expiry: step_daemon(timer.machine, daemon_events::Expired{timer.epoch}); break;
      case TimerKind::launcher_hold:
        step_launcher(timer.job, launcher_events::HoldExpired{timer.machine, timer.epoch});
        break;
      }
    } else if (auto* s = std::get_if<Submit>(&p)) {
      step_launcher(s->job, launcher_events::Start{});
      browse(s->job);
    } else if (auto* c = std::get_if<CrashAt>(&p)) {
      const auto& d = daemons_[c->machine];
      std::optional<std::size_t> victim;
      if (!d.crashed && d.phase == DaemonPhase::running) victim = d.client;
      step_daemon(c->machine, daemon_events::Crash{});
      if (victim && sc_.params.failure_detector)
        push(now_ + sc_.sim.detection_delay, kExternal, Detect{c->machine, *victim});
    } else if (auto* k = std::get_if<KillAt>(&p)) {
      step_launcher(k->job, launcher_events::Kill{});
    } else if (auto* det = std::get_if<Detect>(&p)) {
      record("fd", {ev::suspect, det->machine, det->job});
      pending_restarts_.push_back(det->job);
    }
  }

  // Work that depends on global state after every event: oracle restarts and
  // fail-semantics exhaustion.
  void settle() {
    while (!pending_restarts_.empty()) {
      auto target = std::find_if(daemons_.begin(), daemons_.end(),
                                 [](const DaemonState& d) { return !d.crashed && d.phase == DaemonPhase::available; });
      if (target == daemons_.end()) break;
      auto job = pending_restarts_.front();
      pending_restarts_.pop_front();
      record("fd", {ev::detector_restart, target->index, job});
      step_daemon(target->index, daemon_events::Restart{job});
    }
    for (std::size_t j = 0; j < launchers_.size(); ++j) {
      const auto& l = launchers_[j];
      if (l.phase == LauncherPhase::discovering && l.semantics == Semantics::fail && l.queue.empty() &&
          l.outstanding.empty() && inflight_[j] == 0)
        step_launcher(j, launcher_events::Exhausted{});
    }
  }

  Scenario sc_;
  std::mt19937_64 rng_;
  std::vector<std::string> machine_ids_;
  std::vector<DaemonState> daemons_;
  std::vector<DaemonConfig> daemon_cfg_;
  std::vector<LauncherState> launchers_;
  LauncherConfig launcher_cfg_;
  std::vector<std::uint64_t> generation_;
  std::vector<std::uint32_t> inflight_;
  std::vector<std::uint32_t> ok_count_;
  std::deque<std::size_t> pending_restarts_;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
  std::vector<trace::TraceEvent> trace_;
  std::uint64_t seq_ = 0;
  std::uint64_t now_ = 0;
};

inline SimResult run(const Scenario& sc) { return Simulator(sc).run(); }

} // namespace qurd::proto
