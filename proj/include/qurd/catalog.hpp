#pragma once

// Builders for the reservation-system nets: a single daemon, one or two
// clients composed with their machines, the Zeroconf publish/unpublish and
// failure-detector extensions, and the colored model that folds all of them.

#include "colored.hpp"
#include "naming.hpp"
#include "tpn.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qurd::catalog {

enum class Semantics { fail, wait };

inline const char* to_string(Semantics s) { return s == Semantics::fail ? "fail" : "wait"; }

struct JobSpec {
  std::string id;
  std::uint32_t demand = 1;

  bool operator==(const JobSpec&) const = default;
};

inline constexpr std::uint32_t kDefaultTimeout = 3;

struct CatalogParams {
  std::uint32_t machines = 1;
  std::vector<JobSpec> jobs;
  Semantics semantics = Semantics::wait;
  std::optional<std::uint32_t> timeout = kDefaultTimeout;  // nullopt: disabled
  bool zeroconf = false;
  bool failure_detector = false;

  bool operator==(const CatalogParams&) const = default;

  /// Jobs named J1, J2, ... with the given demands.
  static CatalogParams with_demands(std::uint32_t machines, const std::vector<std::uint32_t>& demands,
                                    Semantics semantics = Semantics::wait,
                                    std::optional<std::uint32_t> timeout = kDefaultTimeout) {
    CatalogParams p;
    p.machines = machines;
    p.semantics = semantics;
    p.timeout = timeout;
    for (std::size_t i = 0; i < demands.size(); ++i) p.jobs.push_back({"J" + std::to_string(i + 1), demands[i]});
    return p;
  }

  void check() const {
    if (machines == 0) throw std::invalid_argument("at least one machine is required");
    if (jobs.empty()) throw std::invalid_argument("at least one job is required");
    if (timeout && *timeout == 0) throw std::invalid_argument("timeout must be at least 1");
    std::set<std::string> ids;
    for (const auto& j : jobs) {
      if (j.demand == 0) throw std::invalid_argument("job " + j.id + " has zero demand");
      if (!ids.insert(j.id).second) throw std::invalid_argument("duplicate job id " + j.id);
    }
    for (const auto& m : machine_ids())
      if (ids.count(m)) throw std::invalid_argument("job id clashes with machine id " + m);
  }

  std::vector<std::string> machine_ids() const {
    std::vector<std::string> out;
    for (std::uint32_t i = 1; i <= machines; ++i) out.push_back("M" + std::to_string(i));
    return out;
  }

  colored::ColorUniverse universe() const {
    colored::ColorUniverse u;
    u.machines = machine_ids();
    for (const auto& j : jobs) {
      u.jobs.push_back(j.id);
      u.demand.push_back(j.demand);
    }
    return u;
  }

  /// Cancel exists when a timeout is configured, or unconditionally under fail
  /// semantics where the launcher frees its machines explicitly.
  std::optional<tpn::Interval> cancel_interval() const {
    if (timeout) return tpn::Interval::unbounded(*timeout);
    if (semantics == Semantics::fail) return tpn::Interval::unbounded(0);
    return std::nullopt;
  }
};

struct MachineOptions {
  std::optional<std::uint32_t> timeout = kDefaultTimeout;
  Semantics semantics = Semantics::wait;
};

/// One daemon with the client-side places it synchronises on left empty.
inline tpn::Net build_machine(const MachineOptions& opt = {}) {
  tpn::Net net;
  net.add_place("available", 1)
      .add_place("reserved")
      .add_place("running")
      .add_place("finished")
      .add_place("get_nodes")
      .add_place("answered")
      .add_place("launching_job")
      .add_place("job_finished");
  net.add_transition("t1").add_input("t1", "available").add_input("t1", "get_nodes");
  net.add_output("t1", "reserved").add_output("t1", "answered");
  net.add_transition("t2").add_input("t2", "reserved").add_input("t2", "launching_job").add_output("t2", "running");
  net.add_transition("t3").add_input("t3", "running").add_output("t3", "finished");
  net.add_transition("t4").add_input("t4", "finished").add_output("t4", "available").add_output("t4", "job_finished");
  if (opt.timeout || opt.semantics == Semantics::fail) {
    net.add_transition("cancel", tpn::Interval::unbounded(opt.timeout.value_or(0)));
    net.add_input("cancel", "reserved").add_input("cancel", "answered").add_output("cancel", "available");
    if (opt.semantics == Semantics::wait) net.add_output("cancel", "get_nodes");
  }
  return net;
}

namespace detail {

inline tpn::Net compose(const CatalogParams& p) {
  p.check();
  tpn::Net net;
  auto machines = p.machine_ids();
  for (const auto& job : p.jobs) {
    for (const char* base : {"begin", "get_nodes", "answered", "launching_job", "job_finished", "job_done"})
      net.add_place(names::place(base, job.id), std::string_view(base) == "begin" ? 1 : 0);
  }
  for (const auto& m : machines) {
    net.add_place(names::place("available", m), 1);
    for (const auto& job : p.jobs)
      for (const char* base : {"reserved", "running", "finished"}) net.add_place(names::place(base, m, job.id));
  }

  auto cancel = p.cancel_interval();
  for (const auto& job : p.jobs) {
    const auto& j = job.id;
    auto start = names::transition("start_job", j);
    net.add_transition(start).add_input(start, names::place("begin", j));
    net.add_output(start, names::place("get_nodes", j), job.demand);

    auto launch = names::transition("launch", j);
    net.add_transition(launch).add_input(launch, names::place("answered", j), job.demand);
    net.add_output(launch, names::place("launching_job", j), job.demand);

    for (const auto& m : machines) {
      auto reserved = names::place("reserved", m, j);
      auto running = names::place("running", m, j);
      auto finished = names::place("finished", m, j);
      auto available = names::place("available", m);

      auto t1 = names::transition("t1", m, j);
      net.add_transition(t1).add_input(t1, available).add_input(t1, names::place("get_nodes", j));
      net.add_output(t1, reserved).add_output(t1, names::place("answered", j));

      if (cancel) {
        auto c = names::transition("cancel", m, j);
        net.add_transition(c, *cancel).add_input(c, reserved).add_input(c, names::place("answered", j));
        net.add_output(c, available);
        if (p.semantics == Semantics::wait) net.add_output(c, names::place("get_nodes", j));
      }

      auto t2 = names::transition("t2", m, j);
      net.add_transition(t2).add_input(t2, reserved).add_input(t2, names::place("launching_job", j));
      net.add_output(t2, running);

      auto t3 = names::transition("t3", m, j);
      net.add_transition(t3).add_input(t3, running).add_output(t3, finished);

      auto t4 = names::transition("t4", m, j);
      net.add_transition(t4).add_input(t4, finished).add_output(t4, available);
      net.add_output(t4, names::place("job_finished", j));
    }

    auto t5 = names::transition("t5", j);
    net.add_transition(t5).add_input(t5, names::place("job_finished", j), job.demand);
    net.add_output(t5, names::place("job_done", j));
  }
  return net;
}

inline bool is_base(const std::string& place, std::string_view base) {
  if (place == base) return true;
  auto parsed = names::parse(place);
  return parsed && parsed->base == base && place.find('@') == std::string::npos;
}

} // namespace detail

/// Adds not_available plus publish/unpublish for every machine `available` place.
inline tpn::Net add_zeroconf(tpn::Net net) {
  std::vector<std::string> targets;
  for (const auto& p : net.places())
    if (detail::is_base(p, "available")) targets.push_back(p);
  if (targets.empty()) throw std::invalid_argument("net has no available place");
  for (const auto& available : targets) {
    auto parsed = names::parse(available);
    auto not_available = parsed ? names::place("not_available", parsed->first) : std::string("not_available");
    auto publish = parsed ? names::transition("publish", parsed->first) : std::string("publish");
    auto unpublish = parsed ? names::transition("unpublish", parsed->first) : std::string("unpublish");
    net.add_place(not_available);
    net.add_transition(publish).add_input(publish, not_available).add_output(publish, available);
    net.add_transition(unpublish).add_input(unpublish, available).add_output(unpublish, not_available);
  }
  return net;
}

/// Adds the global failure-detector places, a per-machine dead place, and
/// crash/continue for every running place. `crash` is also known as `dead`
/// and `continue` as `restart`.
inline tpn::Net add_failure_detector(tpn::Net net) {
  std::vector<std::string> running;
  for (const auto& p : net.places())
    if (detail::is_base(p, "running")) running.push_back(p);
  if (running.empty()) throw std::invalid_argument("net has no running place");
  std::set<std::string> have(net.places().begin(), net.places().end());
  auto ensure = [&](const std::string& name) {
    if (have.insert(name).second) net.add_place(name);
  };
  for (const auto& r : running) {
    if (r == "running") {
      ensure("dead");
      ensure("failure_detector");
      net.add_transition("crash").add_input("crash", "running");
      net.add_output("crash", "dead").add_output("crash", "failure_detector");
      net.add_transition("continue").add_input("continue", "available").add_input("continue", "failure_detector");
      net.add_output("continue", "running");
      continue;
    }
    auto parsed = names::parse(r);
    const auto& m = parsed->first;
    const auto& j = parsed->second;
    auto dead = names::place("dead", m);
    auto fd = names::place("failure_detector", j);
    ensure(dead);
    ensure(fd);
    auto crash = names::transition("crash", m, j);
    net.add_transition(crash).add_input(crash, r).add_output(crash, dead).add_output(crash, fd);
    auto cont = names::transition("continue", m, j);
    net.add_transition(cont).add_input(cont, names::place("available", m)).add_input(cont, fd);
    net.add_output(cont, r);
  }
  return net;
}

/// Clients and machines composed for any number of jobs, with the optional
/// extensions requested in the parameters.
inline tpn::Net build_model(const CatalogParams& p) {
  auto net = detail::compose(p);
  if (p.zeroconf) net = add_zeroconf(std::move(net));
  if (p.failure_detector) net = add_failure_detector(std::move(net));
  return net;
}

inline tpn::Net build_client_net(const CatalogParams& p) {
  if (p.jobs.size() != 1) throw std::invalid_argument("the client net models exactly one job");
  return build_model(p);
}

inline tpn::Net build_two_clients(const CatalogParams& p) {
  if (p.jobs.size() != 2) throw std::invalid_argument("the concurrent-client net models exactly two jobs");
  return build_model(p);
}

/// Complete model, by default four machines and one job using all of them.
inline CatalogParams full_defaults(bool failure_detector = false) {
  auto p = CatalogParams::with_demands(4, {4});
  p.failure_detector = failure_detector;
  return p;
}

inline tpn::Net build_full(const CatalogParams& p = full_defaults()) { return build_model(p); }

struct ColoredModel {
  colored::ColoredNet net;
  colored::ColorUniverse universe;
};

/// The colored model over the machines and jobs of `p`.
inline ColoredModel build_colored(const CatalogParams& p) {
  using colored::Multiplicity;
  using colored::Pattern;
  using colored::Sort;
  p.check();
  const colored::Inscription m{Pattern::m, Multiplicity::one};
  const colored::Inscription j{Pattern::j, Multiplicity::one};
  const colored::Inscription mj{Pattern::mj, Multiplicity::one};
  const colored::Inscription jn{Pattern::j, Multiplicity::demand};

  colored::ColoredNet net;
  net.add_place("begin", Sort::job, true)
      .add_place("get_nodes", Sort::job)
      .add_place("answered", Sort::job)
      .add_place("launching_job", Sort::job)
      .add_place("job_finished", Sort::job)
      .add_place("job_done", Sort::job)
      .add_place("available", Sort::machine, true)
      .add_place("reserved", Sort::pair)
      .add_place("running", Sort::pair)
      .add_place("finished", Sort::pair);

  net.add_transition("start_job").add_input("start_job", "begin", j).add_output("start_job", "get_nodes", jn);
  net.add_transition("launch").add_input("launch", "answered", jn).add_output("launch", "launching_job", jn);
  net.add_transition("t1").add_input("t1", "available", m).add_input("t1", "get_nodes", j);
  net.add_output("t1", "reserved", mj).add_output("t1", "answered", j);
  if (auto cancel = p.cancel_interval()) {
    net.add_transition("cancel", *cancel).add_input("cancel", "reserved", mj).add_input("cancel", "answered", j);
    net.add_output("cancel", "available", m);
    if (p.semantics == Semantics::wait) net.add_output("cancel", "get_nodes", j);
  }
  net.add_transition("t2").add_input("t2", "reserved", mj).add_input("t2", "launching_job", j);
  net.add_output("t2", "running", mj);
  net.add_transition("t3").add_input("t3", "running", mj).add_output("t3", "finished", mj);
  net.add_transition("t4").add_input("t4", "finished", mj).add_output("t4", "available", m);
  net.add_output("t4", "job_finished", j);
  net.add_transition("t5").add_input("t5", "job_finished", jn).add_output("t5", "job_done", j);

  if (p.zeroconf) {
    net.add_place("not_available", Sort::machine);
    net.add_transition("publish").add_input("publish", "not_available", m).add_output("publish", "available", m);
    net.add_transition("unpublish").add_input("unpublish", "available", m).add_output("unpublish", "not_available", m);
  }
  if (p.failure_detector) {
    net.add_place("failure_detector", Sort::job).add_place("dead", Sort::machine);
    net.add_transition("crash").add_input("crash", "running", mj);
    net.add_output("crash", "dead", m).add_output("crash", "failure_detector", j);
    // Output is <m,j>, not <j>: running holds pairs.
    net.add_transition("continue").add_input("continue", "available", m).add_input("continue", "failure_detector", j);
    net.add_output("continue", "running", mj);
  }
  return {std::move(net), p.universe()};
}

/// Place indices the safety properties range over.
struct Layout {
  std::vector<std::string> machines;
  std::vector<std::string> jobs;
  std::vector<std::vector<std::size_t>> machine_states;  // every place holding machine m's token
  std::vector<std::vector<std::size_t>> machine_pairs;   // reserved/running/finished of m, all jobs
  std::vector<std::size_t> answered;
  std::vector<std::size_t> job_done;
};

inline Layout layout(const tpn::IndexedNet& net, const CatalogParams& p) {
  Layout out;
  out.machines = p.machine_ids();
  for (const auto& j : p.jobs) out.jobs.push_back(j.id);
  auto maybe = [&](const std::string& name, std::vector<std::size_t>& into) {
    if (auto idx = net.net().place_index(name)) into.push_back(*idx);
  };
  for (const auto& m : out.machines) {
    std::vector<std::size_t> states, pairs;
    maybe(names::place("available", m), states);
    maybe(names::place("not_available", m), states);
    maybe(names::place("dead", m), states);
    for (const auto& j : out.jobs)
      for (const char* base : {"reserved", "running", "finished"}) maybe(names::place(base, m, j), pairs);
    states.insert(states.end(), pairs.begin(), pairs.end());
    out.machine_states.push_back(std::move(states));
    out.machine_pairs.push_back(std::move(pairs));
  }
  for (const auto& j : out.jobs) {
    out.answered.push_back(net.place(names::place("answered", j)));
    out.job_done.push_back(net.place(names::place("job_done", j)));
  }
  return out;
}

} // namespace qurd::catalog
