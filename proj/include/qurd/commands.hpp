#pragma once

// The command-line operations as functions writing a report to a stream and
// returning the exit status: 0 when every check passes, 1 when one fails,
// 2 for bad input, 3 when exploration hits the state bound.

#include "analysis.hpp"
#include "catalog.hpp"
#include "conformance.hpp"
#include "dot.hpp"
#include "properties.hpp"
#include "proto.hpp"
#include "scenario.hpp"
#include "trace.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace qurd::cli {

enum Exit : int { ok = 0, failed = 1, bad_input = 2, truncated = 3 };

struct AnalyzeOptions {
  std::vector<std::string> properties;  // empty: all
  std::size_t bound = analysis::kDefaultBound;
  unsigned threads = 1;
  std::optional<std::string> witness_path;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

inline std::string witness_text(const tpn::IndexedNet& net, const analysis::ReachGraph& g, const analysis::Verdict& v) {
  std::ostringstream out;
  out << "# " << v.property << " witness, state s" << *v.witness_state << "\n";
  std::uint64_t t = 0;
  for (const auto& step : v.witness) {
    t += step.delay;
    out << "t=" << t << " " << net.transition_name(step.transition) << "\n";
  }
  out << "# marking:";
  const auto& counts = g.states[*v.witness_state].marking.counts;
  for (std::size_t p = 0; p < counts.size(); ++p)
    if (counts[p]) out << " " << net.place_name(p) << "=" << counts[p];
  out << "\n";
  return out.str();
}

/// Explores the catalog net of `sc` and reports each property.
inline int cmd_analyze(const proto::Scenario& sc, const AnalyzeOptions& opt, std::ostream& out) {
  auto props = opt.properties.empty() ? properties::all() : opt.properties;
  for (const auto& p : props) {
    if (std::find(properties::all().begin(), properties::all().end(), p) == properties::all().end()) {
      out << "error: unknown property " << p << "\n";
      return bad_input;
    }
  }
  catalog::CatalogParams params;
  try {
    params = sc.net_params();
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return bad_input;
  }
  tpn::IndexedNet net(catalog::build_model(params));
  auto l = catalog::layout(net, params);
  out << "analyze: " << scenario::digest(sc) << "\n";

  analysis::ExploreOptions eo;
  eo.bound = opt.bound;
  eo.threads = opt.threads;
  auto g = analysis::explore(net, eo);
  out << "states: " << g.size() << "\n";
  if (g.truncated) {
    out << "Truncated: exploration stopped at the state bound " << g.bound << "\n";
    return truncated;
  }

  int status = ok;
  std::string witnesses;
  for (const auto& name : props) {
    for (const auto& v : properties::check(name, net, g, l)) {
      if (name == properties::kDeadlock) {
        auto dead = analysis::find_deadlocks(g, properties::terminated(l));
        out << "deadlock: " << (v.holds ? "none" : "FOUND (" + std::to_string(dead.size()) + " dead states)") << "\n";
      } else {
        out << v.property << ": " << (v.holds ? "holds" : "VIOLATED") << "\n";
      }
      if (!v.holds) status = failed;
      // Counterexamples only; a reachability witness accompanies success.
      if (!v.holds && v.witness_state) witnesses += witness_text(net, g, v);
    }
  }
  if (!witnesses.empty()) {
    auto path = opt.witness_path.value_or("qurd-witness.txt");
    write_file(path, witnesses);
    out << "witness: " << path << "\n";
  }
  return status;
}

struct SimulateOptions {
  std::optional<std::string> trace_path;  // otherwise the trace follows the outcomes
};

inline int cmd_simulate(const scenario::ScenarioFile& file, const SimulateOptions& opt, std::ostream& out) {
  const auto& sc = file.scenario;
  auto r = proto::run(sc);
  out << "simulate: " << scenario::digest(sc) << "\n";
  int status = ok;
  for (std::size_t j = 0; j < r.outcomes.size(); ++j) {
    const auto& id = sc.params.jobs[j].id;
    auto expected = file.expected_outcome(id);
    out << id << ": " << proto::to_string(r.outcomes[j]);
    if (r.outcomes[j] != expected) {
      out << " (expected " << proto::to_string(expected) << ")";
      status = failed;
    }
    out << "\n";
  }
  out << "end: t=" << r.end_time << "\n";
  auto text = trace::format(r.trace);
  if (opt.trace_path) {
    write_file(*opt.trace_path, text);
    out << "trace: " << *opt.trace_path << "\n";
  } else {
    out << "\n" << text;
  }
  return status;
}

struct ConformanceOptions {
  std::optional<std::size_t> fuzz;
  std::uint64_t seed = 0;
  bool negative_control = false;
  std::optional<std::string> trace_path;  // replay this file instead of simulating
};

inline int cmd_conformance(const std::optional<proto::Scenario>& sc, const ConformanceOptions& opt, std::ostream& out) {
  if (opt.fuzz) {
    auto s = conformance::fuzz_conformance(*opt.fuzz, opt.seed);
    out << "conformance: " << s.passed << "/" << s.runs << " traces replay\n";
    for (const auto& f : s.failures) out << "  seed " << f.seed << ": " << f.reason << "\n";
    int status = s.ok() ? ok : failed;
    if (opt.negative_control) {
      auto neg = conformance::fuzz_conformance(*opt.fuzz, opt.seed,
                                               conformance::swapped(conformance::EventMap::standard(), "t1", "t2"));
      auto caught = neg.runs - neg.passed;
      out << "negative control (t1 <-> t2): " << caught << "/" << neg.runs << " diverge\n";
      if (caught == 0) status = failed;
    }
    return status;
  }
  if (!sc) {
    out << "error: conformance needs a scenario or --fuzz\n";
    return bad_input;
  }
  std::vector<trace::TraceEvent> events;
  if (opt.trace_path) {
    std::ifstream f(*opt.trace_path);
    if (!f) {
      out << "error: cannot read " << *opt.trace_path << "\n";
      return bad_input;
    }
    events = trace::parse(f);
  } else {
    events = proto::run(*sc).trace;
  }
  auto c = conformance::check_trace(events, *sc);
  out << "conformance: " << (c.ok ? "ok" : c.reason) << " (" << c.projected << " net steps)\n";
  return c.ok ? ok : failed;
}

inline const std::vector<std::string>& dot_selectors() {
  static const std::vector<std::string> s{"machine", "client", "two-clients", "full", "full-fd", "colored", "unfolded", "reach"};
  return s;
}

/// DOT text for one catalog net. Parameters come from `sc` when given.
inline std::string export_dot(const std::string& selector, const std::optional<proto::Scenario>& sc,
                              std::size_t bound = dot::kMaxReachStates + 1) {
  auto params = [&](catalog::CatalogParams fallback) { return sc ? sc->net_params() : fallback; };
  if (selector == "machine") {
    catalog::MachineOptions m;
    if (sc) {
      auto p = sc->net_params();
      m.timeout = p.timeout;
      m.semantics = p.semantics;
    }
    return dot::to_dot(catalog::build_machine(m), "machine");
  }
  if (selector == "client") return dot::to_dot(catalog::build_client_net(params(catalog::CatalogParams::with_demands(2, {2}))), "client");
  if (selector == "two-clients")
    return dot::to_dot(catalog::build_two_clients(params(catalog::CatalogParams::with_demands(3, {3, 2}))), "two-clients");
  if (selector == "full") return dot::to_dot(catalog::build_full(params(catalog::full_defaults(false))), "full");
  if (selector == "full-fd") {
    auto p = params(catalog::full_defaults(true));
    p.failure_detector = true;
    return dot::to_dot(catalog::build_full(p), "full-fd");
  }
  if (selector == "colored" || selector == "unfolded") {
    auto m = catalog::build_colored(params(catalog::CatalogParams::with_demands(2, {1, 1})));
    if (selector == "colored") return dot::to_dot(m.net, "colored");
    return dot::to_dot(colored::unfold(m.net, m.universe), "unfolded");
  }
  if (selector == "reach") {
    tpn::IndexedNet net(catalog::build_model(params(catalog::CatalogParams::with_demands(1, {1}))));
    analysis::ExploreOptions eo;
    eo.bound = bound;
    auto g = analysis::explore(net, eo);
    if (g.truncated) throw dot::TooLarge(g.size());
    return dot::to_dot(net, g, "reach");
  }
  throw std::invalid_argument("unknown net " + selector);
}

inline int cmd_export_dot(const std::string& selector, const std::optional<proto::Scenario>& sc,
                          const std::optional<std::string>& path, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = export_dot(selector, sc);
  } catch (const dot::TooLarge& e) {
    err << "error: " << e.what() << "\n";
    return failed;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return bad_input;
  }
  if (path) write_file(*path, text);
  else out << text;
  return ok;
}

} // namespace qurd::cli
