#pragma once

// Explicit-state reachability over Time Petri nets and the property checks
// run on the resulting graph.

#include "tpn.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qurd::analysis {

inline constexpr std::size_t kDefaultBound = 2'000'000;

class Truncated : public std::runtime_error {
public:
  explicit Truncated(std::size_t bound)
      : std::runtime_error("exploration stopped at the state bound " + std::to_string(bound)), bound_(bound) {}
  std::size_t bound() const { return bound_; }

private:
  std::size_t bound_;
};

struct ExploreOptions {
  std::size_t bound = kDefaultBound;
  unsigned threads = 1;
  bool timed = true;        // false: plain marking graph, intervals ignored
  bool extrapolate = true;  // clamp clocks per transition (see tpn::extrapolate)
  std::optional<std::uint32_t> cap;  // clock cap; default IndexedNet::default_cap
};

struct Edge {
  tpn::Label label;
  std::size_t target;
};

/// States are numbered in BFS discovery order; state 0 is initial. Untimed
/// graphs store markings with an empty clock vector.
struct ReachGraph {
  std::vector<tpn::TimedState> states;
  std::vector<std::vector<Edge>> edges;
  std::vector<std::size_t> parent;
  std::vector<tpn::Label> parent_label;
  std::size_t initial = 0;
  bool truncated = false;
  std::size_t bound = kDefaultBound;
  bool timed = true;

  std::size_t size() const { return states.size(); }
  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& e : edges) n += e.size();
    return n;
  }
};

namespace detail {

struct KeyHash {
  std::size_t operator()(const std::vector<std::int32_t>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Places then clocks, both in builder order.
inline std::vector<std::int32_t> encode(const tpn::TimedState& s) {
  std::vector<std::int32_t> key;
  key.reserve(s.marking.counts.size() + s.clocks.size());
  for (auto c : s.marking.counts) key.push_back(static_cast<std::int32_t>(c));
  key.insert(key.end(), s.clocks.begin(), s.clocks.end());
  return key;
}

inline std::vector<tpn::Successor> untimed_successors(const tpn::IndexedNet& net, const tpn::TimedState& s) {
  std::vector<tpn::Successor> out;
  for (auto t : net.name_order()) {
    if (!tpn::is_enabled(net, s.marking, t)) continue;
    tpn::TimedState next{s.marking, {}, s.cap};
    for (const auto& a : net.pre(t)) next.marking.counts[a.place] -= a.weight;
    for (const auto& a : net.post(t)) next.marking.counts[a.place] += a.weight;
    out.push_back({tpn::Label{0, t}, std::move(next)});
  }
  return out;
}

} // namespace detail

/// Breadth-first closure of the successor relation, level by level. With
/// several threads the successor lists of a level are computed concurrently
/// and merged in frontier order, so the graph is identical to a sequential run.
inline ReachGraph explore(const tpn::IndexedNet& net, const ExploreOptions& opt = {}) {
  ReachGraph g;
  g.bound = opt.bound;
  g.timed = opt.timed;
  std::unordered_map<std::vector<std::int32_t>, std::size_t, detail::KeyHash> index;

  auto init = tpn::make_state(net, net.initial_marking(), opt.cap.value_or(net.default_cap()));
  if (!opt.timed) init.clocks.clear();
  else if (opt.extrapolate) init = tpn::extrapolate(net, std::move(init));
  index.emplace(detail::encode(init), 0);
  g.states.push_back(std::move(init));
  g.edges.emplace_back();
  g.parent.push_back(0);
  g.parent_label.push_back({});

  auto expand = [&](const tpn::TimedState& s) {
    return opt.timed ? tpn::successors(net, s, opt.extrapolate) : detail::untimed_successors(net, s);
  };

  std::size_t level_begin = 0;
  while (level_begin < g.states.size()) {
    std::size_t level_end = g.states.size();
    std::vector<std::vector<tpn::Successor>> succ(level_end - level_begin);
    unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(succ.size())));
    if (workers == 1) {
      for (std::size_t i = level_begin; i < level_end; ++i) succ[i - level_begin] = expand(g.states[i]);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t i = level_begin + w; i < level_end; i += workers) succ[i - level_begin] = expand(g.states[i]);
        });
      }
      for (auto& th : pool) th.join();
    }

    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (auto& [label, state] : succ[i - level_begin]) {
        auto key = detail::encode(state);
        auto it = index.find(key);
        std::size_t target;
        if (it != index.end()) {
          target = it->second;
        } else {
          if (g.states.size() >= opt.bound) {
            g.truncated = true;
            continue;
          }
          target = g.states.size();
          index.emplace(std::move(key), target);
          g.states.push_back(std::move(state));
          g.edges.emplace_back();
          g.parent.push_back(i);
          g.parent_label.push_back(label);
        }
        g.edges[i].push_back({label, target});
      }
    }
    level_begin = level_end;
  }
  return g;
}

/// BFS-tree path from the initial state to `state`.
inline std::vector<tpn::Label> path_to(const ReachGraph& g, std::size_t state) {
  std::vector<tpn::Label> out;
  while (state != g.initial) {
    out.push_back(g.parent_label[state]);
    state = g.parent[state];
  }
  std::reverse(out.begin(), out.end());
  return out;
}

/// Marking reached by replaying a witness from the initial configuration.
inline tpn::Marking replay_marking(const tpn::IndexedNet& net, const ReachGraph& g, const std::vector<tpn::Label>& path) {
  if (g.timed) return tpn::replay(net, tpn::initial_state(net), path).marking;
  auto m = net.initial_marking();
  for (const auto& step : path) {
    if (!tpn::is_enabled(net, m, step.transition)) throw tpn::NotFireable(net.transition_name(step.transition));
    for (const auto& a : net.pre(step.transition)) m.counts[a.place] -= a.weight;
    for (const auto& a : net.post(step.transition)) m.counts[a.place] += a.weight;
  }
  return m;
}

struct Verdict {
  std::string property;
  bool holds = false;
  std::vector<tpn::Label> witness;
  std::optional<std::size_t> witness_state;
  std::size_t states_explored = 0;

  bool operator==(const Verdict& o) const {
    return property == o.property && holds == o.holds && witness == o.witness && witness_state == o.witness_state &&
           states_explored == o.states_explored;
  }
};

using MarkingPredicate = std::function<bool(const tpn::Marking&)>;

/// Timed-dead states: no delay-then-fire step exists. States satisfying
/// `terminal` (proper termination) are excluded.
inline std::vector<std::size_t> find_deadlocks(const ReachGraph& g, const MarkingPredicate& terminal = {}) {
  if (g.truncated) throw Truncated(g.bound);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.edges[i].empty()) continue;
    if (terminal && terminal(g.states[i].marking)) continue;
    out.push_back(i);
  }
  return out;
}

inline Verdict deadlock_freedom(const ReachGraph& g, const MarkingPredicate& terminal = {}) {
  auto dead = find_deadlocks(g, terminal);
  Verdict v{"deadlock", dead.empty(), {}, std::nullopt, g.size()};
  if (!dead.empty()) {
    v.witness_state = dead.front();
    v.witness = path_to(g, dead.front());
  }
  return v;
}

inline Verdict check_invariant(const ReachGraph& g, const MarkingPredicate& predicate, std::string name = "invariant") {
  if (g.truncated) throw Truncated(g.bound);
  Verdict v{std::move(name), true, {}, std::nullopt, g.size()};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (predicate(g.states[i].marking)) continue;
    v.holds = false;
    v.witness_state = i;
    v.witness = path_to(g, i);
    break;
  }
  return v;
}

inline Verdict check_reachable(const ReachGraph& g, const MarkingPredicate& goal, std::string name = "reachable") {
  if (g.truncated) throw Truncated(g.bound);
  Verdict v{std::move(name), false, {}, std::nullopt, g.size()};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!goal(g.states[i].marking)) continue;
    v.holds = true;
    v.witness_state = i;
    v.witness = path_to(g, i);
    break;
  }
  return v;
}

/// Structural test C^T x = 0: the weighted token sum is unchanged by every
/// transition. Places missing from `weights` weigh 0.
inline bool check_p_invariant(const tpn::IndexedNet& net, const std::map<std::string, std::int64_t>& weights) {
  std::vector<std::int64_t> x(net.place_count(), 0);
  for (const auto& [name, w] : weights) x[net.place(name)] = w;
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    std::int64_t sum = 0;
    for (auto [p, d] : net.incidence(t)) sum += x[p] * d;
    if (sum != 0) return false;
  }
  return true;
}

inline std::set<tpn::Marking> reachable_markings(const ReachGraph& g) {
  std::set<tpn::Marking> out;
  for (const auto& s : g.states) out.insert(s.marking);
  return out;
}

} // namespace qurd::analysis
