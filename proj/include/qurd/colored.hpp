#pragma once

// Colored Petri nets over two color classes: machines and jobs. Places hold
// tokens of one sort (<j>, <m> or <m,j>); arcs carry an inscription naming the
// variables consumed or produced, optionally repeated demand(j) times.

#include "naming.hpp"
#include "tpn.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qurd::colored {

enum class Sort { job, machine, pair };
enum class Pattern { m, j, mj };
enum class Multiplicity { one, demand };

inline Sort sort_of(Pattern p) {
  switch (p) {
  case Pattern::m: return Sort::machine;
  case Pattern::j: return Sort::job;
  case Pattern::mj: return Sort::pair;
  }
  return Sort::pair;
}

struct Inscription {
  Pattern pattern = Pattern::j;
  Multiplicity multiplicity = Multiplicity::one;
};

struct ColoredArc {
  std::string place;
  Inscription inscription;
};

struct ColoredTransition {
  std::string name;
  std::vector<ColoredArc> pre;
  std::vector<ColoredArc> post;
  tpn::Interval interval;

  bool uses_machine() const { return uses(true); }
  bool uses_job() const { return uses(false); }

private:
  bool uses(bool machine) const {
    auto hit = [&](const ColoredArc& a) {
      auto p = a.inscription.pattern;
      return p == Pattern::mj || (machine ? p == Pattern::m : p == Pattern::j);
    };
    return std::any_of(pre.begin(), pre.end(), hit) || std::any_of(post.begin(), post.end(), hit);
  }
};

struct ColoredPlace {
  std::string name;
  Sort sort;
  bool initially_full = false;  // one token of every color of the sort
};

struct ColorUniverse {
  std::vector<std::string> machines;
  std::vector<std::string> jobs;
  std::vector<std::uint32_t> demand;  // aligned with jobs

  void check() const {
    if (demand.size() != jobs.size()) throw std::invalid_argument("demand must be given for every job");
    std::set<std::string> ids(machines.begin(), machines.end());
    ids.insert(jobs.begin(), jobs.end());
    if (ids.size() != machines.size() + jobs.size()) throw std::invalid_argument("color ids must be unique");
    for (auto d : demand)
      if (d == 0) throw std::invalid_argument("demand must be at least 1");
  }

  std::optional<std::size_t> machine_index(std::string_view id) const { return find(machines, id); }
  std::optional<std::size_t> job_index(std::string_view id) const { return find(jobs, id); }

private:
  static std::optional<std::size_t> find(const std::vector<std::string>& v, std::string_view id) {
    auto it = std::find(v.begin(), v.end(), id);
    if (it == v.end()) return std::nullopt;
    return static_cast<std::size_t>(it - v.begin());
  }
};

struct Token {
  std::int32_t machine = -1;
  std::int32_t job = -1;

  auto operator<=>(const Token&) const = default;
};

struct Binding {
  std::optional<std::size_t> machine;
  std::optional<std::size_t> job;

  bool operator==(const Binding&) const = default;
};

/// Per place, a multiset of tokens (absent = 0).
struct ColoredMarking {
  std::vector<std::map<Token, std::uint32_t>> places;

  std::uint32_t count(std::size_t place, Token tok) const {
    auto it = places[place].find(tok);
    return it == places[place].end() ? 0 : it->second;
  }
  bool operator==(const ColoredMarking&) const = default;
  auto operator<=>(const ColoredMarking&) const = default;
};

class ColoredNet {
public:
  ColoredNet& add_place(std::string name, Sort sort, bool initially_full = false) {
    ids_.emplace(name, places_.size());
    places_.push_back({std::move(name), sort, initially_full});
    return *this;
  }
  ColoredNet& add_transition(std::string name, tpn::Interval interval = {}) {
    tids_.emplace(name, transitions_.size());
    transitions_.push_back({std::move(name), {}, {}, interval});
    return *this;
  }
  ColoredNet& add_input(std::string_view t, std::string place, Inscription ins) {
    at(t).pre.push_back({std::move(place), ins});
    return *this;
  }
  ColoredNet& add_output(std::string_view t, std::string place, Inscription ins) {
    at(t).post.push_back({std::move(place), ins});
    return *this;
  }

  const std::vector<ColoredPlace>& places() const { return places_; }
  const std::vector<ColoredTransition>& transitions() const { return transitions_; }

  std::size_t place(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) throw std::out_of_range("unknown colored place: " + std::string(name));
    return it->second;
  }
  std::optional<std::size_t> find_place(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t transition(std::string_view name) const {
    auto it = tids_.find(std::string(name));
    if (it == tids_.end()) throw std::out_of_range("unknown colored transition: " + std::string(name));
    return it->second;
  }
  bool has_transition(std::string_view name) const { return tids_.count(std::string(name)) != 0; }

  /// Sort and inscription problems, empty when well-formed.
  std::vector<std::string> validate() const {
    std::vector<std::string> out;
    for (const auto& t : transitions_) {
      auto check = [&](const ColoredArc& a) {
        auto it = ids_.find(a.place);
        if (it == ids_.end()) {
          out.push_back("unknown place " + a.place + " on " + t.name);
          return;
        }
        if (sort_of(a.inscription.pattern) != places_[it->second].sort)
          out.push_back("sort mismatch on arc " + t.name + "/" + a.place);
        if (a.inscription.multiplicity == Multiplicity::demand && a.inscription.pattern != Pattern::j)
          out.push_back("demand multiplicity on a non-job inscription " + t.name + "/" + a.place);
      };
      for (const auto& a : t.pre) check(a);
      for (const auto& a : t.post) check(a);
      if (t.interval.lfd && t.interval.efd > *t.interval.lfd) out.push_back("efd > lfd on " + t.name);
    }
    return out;
  }

  ColoredMarking initial_marking(const ColorUniverse& u) const {
    ColoredMarking m{std::vector<std::map<Token, std::uint32_t>>(places_.size())};
    for (std::size_t p = 0; p < places_.size(); ++p) {
      if (!places_[p].initially_full) continue;
      for (const auto& tok : colors(places_[p].sort, u)) m.places[p][tok] = 1;
    }
    return m;
  }

  /// Every color of a sort, machines-major for pairs.
  static std::vector<Token> colors(Sort s, const ColorUniverse& u) {
    std::vector<Token> out;
    auto nm = static_cast<std::int32_t>(u.machines.size());
    auto nj = static_cast<std::int32_t>(u.jobs.size());
    switch (s) {
    case Sort::machine:
      for (std::int32_t m = 0; m < nm; ++m) out.push_back({m, -1});
      break;
    case Sort::job:
      for (std::int32_t j = 0; j < nj; ++j) out.push_back({-1, j});
      break;
    case Sort::pair:
      for (std::int32_t m = 0; m < nm; ++m)
        for (std::int32_t j = 0; j < nj; ++j) out.push_back({m, j});
      break;
    }
    return out;
  }

private:
  ColoredTransition& at(std::string_view t) {
    auto it = tids_.find(std::string(t));
    if (it == tids_.end()) throw std::out_of_range("unknown colored transition: " + std::string(t));
    return transitions_[it->second];
  }

  std::vector<ColoredPlace> places_;
  std::vector<ColoredTransition> transitions_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::unordered_map<std::string, std::size_t> tids_;
};

/// Bindings of every variable the transition mentions, ordered (machine, job).
inline std::vector<Binding> bindings(const ColoredTransition& t, const ColorUniverse& u) {
  std::vector<std::optional<std::size_t>> ms{std::nullopt};
  std::vector<std::optional<std::size_t>> js{std::nullopt};
  if (t.uses_machine()) {
    ms.clear();
    for (std::size_t m = 0; m < u.machines.size(); ++m) ms.push_back(m);
  }
  if (t.uses_job()) {
    js.clear();
    for (std::size_t j = 0; j < u.jobs.size(); ++j) js.push_back(j);
  }
  std::vector<Binding> out;
  for (auto m : ms)
    for (auto j : js) out.push_back({m, j});
  return out;
}

inline Token instantiate(Pattern p, const Binding& b) {
  auto m = b.machine ? static_cast<std::int32_t>(*b.machine) : -1;
  auto j = b.job ? static_cast<std::int32_t>(*b.job) : -1;
  switch (p) {
  case Pattern::m: return {m, -1};
  case Pattern::j: return {-1, j};
  case Pattern::mj: return {m, j};
  }
  return {};
}

inline std::uint32_t multiplicity(const Inscription& ins, const Binding& b, const ColorUniverse& u) {
  if (ins.multiplicity == Multiplicity::one) return 1;
  return u.demand.at(*b.job);
}

/// Instantiated arc multiset, merged per (place, token).
inline std::map<std::pair<std::size_t, Token>, std::uint32_t> instantiate_arcs(const ColoredNet& net,
                                                                                const std::vector<ColoredArc>& arcs,
                                                                                const Binding& b,
                                                                                const ColorUniverse& u) {
  std::map<std::pair<std::size_t, Token>, std::uint32_t> out;
  for (const auto& a : arcs) {
    auto w = multiplicity(a.inscription, b, u);
    if (w == 0) continue;
    out[{net.place(a.place), instantiate(a.inscription.pattern, b)}] += w;
  }
  return out;
}

inline bool colored_is_enabled(const ColoredNet& net, const ColorUniverse& u, const ColoredMarking& cm, std::size_t t,
                               const Binding& b) {
  for (const auto& [key, w] : instantiate_arcs(net, net.transitions()[t].pre, b, u))
    if (cm.count(key.first, key.second) < w) return false;
  return true;
}

inline std::vector<std::pair<std::size_t, Binding>> colored_enabled(const ColoredNet& net, const ColorUniverse& u,
                                                                    const ColoredMarking& cm) {
  std::vector<std::pair<std::size_t, Binding>> out;
  for (std::size_t t = 0; t < net.transitions().size(); ++t)
    for (const auto& b : bindings(net.transitions()[t], u))
      if (colored_is_enabled(net, u, cm, t, b)) out.emplace_back(t, b);
  return out;
}

inline std::string binding_label(const ColoredNet& net, const ColorUniverse& u, std::size_t t, const Binding& b) {
  const auto& name = net.transitions()[t].name;
  if (b.machine && b.job) return names::transition(name, u.machines[*b.machine], u.jobs[*b.job]);
  if (b.machine) return names::transition(name, u.machines[*b.machine]);
  if (b.job) return names::transition(name, u.jobs[*b.job]);
  return name;
}

inline ColoredMarking colored_fire(const ColoredNet& net, const ColorUniverse& u, const ColoredMarking& cm,
                                   std::size_t t, const Binding& b) {
  if (!colored_is_enabled(net, u, cm, t, b)) throw tpn::NotFireable(binding_label(net, u, t, b));
  ColoredMarking out = cm;
  for (const auto& [key, w] : instantiate_arcs(net, net.transitions()[t].pre, b, u)) {
    auto& bag = out.places[key.first];
    auto it = bag.find(key.second);
    it->second -= w;
    if (it->second == 0) bag.erase(it);
  }
  for (const auto& [key, w] : instantiate_arcs(net, net.transitions()[t].post, b, u)) out.places[key.first][key.second] += w;
  return out;
}

inline std::string color_name(Sort s, Token tok, const ColorUniverse& u) {
  switch (s) {
  case Sort::machine: return u.machines[tok.machine];
  case Sort::job: return u.jobs[tok.job];
  case Sort::pair: return "(" + u.machines[tok.machine] + "," + u.jobs[tok.job] + ")";
  }
  return {};
}

inline std::string unfolded_place(const ColoredNet& net, std::size_t p, Token tok, const ColorUniverse& u) {
  const auto& cp = net.places()[p];
  return cp.name + "." + color_name(cp.sort, tok, u);
}

/// Plain net with one place per (place, color) and one transition per
/// (transition, binding).
inline tpn::Net unfold(const ColoredNet& net, const ColorUniverse& u) {
  u.check();
  tpn::Net out;
  auto init = net.initial_marking(u);
  for (std::size_t p = 0; p < net.places().size(); ++p)
    for (const auto& tok : ColoredNet::colors(net.places()[p].sort, u))
      out.add_place(unfolded_place(net, p, tok, u), init.count(p, tok));
  for (std::size_t t = 0; t < net.transitions().size(); ++t) {
    const auto& ct = net.transitions()[t];
    for (const auto& b : bindings(ct, u)) {
      auto name = binding_label(net, u, t, b);
      out.add_transition(name, ct.interval);
      for (const auto& [key, w] : instantiate_arcs(net, ct.pre, b, u))
        out.add_input(name, unfolded_place(net, key.first, key.second, u), w);
      for (const auto& [key, w] : instantiate_arcs(net, ct.post, b, u))
        out.add_output(name, unfolded_place(net, key.first, key.second, u), w);
    }
  }
  return out;
}

/// Unfolded-place view of a colored marking: place name -> count, zeros omitted.
inline std::map<std::string, std::uint32_t> flatten(const ColoredNet& net, const ColorUniverse& u,
                                                    const ColoredMarking& cm) {
  std::map<std::string, std::uint32_t> out;
  for (std::size_t p = 0; p < cm.places.size(); ++p)
    for (const auto& [tok, n] : cm.places[p])
      if (n) out[unfolded_place(net, p, tok, u)] = n;
  return out;
}

struct ColoredEdge {
  std::size_t transition;
  Binding binding;
  std::size_t target;
};

/// Untimed reachability graph of a colored net.
struct ColoredGraph {
  std::vector<ColoredMarking> markings;
  std::vector<std::vector<ColoredEdge>> edges;
  bool truncated = false;
};

inline ColoredGraph explore_colored(const ColoredNet& net, const ColorUniverse& u, std::size_t bound = 2'000'000) {
  ColoredGraph g;
  std::map<ColoredMarking, std::size_t> index;
  auto add = [&](ColoredMarking m) -> std::pair<std::size_t, bool> {
    auto [it, fresh] = index.emplace(m, g.markings.size());
    if (fresh) {
      g.markings.push_back(std::move(m));
      g.edges.emplace_back();
    }
    return {it->second, fresh};
  };
  add(net.initial_marking(u));
  for (std::size_t i = 0; i < g.markings.size(); ++i) {
    for (const auto& [t, b] : colored_enabled(net, u, g.markings[i])) {
      auto next = colored_fire(net, u, g.markings[i], t, b);
      if (!index.count(next) && g.markings.size() >= bound) {
        g.truncated = true;
        continue;
      }
      auto [id, fresh] = add(std::move(next));
      (void)fresh;
      g.edges[i].push_back({t, b, id});
    }
  }
  return g;
}

} // namespace qurd::colored
