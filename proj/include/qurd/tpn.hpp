#pragma once

// Place/transition Time Petri nets with integer time and strong (urgent)
// firing semantics.
//
// A `Net` is the named, editable description produced by builders. It may be
// ill-formed; `validate` reports every problem as data. An `IndexedNet` is the
// resolved form used by the semantic operations: it can only be built from a
// well-formed `Net`.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qurd::tpn {

/// Static firing interval [efd, lfd]. An empty `lfd` means infinity.
struct Interval {
  std::uint32_t efd = 0;
  std::optional<std::uint32_t> lfd;

  static Interval unbounded(std::uint32_t efd = 0) { return {efd, std::nullopt}; }
  static Interval closed(std::uint32_t efd, std::uint32_t lfd) { return {efd, lfd}; }

  bool operator==(const Interval&) const = default;
};

struct Arc {
  std::string place;
  std::uint32_t weight = 1;

  auto operator<=>(const Arc&) const = default;
};

struct Transition {
  std::string name;
  std::vector<Arc> pre;
  std::vector<Arc> post;
  Interval interval;
};

class Net {
public:
  Net& add_place(std::string name, std::uint32_t initial_tokens = 0) {
    place_ids_.emplace(name, places_.size());
    places_.push_back(std::move(name));
    initial_.push_back(initial_tokens);
    return *this;
  }

  Net& add_transition(std::string name, Interval interval = {}) {
    transition_ids_.emplace(name, transitions_.size());
    transitions_.push_back(Transition{std::move(name), {}, {}, interval});
    return *this;
  }

  /// Arc place -> transition. The place is not checked here (see validate).
  Net& add_input(std::string_view transition, std::string place, std::uint32_t weight = 1) {
    if (weight == 0 && !keep_zero_weights_) return *this;
    at(transition).pre.push_back(Arc{std::move(place), weight});
    return *this;
  }

  /// Arc transition -> place.
  Net& add_output(std::string_view transition, std::string place, std::uint32_t weight = 1) {
    if (weight == 0 && !keep_zero_weights_) return *this;
    at(transition).post.push_back(Arc{std::move(place), weight});
    return *this;
  }

  void set_interval(std::string_view transition, Interval interval) { at(transition).interval = interval; }
  void set_initial(std::string_view place, std::uint32_t tokens) {
    auto it = place_ids_.find(std::string(place));
    if (it == place_ids_.end()) throw std::out_of_range("unknown place: " + std::string(place));
    initial_[it->second] = tokens;
  }

  // Zero-weight arcs are normally dropped on insertion; tests that need an
  // ill-formed net can keep them.
  void keep_zero_weights(bool keep) { keep_zero_weights_ = keep; }

  const std::vector<std::string>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<std::uint32_t>& initial_tokens() const { return initial_; }

  std::optional<std::size_t> place_index(std::string_view name) const {
    auto it = place_ids_.find(std::string(name));
    if (it == place_ids_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> transition_index(std::string_view name) const {
    auto it = transition_ids_.find(std::string(name));
    if (it == transition_ids_.end()) return std::nullopt;
    return it->second;
  }
  bool has_transition(std::string_view name) const { return transition_index(name).has_value(); }

  Transition& transition(std::string_view name) { return at(name); }
  const Transition& transition(std::string_view name) const {
    return transitions_.at(transition_ids_.at(std::string(name)));
  }

private:
  Transition& at(std::string_view name) {
    auto it = transition_ids_.find(std::string(name));
    if (it == transition_ids_.end()) throw std::out_of_range("unknown transition: " + std::string(name));
    return transitions_[it->second];
  }

  std::vector<std::string> places_;
  std::vector<std::uint32_t> initial_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::string, std::size_t> place_ids_;
  std::unordered_map<std::string, std::size_t> transition_ids_;
  bool keep_zero_weights_ = false;
};

enum class ViolationKind { unknown_place, bad_interval, zero_weight, duplicate_name, name_clash };

struct Violation {
  ViolationKind kind;
  std::string message;
};

inline std::vector<Violation> validate(const Net& net) {
  std::vector<Violation> out;
  std::set<std::string> places;
  for (const auto& p : net.places()) {
    if (!places.insert(p).second) out.push_back({ViolationKind::duplicate_name, "duplicate place " + p});
  }
  std::set<std::string> transitions;
  for (const auto& t : net.transitions()) {
    if (!transitions.insert(t.name).second)
      out.push_back({ViolationKind::duplicate_name, "duplicate transition " + t.name});
    if (places.count(t.name))
      out.push_back({ViolationKind::name_clash, "name used by both a place and a transition: " + t.name});
    if (t.interval.lfd && t.interval.efd > *t.interval.lfd)
      out.push_back({ViolationKind::bad_interval, "efd > lfd on transition " + t.name});
    auto check_arcs = [&](const std::vector<Arc>& arcs) {
      for (const auto& a : arcs) {
        if (!places.count(a.place))
          out.push_back({ViolationKind::unknown_place, "unknown place " + a.place + " on transition " + t.name});
        if (a.weight == 0)
          out.push_back({ViolationKind::zero_weight, "zero weight arc " + a.place + " on transition " + t.name});
      }
    };
    check_arcs(t.pre);
    check_arcs(t.post);
  }
  return out;
}

class InvalidNet : public std::invalid_argument {
public:
  explicit InvalidNet(std::vector<Violation> violations)
      : std::invalid_argument("invalid net: " + (violations.empty() ? std::string() : violations.front().message)),
        violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

private:
  std::vector<Violation> violations_;
};

class NotFireable : public std::runtime_error {
public:
  explicit NotFireable(std::string transition)
      : std::runtime_error("transition not fireable: " + transition), transition_(std::move(transition)) {}
  const std::string& transition() const { return transition_; }

private:
  std::string transition_;
};

class UrgencyViolation : public std::runtime_error {
public:
  explicit UrgencyViolation(std::string transition)
      : std::runtime_error("time may not pass the deadline of " + transition), transition_(std::move(transition)) {}
  const std::string& transition() const { return transition_; }

private:
  std::string transition_;
};

/// Token counts indexed by place position in the owning net.
struct Marking {
  std::vector<std::uint32_t> counts;

  std::uint32_t operator[](std::size_t place) const { return counts[place]; }
  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
  bool covers(const Marking& other) const {
    for (std::size_t i = 0; i < counts.size(); ++i)
      if (counts[i] < other.counts[i]) return false;
    return true;
  }
  bool operator==(const Marking&) const = default;
  auto operator<=>(const Marking&) const = default;
};

inline constexpr std::int32_t kDisabled = -1;

/// Marking plus one clock per enabled transition. Disabled transitions hold
/// kDisabled; enabled ones hold a value in [0, cap].
struct TimedState {
  Marking marking;
  std::vector<std::int32_t> clocks;
  std::uint32_t cap = 1;

  std::optional<std::uint32_t> clock(std::size_t t) const {
    if (clocks[t] == kDisabled) return std::nullopt;
    return static_cast<std::uint32_t>(clocks[t]);
  }
  bool operator==(const TimedState&) const = default;
  auto operator<=>(const TimedState&) const = default;
};

struct IndexedArc {
  std::size_t place;
  std::uint32_t weight;
};

/// Resolved view of a well-formed Net.
class IndexedNet {
public:
  explicit IndexedNet(Net net) : net_(std::move(net)) {
    auto violations = validate(net_);
    if (!violations.empty()) throw InvalidNet(std::move(violations));
    const auto& ts = net_.transitions();
    pre_.resize(ts.size());
    post_.resize(ts.size());
    delta_.resize(ts.size());
    for (std::size_t t = 0; t < ts.size(); ++t) {
      std::map<std::size_t, std::int64_t> delta;
      auto resolve = [&](const std::vector<Arc>& arcs, std::vector<IndexedArc>& out, std::int64_t sign) {
        std::map<std::size_t, std::uint32_t> merged;
        for (const auto& a : arcs) merged[*net_.place_index(a.place)] += a.weight;
        for (auto [p, w] : merged) {
          out.push_back({p, w});
          delta[p] += sign * static_cast<std::int64_t>(w);
        }
      };
      resolve(ts[t].pre, pre_[t], -1);
      resolve(ts[t].post, post_[t], +1);
      for (auto [p, d] : delta)
        if (d != 0) delta_[t].emplace_back(p, d);
    }
    by_name_.resize(ts.size());
    std::iota(by_name_.begin(), by_name_.end(), std::size_t{0});
    std::sort(by_name_.begin(), by_name_.end(), [&](auto a, auto b) { return ts[a].name < ts[b].name; });
  }

  const Net& net() const { return net_; }
  std::size_t place_count() const { return net_.places().size(); }
  std::size_t transition_count() const { return net_.transitions().size(); }
  const std::string& place_name(std::size_t p) const { return net_.places()[p]; }
  const std::string& transition_name(std::size_t t) const { return net_.transitions()[t].name; }
  const Interval& interval(std::size_t t) const { return net_.transitions()[t].interval; }
  const std::vector<IndexedArc>& pre(std::size_t t) const { return pre_[t]; }
  const std::vector<IndexedArc>& post(std::size_t t) const { return post_[t]; }
  /// Nonzero entries of the incidence column of t.
  const std::vector<std::pair<std::size_t, std::int64_t>>& incidence(std::size_t t) const { return delta_[t]; }
  /// Transition indices sorted by name.
  const std::vector<std::size_t>& name_order() const { return by_name_; }

  std::size_t place(std::string_view name) const {
    auto p = net_.place_index(name);
    if (!p) throw std::out_of_range("unknown place: " + std::string(name));
    return *p;
  }
  std::size_t transition(std::string_view name) const {
    auto t = net_.transition_index(name);
    if (!t) throw std::out_of_range("unknown transition: " + std::string(name));
    return *t;
  }

  Marking initial_marking() const { return Marking{net_.initial_tokens()}; }

  Marking marking(const std::map<std::string, std::uint32_t>& counts) const {
    Marking m{std::vector<std::uint32_t>(place_count(), 0)};
    for (const auto& [name, n] : counts) m.counts[place(name)] = n;
    return m;
  }

  /// 1 + the largest finite bound (efd or lfd) on any transition.
  std::uint32_t default_cap() const {
    std::uint32_t hi = 0;
    for (const auto& t : net_.transitions()) {
      hi = std::max(hi, t.interval.efd);
      if (t.interval.lfd) hi = std::max(hi, *t.interval.lfd);
    }
    return hi + 1;
  }

private:
  Net net_;
  std::vector<std::vector<IndexedArc>> pre_;
  std::vector<std::vector<IndexedArc>> post_;
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> delta_;
  std::vector<std::size_t> by_name_;
};

inline bool is_enabled(const IndexedNet& net, const Marking& m, std::size_t t) {
  for (const auto& a : net.pre(t))
    if (m[a.place] < a.weight) return false;
  return true;
}

inline std::vector<std::size_t> enabled(const IndexedNet& net, const Marking& m) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < net.transition_count(); ++t)
    if (is_enabled(net, m, t)) out.push_back(t);
  return out;
}

inline std::set<std::string> enabled_names(const IndexedNet& net, const Marking& m) {
  std::set<std::string> out;
  for (auto t : enabled(net, m)) out.insert(net.transition_name(t));
  return out;
}

inline TimedState make_state(const IndexedNet& net, Marking m, std::uint32_t cap) {
  std::uint32_t max_efd = 0;
  for (std::size_t t = 0; t < net.transition_count(); ++t) max_efd = std::max(max_efd, net.interval(t).efd);
  if (cap == 0 || cap < max_efd) throw std::invalid_argument("clock cap below the largest earliest firing delay");
  TimedState s{std::move(m), std::vector<std::int32_t>(net.transition_count(), kDisabled), cap};
  for (std::size_t t = 0; t < net.transition_count(); ++t)
    if (is_enabled(net, s.marking, t)) s.clocks[t] = 0;
  return s;
}

inline TimedState initial_state(const IndexedNet& net) { return make_state(net, net.initial_marking(), net.default_cap()); }

inline bool fireable(const IndexedNet& net, const TimedState& s, std::size_t t) {
  return s.clocks[t] != kDisabled && static_cast<std::uint32_t>(s.clocks[t]) >= net.interval(t).efd;
}

/// Largest delay admissible from s, or nullopt if time may pass forever.
inline std::optional<std::uint32_t> max_delay(const IndexedNet& net, const TimedState& s) {
  std::optional<std::uint32_t> out;
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    if (s.clocks[t] == kDisabled) continue;
    const auto& lfd = net.interval(t).lfd;
    if (!lfd) continue;
    auto c = static_cast<std::uint32_t>(s.clocks[t]);
    std::uint32_t room = *lfd > c ? *lfd - c : 0;
    out = out ? std::min(*out, room) : room;
  }
  return out;
}

inline TimedState elapse(const IndexedNet& net, const TimedState& s, std::uint32_t d) {
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    if (s.clocks[t] == kDisabled) continue;
    const auto& lfd = net.interval(t).lfd;
    if (lfd && static_cast<std::uint64_t>(s.clocks[t]) + d > *lfd) throw UrgencyViolation(net.transition_name(t));
  }
  TimedState out = s;
  for (auto& c : out.clocks) {
    if (c == kDisabled) continue;
    c = static_cast<std::int32_t>(std::min<std::uint64_t>(static_cast<std::uint64_t>(c) + d, s.cap));
  }
  return out;
}

/// Fires t. Transitions enabled in the intermediate marking (marking - pre(t))
/// and still enabled afterwards keep their clocks, except t itself; every
/// other enabled transition restarts at 0.
inline TimedState fire(const IndexedNet& net, const TimedState& s, std::size_t t) {
  if (!fireable(net, s, t)) throw NotFireable(net.transition_name(t));
  Marking mid = s.marking;
  for (const auto& a : net.pre(t)) mid.counts[a.place] -= a.weight;
  Marking next = mid;
  for (const auto& a : net.post(t)) next.counts[a.place] += a.weight;
  TimedState out{std::move(next), std::vector<std::int32_t>(net.transition_count(), kDisabled), s.cap};
  for (std::size_t u = 0; u < net.transition_count(); ++u) {
    if (!is_enabled(net, out.marking, u)) continue;
    bool persistent = u != t && s.clocks[u] != kDisabled && is_enabled(net, mid, u);
    out.clocks[u] = persistent ? s.clocks[u] : 0;
  }
  return out;
}

inline TimedState fire(const IndexedNet& net, const TimedState& s, std::string_view t) {
  return fire(net, s, net.transition(t));
}

/// Clamps each clock at the largest value its transition can tell apart:
/// lfd when finite, otherwise efd. States equal after this are
/// behaviourally equivalent.
inline TimedState extrapolate(const IndexedNet& net, TimedState s) {
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    if (s.clocks[t] == kDisabled) continue;
    const auto& iv = net.interval(t);
    auto limit = static_cast<std::int32_t>(iv.lfd ? *iv.lfd : iv.efd);
    s.clocks[t] = std::min(s.clocks[t], limit);
  }
  return s;
}

struct Label {
  std::uint32_t delay = 0;
  std::size_t transition = 0;

  bool operator==(const Label&) const = default;
};

struct Successor {
  Label label;
  TimedState state;
};

/// One-step expansion: every admissible delay followed by every transition
/// fireable after it. Ordered by (delay, transition name); a fired state that
/// already appeared for a smaller delay is not repeated.
///
/// With `abstract` set, successor states are extrapolated and delays stop as
/// soon as the extrapolated clocks stop changing.
inline std::vector<Successor> successors(const IndexedNet& net, const TimedState& s, bool abstract = false) {
  std::vector<Successor> out;
  bool any_enabled = false;
  std::uint32_t useful = 0;
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    if (s.clocks[t] == kDisabled) continue;
    any_enabled = true;
    std::uint32_t limit = s.cap;
    if (abstract) {
      const auto& iv = net.interval(t);
      limit = std::min(limit, iv.lfd ? *iv.lfd : iv.efd);
    }
    useful = std::max(useful, limit - std::min<std::uint32_t>(limit, static_cast<std::uint32_t>(s.clocks[t])));
  }
  if (!any_enabled) return out;
  if (auto bound = max_delay(net, s)) useful = std::min(useful, *bound);

  std::set<TimedState> seen;
  for (std::uint32_t d = 0; d <= useful; ++d) {
    TimedState waited = elapse(net, s, d);
    for (auto t : net.name_order()) {
      if (!fireable(net, waited, t)) continue;
      TimedState next = fire(net, waited, t);
      if (abstract) next = extrapolate(net, std::move(next));
      if (seen.insert(next).second) out.push_back({Label{d, t}, std::move(next)});
    }
  }
  return out;
}

/// Replays a labelled path; throws NotFireable / UrgencyViolation on failure.
inline TimedState replay(const IndexedNet& net, TimedState s, const std::vector<Label>& path) {
  for (const auto& step : path) s = fire(net, elapse(net, s, step.delay), step.transition);
  return s;
}

} // namespace qurd::tpn
