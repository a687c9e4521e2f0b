#pragma once

// Graphviz text for nets, colored nets and reachability graphs. Nodes and
// edges come out in builder (or BFS) order, so equal inputs give equal bytes.

#include "analysis.hpp"
#include "colored.hpp"
#include "tpn.hpp"

#include <sstream>
#include <stdexcept>
#include <string>

namespace qurd::dot {

inline constexpr std::size_t kMaxReachStates = 10'000;

class TooLarge : public std::runtime_error {
public:
  explicit TooLarge(std::size_t states)
      : std::runtime_error("reachability graph has " + std::to_string(states) + " states; export is limited to " +
                           std::to_string(kMaxReachStates)) {}
};

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string interval(const tpn::Interval& i) {
  std::string hi = i.lfd ? std::to_string(*i.lfd) + "]" : "inf)";
  return "[" + std::to_string(i.efd) + "," + hi;
}

inline bool default_interval(const tpn::Interval& i) { return i.efd == 0 && !i.lfd; }

inline std::string to_dot(const tpn::Net& net, const std::string& name = "net") {
  std::ostringstream out;
  out << "digraph " << quote(name) << " {\n  rankdir=LR;\n";
  for (std::size_t p = 0; p < net.places().size(); ++p) {
    auto tokens = net.initial_tokens()[p];
    std::string label = net.places()[p] + (tokens ? "\\n" + std::to_string(tokens) : "");
    out << "  " << quote(net.places()[p]) << " [shape=circle,label=\"" << label << "\"];\n";
  }
  for (const auto& t : net.transitions()) {
    std::string label = t.name + (default_interval(t.interval) ? "" : "\\n" + interval(t.interval));
    out << "  " << quote(t.name) << " [shape=box,label=\"" << label << "\"];\n";
  }
  auto arc = [&](const std::string& from, const std::string& to, std::uint32_t w) {
    out << "  " << quote(from) << " -> " << quote(to);
    if (w != 1) out << " [label=\"" << w << "\"]";
    out << ";\n";
  };
  for (const auto& t : net.transitions()) {
    for (const auto& a : t.pre) arc(a.place, t.name, a.weight);
    for (const auto& a : t.post) arc(t.name, a.place, a.weight);
  }
  out << "}\n";
  return out.str();
}

inline std::string inscription(const colored::Inscription& ins) {
  std::string var;
  switch (ins.pattern) {
  case colored::Pattern::m: var = "<m>"; break;
  case colored::Pattern::j: var = "<j>"; break;
  case colored::Pattern::mj: var = "<m,j>"; break;
  }
  return ins.multiplicity == colored::Multiplicity::demand ? "demand(j)*" + var : var;
}

inline const char* sort_name(colored::Sort s) {
  switch (s) {
  case colored::Sort::job: return "J";
  case colored::Sort::machine: return "M";
  case colored::Sort::pair: return "MxJ";
  }
  return "?";
}

inline std::string to_dot(const colored::ColoredNet& net, const std::string& name = "colored") {
  std::ostringstream out;
  out << "digraph " << quote(name) << " {\n  rankdir=LR;\n";
  for (const auto& p : net.places()) {
    std::string label = p.name + " : " + sort_name(p.sort) + (p.initially_full ? "\\nall" : "");
    out << "  " << quote(p.name) << " [shape=circle,label=" << quote(label) << "];\n";
  }
  for (const auto& t : net.transitions()) {
    std::string label = t.name + (default_interval(t.interval) ? "" : "\\n" + interval(t.interval));
    out << "  " << quote(t.name) << " [shape=box,label=\"" << label << "\"];\n";
  }
  for (const auto& t : net.transitions()) {
    for (const auto& a : t.pre)
      out << "  " << quote(a.place) << " -> " << quote(t.name) << " [label=" << quote(inscription(a.inscription)) << "];\n";
    for (const auto& a : t.post)
      out << "  " << quote(t.name) << " -> " << quote(a.place) << " [label=" << quote(inscription(a.inscription)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

/// Nodes list the marked places; edges read `delay/transition`.
inline std::string to_dot(const tpn::IndexedNet& net, const analysis::ReachGraph& g, const std::string& name = "reach") {
  if (g.size() > kMaxReachStates) throw TooLarge(g.size());
  if (g.truncated) throw analysis::Truncated(g.bound);
  std::ostringstream out;
  out << "digraph " << quote(name) << " {\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::string label = "s" + std::to_string(i);
    const auto& counts = g.states[i].marking.counts;
    for (std::size_t p = 0; p < counts.size(); ++p) {
      if (!counts[p]) continue;
      label += "\\n" + net.place_name(p);
      if (counts[p] != 1) label += "=" + std::to_string(counts[p]);
    }
    out << "  s" << i << " [shape=" << (g.edges[i].empty() ? "doublecircle" : "ellipse") << ",label=" << quote(label)
        << "];\n";
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    for (const auto& e : g.edges[i])
      out << "  s" << i << " -> s" << e.target << " [label="
          << quote(std::to_string(e.label.delay) + "/" + net.transition_name(e.label.transition)) << "];\n";
  out << "}\n";
  return out.str();
}

} // namespace qurd::dot
