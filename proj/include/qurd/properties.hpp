#pragma once

// Marking predicates for the catalog nets and the named property checks the
// command line exposes.

#include "analysis.hpp"
#include "catalog.hpp"

#include <map>
#include <string>
#include <vector>

namespace qurd::properties {

inline constexpr const char* kDeadlock = "deadlock";
inline constexpr const char* kMutex = "mutex";
inline constexpr const char* kMachineInvariant = "machine-invariant";
inline constexpr const char* kJobDoneReachable = "job-done-reachable";

inline const std::vector<std::string>& all() {
  static const std::vector<std::string> names{kDeadlock, kMutex, kMachineInvariant, kJobDoneReachable};
  return names;
}

inline std::uint32_t sum(const tpn::Marking& m, const std::vector<std::size_t>& places) {
  std::uint32_t n = 0;
  for (auto p : places) n += m.counts[p];
  return n;
}

/// Every job has completed at least once: proper termination, not a deadlock.
inline analysis::MarkingPredicate terminated(const catalog::Layout& l) {
  return [l](const tpn::Marking& m) {
    for (auto p : l.job_done)
      if (m.counts[p] == 0) return false;
    return true;
  };
}

/// No machine holds reservations, runs or results for two jobs at once.
inline analysis::MarkingPredicate mutual_exclusion(const catalog::Layout& l) {
  return [l](const tpn::Marking& m) {
    for (const auto& pairs : l.machine_pairs)
      if (sum(m, pairs) > 1) return false;
    return true;
  };
}

/// Each machine's token sits in exactly one of its state places.
inline analysis::MarkingPredicate machine_invariant(const catalog::Layout& l) {
  return [l](const tpn::Marking& m) {
    for (const auto& states : l.machine_states)
      if (sum(m, states) != 1) return false;
    return true;
  };
}

inline analysis::MarkingPredicate job_done(const catalog::Layout& l, std::size_t job) {
  auto p = l.job_done.at(job);
  return [p](const tpn::Marking& m) { return m.counts[p] > 0; };
}

/// Weight vectors of the per-machine P-invariants, by place name.
inline std::vector<std::map<std::string, std::int64_t>> machine_weights(const tpn::IndexedNet& net,
                                                                       const catalog::Layout& l) {
  std::vector<std::map<std::string, std::int64_t>> out;
  for (const auto& states : l.machine_states) {
    std::map<std::string, std::int64_t> w;
    for (auto p : states) w[net.place_name(p)] = 1;
    out.push_back(std::move(w));
  }
  return out;
}

/// Runs one named property; several verdicts for per-job properties.
inline std::vector<analysis::Verdict> check(const std::string& name, const tpn::IndexedNet& net,
                                            const analysis::ReachGraph& g, const catalog::Layout& l) {
  if (name == kDeadlock) return {analysis::deadlock_freedom(g, terminated(l))};
  if (name == kMutex) return {analysis::check_invariant(g, mutual_exclusion(l), kMutex)};
  if (name == kMachineInvariant) {
    auto v = analysis::check_invariant(g, machine_invariant(l), kMachineInvariant);
    for (const auto& w : machine_weights(net, l))
      if (!analysis::check_p_invariant(net, w)) v.holds = false;
    return {v};
  }
  if (name == kJobDoneReachable) {
    std::vector<analysis::Verdict> out;
    for (std::size_t j = 0; j < l.jobs.size(); ++j)
      out.push_back(analysis::check_reachable(g, job_done(l, j), std::string(kJobDoneReachable) + " " + l.jobs[j]));
    return out;
  }
  throw std::invalid_argument("unknown property " + name);
}

} // namespace qurd::properties
