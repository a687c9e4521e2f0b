#include "qurd/conformance.hpp"

#include <gtest/gtest.h>

using namespace qurd;
using namespace qurd::conformance;
using catalog::CatalogParams;

namespace {

proto::Scenario make(std::uint32_t machines, const std::vector<std::uint32_t>& demands) {
  proto::Scenario sc;
  sc.params = CatalogParams::with_demands(machines, demands);
  return sc;
}

std::vector<std::string> labels(const std::vector<Step>& steps, const colored::ColorUniverse& u) {
  std::vector<std::string> out;
  for (const auto& s : steps) {
    std::string args;
    if (s.binding.machine) args += u.machines[*s.binding.machine];
    if (s.binding.job) args += (args.empty() ? "" : ",") + u.jobs[*s.binding.job];
    out.push_back(s.transition + "(" + args + ")");
  }
  return out;
}

} // namespace

TEST(Project, HappyPath) {
  auto sc = make(1, {1});
  auto r = proto::run(sc);
  auto model = model_for(sc);
  auto steps = project(r.trace, EventMap::standard(), model.universe);
  EXPECT_EQ(labels(steps, model.universe),
            (std::vector<std::string>{"start_job(J1)", "t1(M1,J1)", "launch(J1)", "t2(M1,J1)", "t3(M1,J1)",
                                      "t4(M1,J1)", "t5(J1)"}));
  EXPECT_TRUE(replay(steps, model.net, model.universe).ok);
}

TEST(Project, EmptyAndInternalOnly) {
  auto model = model_for(make(1, {1}));
  EXPECT_TRUE(project({}, EventMap::standard(), model.universe).empty());
  std::vector<trace::TraceEvent> kos{{3, "M1", proto::ev::ko_sent, "M1", "J1"}, {4, "J1", proto::ev::ko_received, "M1", "J1"}};
  EXPECT_TRUE(project(kos, EventMap::standard(), model.universe).empty());
}

TEST(Project, UnknownKindIsAnError) {
  auto model = model_for(make(1, {1}));
  std::vector<trace::TraceEvent> t{{0, "J1", "teleported", std::nullopt, "J1"}};
  EXPECT_THROW(project(t, EventMap::standard(), model.universe), UnknownEvent);
}

TEST(Project, KeepsTraceIndices) {
  auto sc = make(2, {2});
  auto r = proto::run(sc);
  auto model = model_for(sc);
  auto steps = project(r.trace, EventMap::standard(), model.universe);
  for (std::size_t i = 1; i < steps.size(); ++i) EXPECT_LT(steps[i - 1].trace_index, steps[i].trace_index);
  for (const auto& s : steps) EXPECT_EQ(EventMap::standard().mapped.at(r.trace[s.trace_index].kind), s.transition);
}

TEST(Replay, T2FirstDiverges) {
  auto model = model_for(make(1, {1}));
  std::vector<Step> steps{{"t2", {0, 0}, 0}};
  auto r = replay(steps, model.net, model.universe);
  EXPECT_FALSE(r.ok);
  ASSERT_TRUE(r.divergence);
  EXPECT_EQ(r.divergence->index, 0u);
  EXPECT_EQ(r.fired, 0u);
}

TEST(Replay, WrongArityDiverges) {
  auto model = model_for(make(1, {1}));
  std::vector<Step> steps{{"start_job", {0, 0}, 0}};
  EXPECT_FALSE(replay(steps, model.net, model.universe).ok);
  steps = {{"no_such", {std::nullopt, 0}, 0}};
  EXPECT_FALSE(replay(steps, model.net, model.universe).ok);
}

TEST(Replay, CrashRecovery) {
  auto sc = make(2, {1});
  sc.params.failure_detector = true;
  sc.sim.bus_latency = 0;
  sc.sim.msg_latency = 0;
  sc.sim.job_duration = 4;
  sc.sim.crashes.push_back({"M1", 2});
  bool recovered = false;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    sc.sim.seed = seed;
    auto r = proto::run(sc);
    auto check = check_trace(r.trace, sc);
    EXPECT_TRUE(check.ok) << check.reason;
    auto model = model_for(sc);
    auto steps = labels(project(r.trace, EventMap::standard(), model.universe), model.universe);
    auto crash = std::find(steps.begin(), steps.end(), "crash(M1,J1)");
    if (crash != steps.end()) {
      recovered = true;
      std::vector<std::string> tail(crash, steps.end());
      EXPECT_EQ(tail, (std::vector<std::string>{"crash(M1,J1)", "continue(M2,J1)", "t3(M2,J1)", "t4(M2,J1)", "t5(J1)"}));
    }
  }
  EXPECT_TRUE(recovered);
}

TEST(Replay, ModelForAddsDetectorWithCrashes) {
  auto sc = make(2, {1});
  EXPECT_FALSE(model_for(sc).net.has_transition("crash"));
  sc.sim.crashes.push_back({"M1", 3});
  EXPECT_TRUE(model_for(sc).net.has_transition("crash"));
}

TEST(Check, JobDoneMatchesCompletions) {
  auto sc = make(1, {1});
  auto r = proto::run(sc);
  // With all-done internal the replay is valid but job_done stays empty.
  auto map = EventMap::standard();
  map.mapped.erase(proto::ev::all_done);
  map.internal.insert(proto::ev::all_done);
  auto check = check_trace(r.trace, sc, map);
  EXPECT_FALSE(check.ok);
  EXPECT_FALSE(check.divergence);
  EXPECT_NE(check.reason.find("job_done"), std::string::npos);
  EXPECT_TRUE(check_trace(r.trace, sc).ok);
}

TEST(EventMapTest, TargetsExist) {
  for (bool fd : {false, true}) {
    auto p = CatalogParams::with_demands(2, {1, 1});
    p.failure_detector = fd;
    auto model = catalog::build_colored(p);
    auto missing = EventMap::standard().missing_targets(model.net);
    if (fd) EXPECT_TRUE(missing.empty());
    else EXPECT_EQ(missing, (std::vector<std::string>{"crash-running -> crash", "detector-restart -> continue"}));
  }
}

TEST(EventMapTest, MappedAndInternalAreDisjoint) {
  auto m = EventMap::standard();
  for (const auto& k : m.internal) EXPECT_EQ(m.mapped.count(k), 0u) << k;
}

TEST(EventMapTest, EveryEmittedKindIsDeclared) {
  auto m = EventMap::standard();
  for (std::uint64_t seed = 0; seed < 300; ++seed)
    for (const auto& e : proto::run(random_scenario(seed)).trace)
      EXPECT_TRUE(m.mapped.count(e.kind) || m.internal.count(e.kind)) << e.kind;
}

TEST(Fuzz, TwoHundredPass) {
  auto s = fuzz_conformance(200);
  EXPECT_EQ(s.runs, 200u);
  EXPECT_EQ(s.passed, 200u);
  for (const auto& f : s.failures) ADD_FAILURE() << "seed " << f.seed << ": " << f.reason;
}

TEST(Fuzz, Empty) {
  auto s = fuzz_conformance(0);
  EXPECT_EQ(s.runs, 0u);
  EXPECT_TRUE(s.ok());
}

TEST(Fuzz, NegativeControlDiverges) {
  auto s = fuzz_conformance(200, 0, swapped(EventMap::standard(), "t1", "t2"));
  EXPECT_FALSE(s.ok());
  ASSERT_FALSE(s.failures.empty());
  EXPECT_NE(s.failures.front().reason.find("divergence"), std::string::npos);
}

TEST(Fuzz, ScenariosCoverTheSpace) {
  std::set<std::uint32_t> machines, demands;
  std::set<std::size_t> jobs;
  bool crash = false, fail = false, wait = false;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto sc = random_scenario(seed);
    EXPECT_NO_THROW(proto::validate(sc));
    machines.insert(sc.params.machines);
    jobs.insert(sc.params.jobs.size());
    for (const auto& j : sc.params.jobs) demands.insert(j.demand);
    crash |= !sc.sim.crashes.empty();
    fail |= sc.params.semantics == catalog::Semantics::fail;
    wait |= sc.params.semantics == catalog::Semantics::wait;
  }
  EXPECT_EQ(machines, (std::set<std::uint32_t>{1, 2, 3, 4}));
  EXPECT_EQ(jobs, (std::set<std::size_t>{1, 2}));
  EXPECT_EQ(demands, (std::set<std::uint32_t>{1, 2, 3}));
  EXPECT_TRUE(crash && fail && wait);
}
