#include "qurd/analysis.hpp"
#include "qurd/catalog.hpp"
#include "qurd/properties.hpp"

#include <gtest/gtest.h>

using namespace qurd;
using catalog::CatalogParams;
using catalog::Semantics;

namespace {

tpn::TimedState at(const tpn::IndexedNet& n, const std::map<std::string, std::uint32_t>& m) {
  return tpn::make_state(n, n.marking(m), n.default_cap());
}

tpn::TimedState run(const tpn::IndexedNet& n, tpn::TimedState s, const std::vector<std::string>& path) {
  for (const auto& t : path) s = tpn::fire(n, s, t);
  return s;
}

bool mentions(const std::string& name, const std::string& id) {
  auto p = names::parse(name);
  return p && (p->first == id || p->second == id);
}

std::vector<CatalogParams> catalog_configs() {
  std::vector<CatalogParams> out;
  for (auto sem : {Semantics::wait, Semantics::fail})
    for (std::optional<std::uint32_t> timeout : {std::optional<std::uint32_t>{3}, std::optional<std::uint32_t>{}})
      for (bool zc : {false, true})
        for (bool fd : {false, true})
          for (auto demands : {std::vector<std::uint32_t>{1}, std::vector<std::uint32_t>{3, 2}}) {
            auto p = CatalogParams::with_demands(3, demands, sem, timeout);
            p.zeroconf = zc;
            p.failure_detector = fd;
            out.push_back(p);
          }
  return out;
}

} // namespace

TEST(Machine, Shape) {
  auto net = catalog::build_machine();
  EXPECT_TRUE(tpn::validate(net).empty());
  for (const char* p : {"available", "reserved", "running", "finished"}) EXPECT_TRUE(net.place_index(p)) << p;
  for (const char* t : {"t1", "t2", "t3", "t4", "cancel"}) EXPECT_TRUE(net.has_transition(t)) << t;
  tpn::IndexedNet n(net);
  EXPECT_EQ(n.initial_marking(), n.marking({{"available", 1}}));
}

TEST(Machine, CycleFreesTheMachine) {
  tpn::IndexedNet n(catalog::build_machine());
  auto s = run(n, at(n, {{"available", 1}, {"get_nodes", 1}, {"launching_job", 1}}), {"t1", "t2", "t3", "t4"});
  // answered is consumed by the client's launch, absent here.
  EXPECT_EQ(s.marking, n.marking({{"available", 1}, {"answered", 1}, {"job_finished", 1}}));
}

TEST(Machine, CancelOnlyWithTimeoutOrFail) {
  catalog::MachineOptions o;
  o.timeout = std::nullopt;
  EXPECT_FALSE(catalog::build_machine(o).has_transition("cancel"));
  o.semantics = Semantics::fail;
  auto fail = catalog::build_machine(o);
  ASSERT_TRUE(fail.has_transition("cancel"));
  EXPECT_EQ(fail.transition("cancel").post.size(), 1u);
  EXPECT_EQ(catalog::build_machine().transition("cancel").interval, tpn::Interval::unbounded(3));
}

TEST(Client, LaunchNeedsAllAnswers) {
  tpn::IndexedNet n(catalog::build_client_net(CatalogParams::with_demands(4, {4})));
  auto launch = n.transition("launch@(J1)");
  EXPECT_FALSE(tpn::is_enabled(n, n.marking({{"answered.J1", 3}}), launch));
  EXPECT_TRUE(tpn::is_enabled(n, n.marking({{"answered.J1", 4}}), launch));
}

TEST(Client, SingleMachineRunToCompletion) {
  tpn::IndexedNet n(catalog::build_client_net(CatalogParams::with_demands(1, {1}, Semantics::wait, std::nullopt)));
  auto s = run(n, tpn::initial_state(n),
               {"start_job@(J1)", "t1@(M1,J1)", "launch@(J1)", "t2@(M1,J1)", "t3@(M1,J1)", "t4@(M1,J1)", "t5@(J1)"});
  EXPECT_EQ(s.marking[n.place("job_done.J1")], 1u);
  EXPECT_EQ(s.marking[n.place("available.M1")], 1u);
}

TEST(Client, OverDemandNeverLaunches) {
  tpn::IndexedNet n(catalog::build_client_net(CatalogParams::with_demands(1, {2}, Semantics::wait, std::nullopt)));
  auto g = analysis::explore(n);
  auto launch = n.transition("launch@(J1)");
  for (const auto& s : g.states) EXPECT_FALSE(tpn::is_enabled(n, s.marking, launch));
}

TEST(Client, RejectsWrongJobCount) {
  EXPECT_THROW(catalog::build_client_net(CatalogParams::with_demands(2, {1, 1})), std::invalid_argument);
  EXPECT_THROW(catalog::build_two_clients(CatalogParams::with_demands(2, {1})), std::invalid_argument);
}

TEST(Zeroconf, UnpublishedMachineCannotBeReserved) {
  auto p = CatalogParams::with_demands(1, {1});
  p.zeroconf = true;
  tpn::IndexedNet n(catalog::build_model(p));
  auto s = run(n, tpn::initial_state(n), {"start_job@(J1)", "unpublish@(M1)"});
  EXPECT_FALSE(tpn::is_enabled(n, s.marking, n.transition("t1@(M1,J1)")));
  auto back = run(n, s, {"publish@(M1)"});
  EXPECT_EQ(back.marking, run(n, tpn::initial_state(n), {"start_job@(J1)"}).marking);
}

TEST(Zeroconf, MachineInvariantCoversFivePlaces) {
  auto p = CatalogParams::with_demands(1, {1});
  p.zeroconf = true;
  tpn::IndexedNet n(catalog::build_model(p));
  auto l = catalog::layout(n, p);
  ASSERT_EQ(l.machine_states[0].size(), 5u);
  EXPECT_TRUE(analysis::check_p_invariant(n, properties::machine_weights(n, l)[0]));
  auto without = properties::machine_weights(n, l)[0];
  without.erase("not_available.M1");
  EXPECT_FALSE(analysis::check_p_invariant(n, without));
}

TEST(FailureDetector, CrashThenContinueOnASpare) {
  auto p = CatalogParams::with_demands(2, {1});
  p.failure_detector = true;
  tpn::IndexedNet n(catalog::build_model(p));
  auto s = run(n, tpn::initial_state(n),
               {"start_job@(J1)", "t1@(M1,J1)", "launch@(J1)", "t2@(M1,J1)", "crash@(M1,J1)"});
  EXPECT_EQ(s.marking[n.place("dead.M1")], 1u);
  EXPECT_EQ(s.marking[n.place("failure_detector.J1")], 1u);
  s = run(n, s, {"continue@(M2,J1)"});
  EXPECT_EQ(s.marking[n.place("running.(M2,J1)")], 1u);
}

TEST(FailureDetector, NoSpareMeansWaiting) {
  auto p = CatalogParams::with_demands(1, {1});
  p.failure_detector = true;
  tpn::IndexedNet n(catalog::build_model(p));
  auto s = run(n, tpn::initial_state(n), {"start_job@(J1)", "t1@(M1,J1)", "launch@(J1)", "t2@(M1,J1)", "crash@(M1,J1)"});
  EXPECT_EQ(s.marking[n.place("failure_detector.J1")], 1u);
  EXPECT_FALSE(tpn::is_enabled(n, s.marking, n.transition("continue@(M1,J1)")));
}

TEST(FailureDetector, WithoutCrashesBehaviourIsUnchanged) {
  auto base = CatalogParams::with_demands(2, {2});
  auto ext = base;
  ext.failure_detector = true;
  tpn::IndexedNet a(catalog::build_model(base));
  tpn::IndexedNet b(catalog::build_model(ext));
  std::set<std::map<std::string, std::uint32_t>> plain, crash_free;
  auto named = [](const tpn::IndexedNet& n, const tpn::Marking& m) {
    std::map<std::string, std::uint32_t> out;
    for (std::size_t p = 0; p < m.counts.size(); ++p)
      if (m.counts[p]) out[n.place_name(p)] = m.counts[p];
    return out;
  };
  for (const auto& s : analysis::explore(a).states) plain.insert(named(a, s.marking));
  for (const auto& s : analysis::explore(b).states) {
    auto m = named(b, s.marking);
    bool crashed = std::any_of(m.begin(), m.end(), [](const auto& kv) {
      return kv.first.rfind("dead.", 0) == 0 || kv.first.rfind("failure_detector.", 0) == 0;
    });
    if (!crashed) crash_free.insert(m);
  }
  EXPECT_EQ(plain, crash_free);
  EXPECT_FALSE(tpn::is_enabled(b, b.initial_marking(), b.transition("continue@(M1,J1)")));
}

TEST(TwoClients, SingleMachineAnswersOnce) {
  tpn::IndexedNet n(catalog::build_two_clients(CatalogParams::with_demands(1, {1, 1})));
  auto s = run(n, tpn::initial_state(n), {"start_job@(J1)", "start_job@(J2)", "t1@(M1,J1)"});
  EXPECT_FALSE(tpn::is_enabled(n, s.marking, n.transition("t1@(M1,J2)")));
}

TEST(TwoClients, SplitReservationIsDeadWithoutTimeout) {
  for (std::optional<std::uint32_t> timeout : {std::optional<std::uint32_t>{}, std::optional<std::uint32_t>{3}}) {
    tpn::IndexedNet n(catalog::build_two_clients(CatalogParams::with_demands(3, {3, 2}, Semantics::wait, timeout)));
    auto s = run(n, tpn::initial_state(n),
                 {"start_job@(J1)", "start_job@(J2)", "t1@(M1,J1)", "t1@(M2,J1)", "t1@(M3,J2)"});
    EXPECT_EQ(s.marking[n.place("answered.J1")], 2u);
    EXPECT_EQ(s.marking[n.place("answered.J2")], 1u);
    EXPECT_EQ(tpn::successors(n, s).empty(), !timeout.has_value());
  }
}

TEST(TwoClients, RestrictionToOneClientIsTheClientNet) {
  auto two = catalog::build_two_clients(CatalogParams::with_demands(3, {2, 1}));
  auto one = catalog::build_client_net(CatalogParams::with_demands(3, {2}));
  std::vector<std::pair<std::string, std::uint32_t>> places;
  for (std::size_t p = 0; p < two.places().size(); ++p)
    if (!mentions(two.places()[p], "J2")) places.emplace_back(two.places()[p], two.initial_tokens()[p]);
  std::vector<std::pair<std::string, std::uint32_t>> expected;
  for (std::size_t p = 0; p < one.places().size(); ++p) expected.emplace_back(one.places()[p], one.initial_tokens()[p]);
  std::sort(places.begin(), places.end());
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(places, expected);

  auto key = [](const tpn::Transition& t) {
    return std::make_tuple(t.name, t.pre, t.post, t.interval.efd, t.interval.lfd);
  };
  std::vector<decltype(key(two.transitions()[0]))> a, b;
  for (const auto& t : two.transitions())
    if (!mentions(t.name, "J2")) a.push_back(key(t));
  for (const auto& t : one.transitions()) b.push_back(key(t));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Colored, InitialMarking) {
  auto m = catalog::build_colored(CatalogParams::with_demands(3, {1, 2}));
  auto cm = m.net.initial_marking(m.universe);
  EXPECT_EQ(cm.places[m.net.place("begin")].size(), 2u);
  EXPECT_EQ(cm.places[m.net.place("available")].size(), 3u);
  for (std::size_t p = 0; p < cm.places.size(); ++p) {
    const auto& name = m.net.places()[p].name;
    if (name != "begin" && name != "available") {
      EXPECT_TRUE(cm.places[p].empty()) << name;
    }
  }
}

TEST(Colored, UnfoldsToTheFullModel) {
  auto p = catalog::full_defaults(true);
  auto full = catalog::build_full(p);
  auto m = catalog::build_colored(p);
  auto unfolded = colored::unfold(m.net, m.universe);
  auto sorted_places = [](const tpn::Net& n) {
    std::vector<std::pair<std::string, std::uint32_t>> v;
    for (std::size_t i = 0; i < n.places().size(); ++i) v.emplace_back(n.places()[i], n.initial_tokens()[i]);
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted_places(full), sorted_places(unfolded));
  tpn::IndexedNet a(full), b(unfolded);
  EXPECT_EQ(analysis::reachable_markings(analysis::explore(a)).size(),
            analysis::reachable_markings(analysis::explore(b)).size());
}

TEST(Catalog, EveryNetValidatesAndConservesMachines) {
  for (const auto& p : catalog_configs()) {
    auto net = catalog::build_model(p);
    ASSERT_TRUE(tpn::validate(net).empty());
    tpn::IndexedNet n(net);
    auto l = catalog::layout(n, p);
    for (const auto& w : properties::machine_weights(n, l)) EXPECT_TRUE(analysis::check_p_invariant(n, w));
  }
  auto m = catalog::build_colored(CatalogParams::with_demands(2, {1}));
  EXPECT_TRUE(m.net.validate().empty());
}

TEST(Catalog, ParamsAreChecked) {
  EXPECT_THROW(CatalogParams::with_demands(0, {1}).check(), std::invalid_argument);
  EXPECT_THROW(CatalogParams::with_demands(1, {}).check(), std::invalid_argument);
  EXPECT_THROW(CatalogParams::with_demands(1, {0}).check(), std::invalid_argument);
  EXPECT_THROW(CatalogParams::with_demands(1, {1}, Semantics::wait, 0).check(), std::invalid_argument);
}
