#include "qurd/commands.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qurd;
using scenario::parse_file;
using scenario::parse_scenario;
using scenario::ScenarioError;

namespace {

const char* kDeadlock = R"(# two jobs split three machines
machines 3
job J1 demand 3 semantics wait
job J2 demand 2 semantics wait
timeout off
)";

std::string read(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

std::size_t line_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

} // namespace

TEST(ScenarioFile, DeadlockExample) {
  auto sc = parse_scenario(kDeadlock);
  EXPECT_EQ(sc.params.machines, 3u);
  ASSERT_EQ(sc.params.jobs.size(), 2u);
  EXPECT_EQ(sc.params.jobs[0].id, "J1");
  EXPECT_EQ(sc.params.jobs[0].demand, 3u);
  EXPECT_EQ(sc.params.jobs[1].demand, 2u);
  EXPECT_EQ(sc.params.semantics, catalog::Semantics::wait);
  EXPECT_TRUE(sc.job_semantics.empty());
  EXPECT_FALSE(sc.params.timeout);
}

TEST(ScenarioFile, ZeroMachines) {
  EXPECT_THROW(parse_scenario("machines 0\njob J1 demand 1 semantics wait\n"), ScenarioError);
  EXPECT_EQ(line_of("machines 0\n"), 1u);
}

TEST(ScenarioFile, UnknownMachineHasLine) {
  std::string text = "machines 4\njob J1 demand 1 semantics wait\ncrash M9 at 1\n";
  try {
    parse_scenario(text);
    FAIL() << "accepted unknown machine";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("unknown machine"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("M9"), std::string::npos);
  }
}

TEST(ScenarioFile, Errors) {
  EXPECT_EQ(line_of("machines 2\nmachines 3\njob J1 demand 1 semantics wait\n"), 2u);
  EXPECT_EQ(line_of("machines 2\nfrobnicate\n"), 2u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics lazy\n"), 2u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 0 semantics wait\n"), 2u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand x semantics wait\n"), 2u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics wait\njob J1 demand 1 semantics wait\n"), 3u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics wait\nkill J2 at 1\n"), 3u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics wait\nexpect J1 maybe\n"), 3u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics wait\ntimeout 0\n"), 3u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics wait\njob-duration 0\n"), 3u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics wait\nzeroconf maybe\n"), 3u);
  EXPECT_EQ(line_of("machines 2\njob J1 demand 1 semantics wait\ncrash M1 when 3\n"), 3u);
  EXPECT_EQ(line_of("job J1 demand 1 semantics wait\n"), 0u);
  EXPECT_EQ(line_of("machines 2\n"), 0u);
}

TEST(ScenarioFile, Defaults) {
  auto f = parse_file("machines 2\njob J1 demand 1 semantics fail\n");
  const auto& sc = f.scenario;
  EXPECT_EQ(sc.params.timeout, catalog::kDefaultTimeout);
  EXPECT_FALSE(sc.params.zeroconf);
  EXPECT_FALSE(sc.params.failure_detector);
  EXPECT_EQ(sc.sim, proto::SimConfig{});
  EXPECT_EQ(f.expected_outcome("J1"), proto::Outcome::completed);
}

TEST(ScenarioFile, AllDirectives) {
  auto f = parse_file(R"(machines 3   # trailing comment
job A demand 2 semantics fail
job B demand 1 semantics wait
timeout 5
zeroconf on
failure-detector on
crash M2 at 7
kill B at 4
expect A failed
expect B timed-out
bus-latency 2
msg-latency 0
job-duration 3
detection-delay 4
horizon 90
seed 12
)");
  const auto& sc = f.scenario;
  EXPECT_EQ(sc.job_semantics, (std::vector<catalog::Semantics>{catalog::Semantics::fail, catalog::Semantics::wait}));
  EXPECT_EQ(sc.params.timeout, 5u);
  EXPECT_TRUE(sc.params.zeroconf);
  EXPECT_TRUE(sc.params.failure_detector);
  EXPECT_EQ(sc.sim.crashes, (std::vector<proto::Crash>{{"M2", 7}}));
  EXPECT_EQ(sc.sim.launcher_kills, (std::vector<proto::Kill>{{"B", 4}}));
  EXPECT_EQ(f.expected_outcome("A"), proto::Outcome::failed);
  EXPECT_EQ(f.expected_outcome("B"), proto::Outcome::timed_out);
  EXPECT_EQ(sc.sim.bus_latency, 2u);
  EXPECT_EQ(sc.sim.msg_latency, 0u);
  EXPECT_EQ(sc.sim.job_duration, 3u);
  EXPECT_EQ(sc.sim.detection_delay, 4u);
  EXPECT_EQ(sc.sim.horizon, 90u);
  EXPECT_EQ(sc.sim.seed, 12u);
  EXPECT_EQ(parse_file(scenario::render(f)), f);
}

TEST(ScenarioFile, RenderRoundTrip) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto sc = conformance::random_scenario(seed);
    auto text = scenario::render(sc);
    EXPECT_EQ(parse_scenario(text), sc) << text;
    EXPECT_EQ(scenario::render(parse_scenario(text)), text);
  }
}

TEST(ScenarioFile, ShippedScenariosParse) {
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(QURD_SCENARIOS)) {
    if (entry.path().extension() != ".qurd") continue;
    ++n;
    EXPECT_NO_THROW(parse_file(read(entry.path()))) << entry.path();
  }
  EXPECT_GE(n, 5u);
}

TEST(Analyze, DeadlockFound) {
  auto path = temp("qurd-test-witness.txt");
  std::filesystem::remove(path);
  cli::AnalyzeOptions o;
  o.properties = {"deadlock"};
  o.witness_path = path.string();
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_analyze(parse_scenario(kDeadlock), o, out), cli::failed);
  EXPECT_NE(out.str().find("deadlock: FOUND"), std::string::npos) << out.str();
  auto w = read(path);
  EXPECT_NE(w.find("t=0 start_job@(J1)"), std::string::npos) << w;
  EXPECT_NE(w.find("# marking:"), std::string::npos);
}

TEST(Analyze, DeadlockNoneWithTimeout) {
  auto sc = parse_scenario(std::string(kDeadlock) + "timeout 3\n");
  cli::AnalyzeOptions o;
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_analyze(sc, o, out), cli::ok) << out.str();
  for (const char* line : {"deadlock: none", "mutex: holds", "machine-invariant: holds", "job-done-reachable J1: holds",
                           "job-done-reachable J2: holds"})
    EXPECT_NE(out.str().find(line), std::string::npos) << line << "\n" << out.str();
}

TEST(Analyze, Truncated) {
  cli::AnalyzeOptions o;
  o.bound = 10;
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_analyze(parse_scenario(kDeadlock), o, out), cli::truncated);
  EXPECT_NE(out.str().find("Truncated"), std::string::npos);
}

TEST(Analyze, BadInput) {
  cli::AnalyzeOptions o;
  o.properties = {"liveness"};
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_analyze(parse_scenario(kDeadlock), o, out), cli::bad_input);
  auto mixed = parse_scenario("machines 2\njob J1 demand 1 semantics fail\njob J2 demand 1 semantics wait\n");
  EXPECT_EQ(cli::cmd_analyze(mixed, {}, out), cli::bad_input);
}

TEST(Analyze, ThreadsGiveSameReport) {
  auto sc = parse_scenario(std::string(kDeadlock) + "timeout 2\n");
  std::ostringstream one, four;
  cli::AnalyzeOptions o;
  cli::cmd_analyze(sc, o, one);
  o.threads = 4;
  cli::cmd_analyze(sc, o, four);
  EXPECT_EQ(one.str(), four.str());
}

TEST(Simulate, ExpectationsDecideStatus) {
  auto f = parse_file("machines 4\njob J1 demand 5 semantics fail\nexpect J1 failed\n");
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_simulate(f, {}, out), cli::ok);
  EXPECT_NE(out.str().find("J1: failed\n"), std::string::npos);
  f.expected.clear();
  std::ostringstream out2;
  EXPECT_EQ(cli::cmd_simulate(f, {}, out2), cli::failed);
  EXPECT_NE(out2.str().find("J1: failed (expected completed)"), std::string::npos);
}

TEST(Simulate, TraceFileRoundTrips) {
  auto path = temp("qurd-test-trace.txt");
  auto f = parse_file("machines 2\njob J1 demand 2 semantics wait\n");
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_simulate(f, {path.string()}, out), cli::ok);
  std::ifstream in(path);
  auto events = trace::parse(in);
  EXPECT_EQ(events, proto::run(f.scenario).trace);

  cli::ConformanceOptions c;
  c.trace_path = path.string();
  std::ostringstream cout;
  EXPECT_EQ(cli::cmd_conformance(f.scenario, c, cout), cli::ok) << cout.str();
}

TEST(Conformance, FuzzReport) {
  cli::ConformanceOptions o;
  o.fuzz = 20;
  o.negative_control = true;
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_conformance(std::nullopt, o, out), cli::ok);
  EXPECT_NE(out.str().find("conformance: 20/20 traces replay"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("negative control (t1 <-> t2):"), std::string::npos);
}

TEST(Conformance, NeedsInput) {
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_conformance(std::nullopt, {}, out), cli::bad_input);
}

TEST(ExportDot, Machine) {
  auto text = cli::export_dot("machine", std::nullopt);
  EXPECT_EQ(text.rfind("digraph \"machine\" {", 0), 0u);
  for (const char* s : {"\"available\"", "\"reserved\"", "\"running\"", "\"finished\"", "\"t1\"", "\"t2\"", "\"t3\"",
                        "\"t4\"", "\"cancel\""})
    EXPECT_NE(text.find(s), std::string::npos) << s;
  EXPECT_NE(text.find("cancel\\n[3,inf)"), std::string::npos) << text;
}

TEST(ExportDot, EverySelectorIsStable) {
  for (const auto& s : cli::dot_selectors()) {
    auto a = cli::export_dot(s, std::nullopt);
    EXPECT_EQ(a, cli::export_dot(s, std::nullopt)) << s;
    EXPECT_EQ(a.back(), '\n') << s;
    EXPECT_NE(a.find("digraph"), std::string::npos) << s;
  }
}

TEST(ExportDot, ColoredInscriptions) {
  auto text = cli::export_dot("colored", std::nullopt);
  for (const char* s : {"<m>", "<j>", "<m,j>", "demand(j)*<j>"}) EXPECT_NE(text.find(s), std::string::npos) << s;
}

TEST(ExportDot, ReachRefusesLargeGraphs) {
  auto sc = parse_scenario(kDeadlock);
  EXPECT_THROW(cli::export_dot("reach", sc, 50), dot::TooLarge);
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_export_dot("reach", sc, std::nullopt, out, err), cli::ok);

  tpn::IndexedNet net(catalog::build_model(sc.net_params()));
  analysis::ExploreOptions eo;
  eo.bound = 3;
  EXPECT_THROW(dot::to_dot(net, analysis::explore(net, eo)), analysis::Truncated);
}

TEST(ExportDot, ReachMarksDeadStates) {
  auto text = cli::export_dot("reach", parse_scenario(kDeadlock));
  EXPECT_NE(text.find("doublecircle"), std::string::npos);
  EXPECT_NE(text.find("s0"), std::string::npos);
}

TEST(ExportDot, Quote) {
  EXPECT_EQ(dot::quote("a\"b"), "\"a\\\"b\"");
  EXPECT_EQ(dot::quote("reserved.(M1,J1)"), "\"reserved.(M1,J1)\"");
}
