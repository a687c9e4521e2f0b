#include "qurd/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

qurd::scenario::ScenarioFile load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return qurd::scenario::parse_file(buf.str());
  } catch (const qurd::scenario::ScenarioError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"QURD reservation-system laboratory"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::size_t bound = qurd::analysis::kDefaultBound;
  std::vector<std::string> props;
  unsigned threads = 1;

  auto* analyze = app.add_subcommand("analyze", "explore the scenario's net and check properties");
  analyze->add_option("scenario", scenario_path, "scenario file")->required();
  analyze->add_option("--bound", bound, "state bound");
  analyze->add_option("--property", props, "deadlock, mutex, machine-invariant, job-done-reachable (repeatable)");
  analyze->add_option("--threads", threads, "exploration threads")->check(CLI::Range(1u, 256u));
  analyze->add_option("--out", out_path, "witness file (default qurd-witness.txt)");

  auto* simulate = app.add_subcommand("simulate", "run the protocol simulator");
  simulate->add_option("scenario", scenario_path, "scenario file")->required();
  simulate->add_option("--out", out_path, "trace file (default: print after the outcomes)");

  std::size_t fuzz = 0;
  std::uint64_t seed = 0;
  bool negative = false;
  std::string trace_path;
  auto* conf = app.add_subcommand("conformance", "replay traces on the colored net");
  conf->add_option("scenario", scenario_path, "scenario file");
  conf->add_option("--fuzz", fuzz, "random scenarios to check instead of a file");
  conf->add_option("--seed", seed, "first fuzz seed");
  conf->add_flag("--negative-control", negative, "also fuzz with t1 and t2 swapped and expect divergences");
  conf->add_option("--trace", trace_path, "replay this trace instead of simulating");

  std::string selector;
  auto* dot = app.add_subcommand("export-dot", "print a net or reachability graph as DOT");
  dot->add_option("net", selector, "machine, client, two-clients, full, full-fd, colored, unfolded, reach")
      ->required()
      ->check(CLI::IsMember(qurd::cli::dot_selectors()));
  dot->add_option("--scenario", scenario_path, "take parameters from a scenario file");
  dot->add_option("--out", out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : qurd::cli::bad_input;
  }

  auto opt_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
  try {
    if (analyze->parsed()) {
      qurd::cli::AnalyzeOptions o{props, bound, threads, opt_path(out_path)};
      return qurd::cli::cmd_analyze(load(scenario_path).scenario, o, std::cout);
    }
    if (simulate->parsed()) return qurd::cli::cmd_simulate(load(scenario_path), {opt_path(out_path)}, std::cout);
    if (conf->parsed()) {
      qurd::cli::ConformanceOptions o;
      if (conf->count("--fuzz")) o.fuzz = fuzz;
      o.seed = seed;
      o.negative_control = negative;
      o.trace_path = opt_path(trace_path);
      std::optional<qurd::proto::Scenario> sc;
      if (!scenario_path.empty()) sc = load(scenario_path).scenario;
      return qurd::cli::cmd_conformance(sc, o, std::cout);
    }
    std::optional<qurd::proto::Scenario> sc;
    if (!scenario_path.empty()) sc = load(scenario_path).scenario;
    return qurd::cli::cmd_export_dot(selector, sc, opt_path(out_path), std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qurd::cli::bad_input;
  }
}
