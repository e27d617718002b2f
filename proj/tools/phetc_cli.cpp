// Command-line front end: certification, simulation and benchmark tables.

#include "phetc/bench.hpp"
#include "phetc/errors.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <optional>
#include <thread>
#include <utility>

namespace {

using namespace phetc;

int run_verb(const std::string& verb, Scenario& scenario, int jobs) {
  Manifest manifest;
  manifest.setInfo("verb", verb);
  manifest.setInfo("model", scenario.modelType);
  manifest.setInfo("root_seed", std::to_string(scenario.trigger.seed));
  int code = kExitOk;

  auto simTable = [&](const SimTable& t, const char* label) {
    fmt::print("{}: {} runs -> {}\n", label, t.rows.size(), t.csv.string());
    if (t.anyDiverged()) code = kExitDivergence;
  };

  if (verb == "certify") {
    const Certificate c = run_certify(scenario, manifest);
    fmt::print("delta_M = {}, sigma = {}: {} ({})\n", c.deltaM, c.sigma, to_string(c.verdict), c.message);
    if (c.verdict == Verdict::Undecided) code = kExitUndecided;
  } else if (verb == "simulate") {
    const SimRow r = run_simulate(scenario, manifest);
    if (r.diverged) {
      fmt::print("simulation diverged\n");
      code = kExitDivergence;
    } else {
      fmt::print("transmissions {}, avg inter-event {:.4g} s, ISE {:.4g}, IAE {:.4g}, ITAE {:.4g}\n",
                 r.transmissions, r.avgInterEvent, r.indices.ise, r.indices.iae, r.indices.itae);
    }
  } else if (verb == "table1" || verb == "pipeline") {
    const Table1Result t = run_table1(scenario, jobs, manifest);
    for (const auto& r : t.rows) {
      if (r.found) {
        fmt::print("delta_M = {:.2f}: sigma_max = {:.4f}\n", r.deltaM, r.result.sigmaMax);
      } else {
        fmt::print("delta_M = {:.2f}: no certificate at sigma = 0\n", r.deltaM);
      }
    }
  }
  if (verb == "table2" || verb == "pipeline") simTable(run_table2(scenario, jobs, manifest), "table2");
  if (verb == "table3" || verb == "pipeline") simTable(run_table3(scenario, jobs, manifest), "table3");
  if (verb == "sweep") simTable(run_sweep(scenario, jobs, manifest), "sweep");

  manifest.write(scenario.outDir / "manifest.json");
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered port-Hamiltonian networks: certification and simulation"};
  app.require_subcommand(1, 1);

  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int jobs = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));

  const std::pair<const char*, const char*> verbs[] = {
      {"certify", "Certify one (delta_M, sigma) cell and write certificate.json"},
      {"simulate", "Simulate one run and write its trace and event log"},
      {"table1", "Largest certified sigma for each delta_M"},
      {"table2", "Simulation indices versus sigma"},
      {"table3", "Simulation indices versus tau_M"},
      {"sweep", "Simulation indices over the full sigma x tau_M grid"},
      {"pipeline", "table1, table2 and table3 in one invocation"},
  };
  for (const auto& [verb, help] : verbs) {
    CLI::App* sub = app.add_subcommand(verb, help);
    sub->add_option("--config", config, "Scenario file")->required();
    sub->add_option("--out", out, "Output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "Root seed (overrides [network] seed)");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    Scenario scenario = load_scenario(config);
    if (out) scenario.outDir = *out;
    if (seed) scenario.trigger.seed = *seed;
    return run_verb(verb, scenario, jobs);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kExitConfig;
  } catch (const NonFiniteState& e) {
    fmt::print(stderr, "simulation diverged: {}\n", e.what());
    return kExitDivergence;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
