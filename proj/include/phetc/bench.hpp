#pragma once

#include "phetc/lmi_certifier.hpp"
#include "phetc/scenario.hpp"
#include "phetc/sim_engine.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace phetc {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitUndecided = 3,
  kExitDivergence = 4,
};

struct ArtifactRecord {
  std::string kind;
  std::filesystem::path path;  ///< relative to the output directory
  std::map<std::string, std::string> params;
};

/// Machine-readable list of every file one invocation produced.
class Manifest {
 public:
  void add(std::string kind, std::filesystem::path path, std::map<std::string, std::string> params);
  void setTiming(const std::string& key, double seconds) { timings_[key] = seconds; }
  void setInfo(const std::string& key, const std::string& value) { info_[key] = value; }

  const std::vector<ArtifactRecord>& artifacts() const { return artifacts_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<ArtifactRecord> artifacts_;
  std::map<std::string, double> timings_;
  std::map<std::string, std::string> info_;
};

/// Runs body(i) for i in [0, count) on at most `jobs` threads. The first
/// exception thrown by a task is rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

struct Table1Row {
  double deltaM = 0.0;
  bool found = false;  ///< false when sigma = 0 is not certified
  SigmaMaxResult result;
  double seconds = 0.0;
};

struct Table1Result {
  std::vector<Table1Row> rows;
  std::filesystem::path csv, markdown;
};

/// sigma_max for each delta_M of the sweep; writes table1.csv
/// (delta_M, sigma_max, alpha_used, newton_iterations) and table1.md.
Table1Result run_table1(const Scenario& scenario, int jobs, Manifest& manifest);

struct SimRow {
  double sigma = 0.0;
  double h = 0.0;
  double tauMin = 0.0;
  double tauMax = 0.0;
  int run = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::size_t transmissions = 0;
  double avgInterEvent = 0.0;
  PerformanceIndices indices;
  double finalNorm = 0.0;
  std::filesystem::path trace;  ///< relative to the output directory
};

struct SimTable {
  std::vector<SimRow> rows;
  std::filesystem::path csv, markdown;
  bool anyDiverged() const;
};

/// One simulation per (sigma, run) with h and delays from the scenario.
SimTable run_table2(const Scenario& scenario, int jobs, Manifest& manifest);
/// One simulation per (tau_M, run) at the table-III h and sigma.
SimTable run_table3(const Scenario& scenario, int jobs, Manifest& manifest);
/// Full sigma x tau_M grid at the scenario h.
SimTable run_sweep(const Scenario& scenario, int jobs, Manifest& manifest);

/// Certificate at (delta_M = h + tau_M, sigma) of the scenario; writes certificate.json.
Certificate run_certify(const Scenario& scenario, Manifest& manifest);

/// Single run with the scenario trigger settings; writes the trace and event log.
SimRow run_simulate(const Scenario& scenario, Manifest& manifest);

/// File name of a per-run trace.
std::string trace_file_name(const std::string& name, double sigma, double tauM, std::uint64_t seed);

}  // namespace phetc
