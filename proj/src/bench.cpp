#include "phetc/bench.hpp"

#include "phetc/csv.hpp"
#include "phetc/errors.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace phetc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string cell(double v) { return std::isfinite(v) ? format_number(v) : std::string("-"); }

std::string md(double v) { return std::isfinite(v) ? fmt::format("{:.4g}", v) : std::string("—"); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
}

}  // namespace

void Manifest::add(std::string kind, std::filesystem::path path,
                   std::map<std::string, std::string> params) {
  artifacts_.push_back({std::move(kind), std::move(path), std::move(params)});
}

void Manifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["tool"] = "phetc";
  j["info"] = info_;
  j["timings_seconds"] = timings_;
  j["artifacts"] = nlohmann::json::array();
  for (const auto& a : artifacts_) {
    j["artifacts"].push_back({{"kind", a.kind}, {"path", a.path.generic_string()}, {"params", a.params}});
  }
  write_text(path, j.dump(2) + "\n");
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard lock(failureMutex);
        if (failure) return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

Table1Result run_table1(const Scenario& scenario, int jobs, Manifest& manifest) {
  const auto start = Clock::now();
  const ClosedLoopModel model = scenario.model();
  const auto vertices = scenario.hessianVertices();
  const CertifyOptions options = scenario.certifyOptions();

  Table1Result out;
  out.rows.resize(scenario.deltaM.size());
  parallel_for(out.rows.size(), jobs, [&](std::size_t i) {
    const auto t0 = Clock::now();
    Table1Row& row = out.rows[i];
    row.deltaM = scenario.deltaM[i];
    try {
      row.result = sigma_max(model, row.deltaM, vertices, scenario.sigmaTol, scenario.sigmaHi, options);
      row.found = true;
    } catch (const NoFeasiblePoint&) {
      row.found = false;
    }
    row.seconds = seconds_since(t0);
  });
  std::sort(out.rows.begin(), out.rows.end(),
            [](const Table1Row& a, const Table1Row& b) { return a.deltaM < b.deltaM; });

  CsvTable csv;
  csv.header = {"delta_M", "sigma_max", "alpha_used", "newton_iterations"};
  std::string text = "| δ_M | σ_max | α | Newton iterations | time [s] |\n|---|---|---|---|---|\n";
  for (const auto& r : out.rows) {
    const double sigma = r.found ? r.result.sigmaMax : std::nan("");
    const double alpha = r.found ? r.result.alphaUsed : std::nan("");
    csv.rows.push_back({format_number(r.deltaM), cell(sigma), cell(alpha),
                        r.found ? std::to_string(r.result.newtonIterations) : std::string("-")});
    text += fmt::format("| {} | {} | {} | {} | {:.2f} |\n", md(r.deltaM), md(sigma), md(alpha),
                        r.found ? std::to_string(r.result.newtonIterations) : std::string("—"),
                        r.seconds);
  }
  out.csv = scenario.outDir / "table1.csv";
  out.markdown = scenario.outDir / "table1.md";
  write_csv(out.csv, csv);
  write_text(out.markdown, text);
  const std::map<std::string, std::string> params{
      {"corner", to_string(scenario.corner)},
      {"tol", format_number(scenario.sigmaTol)},
      {"sigma_hi", format_number(scenario.sigmaHi)},
      {"validity_radius", format_number(scenario.validityRadius)}};
  manifest.add("table1_csv", "table1.csv", params);
  manifest.add("table1_md", "table1.md", params);
  manifest.setTiming("table1", seconds_since(start));
  return out;
}

bool SimTable::anyDiverged() const {
  return std::any_of(rows.begin(), rows.end(), [](const SimRow& r) { return r.diverged; });
}

std::string trace_file_name(const std::string& name, double sigma, double tauM, std::uint64_t seed) {
  return fmt::format("{}_sigma{}_tauM{}_seed{}.csv", name, format_number(sigma), format_number(tauM),
                     seed);
}

namespace {

struct SimCase {
  double sigma, h, tauMin, tauMax;
  int run;
};

SimRow simulate_case(const Scenario& scenario, const ClosedLoopModel& model, const SimCase& c,
                     const std::string& traceDir) {
  TriggerDelayConfig cfg = scenario.trigger;
  cfg.sigma = c.sigma;
  cfg.h = c.h;
  cfg.tau_m = c.tauMin;
  cfg.tau_M = c.tauMax;
  cfg.seed = derive_seed(scenario.trigger.seed, c.sigma, c.tauMax, static_cast<std::uint64_t>(c.run));

  SimRow row;
  row.sigma = c.sigma;
  row.h = c.h;
  row.tauMin = c.tauMin;
  row.tauMax = c.tauMax;
  row.run = c.run;
  row.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("sweep cell sigma = {}, tau_M = {}: {}", c.sigma, c.tauMax, e.what()));
  }
  try {
    const SimTrace trace = simulate(model, cfg, scenario.xi0, scenario.T, scenario.dt);
    row.transmissions = trace.transmissionCount();
    row.avgInterEvent = trace.avgInterEvent;
    row.indices = trace.indices;
    row.finalNorm = trace.states.back().norm();
    row.trace = std::filesystem::path(traceDir) / trace_file_name(scenario.name, c.sigma, c.tauMax, cfg.seed);
    write_trace_csv(model, trace, scenario.outDir / row.trace);
  } catch (const NonFiniteState&) {
    row.diverged = true;
    const double nan = std::nan("");
    row.avgInterEvent = nan;
    row.indices = {nan, nan, nan};
    row.finalNorm = nan;
  }
  return row;
}

SimTable run_cases(const Scenario& scenario, const std::vector<SimCase>& cases, int jobs,
                   const std::string& label, const std::string& traceDir, Manifest& manifest) {
  const auto start = Clock::now();
  const ClosedLoopModel model = scenario.model();
  SimTable out;
  out.rows.resize(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    out.rows[i] = simulate_case(scenario, model, cases[i], traceDir);
  });
  std::sort(out.rows.begin(), out.rows.end(), [](const SimRow& a, const SimRow& b) {
    if (a.sigma != b.sigma) return a.sigma < b.sigma;
    if (a.tauMax != b.tauMax) return a.tauMax < b.tauMax;
    return a.run < b.run;
  });

  CsvTable csv;
  csv.header = {"sigma", "h", "tau_m", "tau_M", "run", "seed", "transmissions", "avg_inter_event",
                "ise", "iae", "itae", "final_norm", "status"};
  std::string text =
      "| σ | h | τ_M | run | transmissions | avg inter-event [s] | ISE | IAE | ITAE | status |\n"
      "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : out.rows) {
    const char* status = r.diverged ? "diverged" : "ok";
    csv.rows.push_back({format_number(r.sigma), format_number(r.h), format_number(r.tauMin),
                        format_number(r.tauMax), std::to_string(r.run), std::to_string(r.seed),
                        std::to_string(r.transmissions), cell(r.avgInterEvent), cell(r.indices.ise),
                        cell(r.indices.iae), cell(r.indices.itae), cell(r.finalNorm), status});
    text += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", md(r.sigma), md(r.h),
                        md(r.tauMax), r.run, r.transmissions, md(r.avgInterEvent), md(r.indices.ise),
                        md(r.indices.iae), md(r.indices.itae), status);
    if (!r.diverged) {
      manifest.add("trace_csv", r.trace,
                   {{"table", label},
                    {"sigma", format_number(r.sigma)},
                    {"h", format_number(r.h)},
                    {"tau_m", format_number(r.tauMin)},
                    {"tau_M", format_number(r.tauMax)},
                    {"seed", std::to_string(r.seed)},
                    {"run", std::to_string(r.run)}});
    }
  }
  out.csv = scenario.outDir / (label + ".csv");
  out.markdown = scenario.outDir / (label + ".md");
  write_csv(out.csv, csv);
  write_text(out.markdown, text);
  manifest.add(label + "_csv", label + ".csv", {{"T", format_number(scenario.T)}, {"dt", format_number(scenario.dt)}});
  manifest.add(label + "_md", label + ".md", {});
  manifest.setTiming(label, seconds_since(start));
  return out;
}

}  // namespace

SimTable run_table2(const Scenario& scenario, int jobs, Manifest& manifest) {
  std::vector<SimCase> cases;
  for (double sigma : scenario.sigma) {
    for (int run = 0; run < scenario.runs; ++run) {
      cases.push_back({sigma, scenario.trigger.h, scenario.trigger.tau_m, scenario.trigger.tau_M, run});
    }
  }
  return run_cases(scenario, cases, jobs, "table2", "traces/table2", manifest);
}

SimTable run_table3(const Scenario& scenario, int jobs, Manifest& manifest) {
  std::vector<SimCase> cases;
  for (double tauM : scenario.tauM) {
    const double tauMin = tauM > 0.0 ? std::min(scenario.table3TauMin, tauM) : 0.0;
    for (int run = 0; run < scenario.runs; ++run) {
      cases.push_back({scenario.table3Sigma, scenario.table3H, tauMin, tauM, run});
    }
  }
  return run_cases(scenario, cases, jobs, "table3", "traces/table3", manifest);
}

SimTable run_sweep(const Scenario& scenario, int jobs, Manifest& manifest) {
  std::vector<SimCase> cases;
  for (double sigma : scenario.sigma) {
    for (double tauM : scenario.tauM) {
      const double tauMin = tauM > 0.0 ? std::min(scenario.table3TauMin, tauM) : 0.0;
      for (int run = 0; run < scenario.runs; ++run) {
        cases.push_back({sigma, scenario.trigger.h, tauMin, tauM, run});
      }
    }
  }
  return run_cases(scenario, cases, jobs, "sweep", "traces/sweep", manifest);
}

Certificate run_certify(const Scenario& scenario, Manifest& manifest) {
  const auto start = Clock::now();
  const ClosedLoopModel model = scenario.model();
  const double deltaM = scenario.trigger.delta_M();
  const Certificate cert = certify_polytopic(model, deltaM, scenario.trigger.sigma,
                                             scenario.hessianVertices(), scenario.certifyOptions());
  write_certificate(cert, scenario.outDir / "certificate.json");
  manifest.add("certificate", "certificate.json",
               {{"delta_M", format_number(deltaM)},
                {"sigma", format_number(scenario.trigger.sigma)},
                {"verdict", to_string(cert.verdict)}});
  manifest.setTiming("certify", seconds_since(start));
  return cert;
}

SimRow run_simulate(const Scenario& scenario, Manifest& manifest) {
  const auto start = Clock::now();
  const ClosedLoopModel model = scenario.model();
  TriggerDelayConfig cfg = scenario.trigger;
  SimRow row;
  row.sigma = cfg.sigma;
  row.h = cfg.h;
  row.tauMin = cfg.tau_m;
  row.tauMax = cfg.tau_M;
  row.seed = cfg.seed;
  try {
    const SimTrace trace = simulate(model, cfg, scenario.xi0, scenario.T, scenario.dt);
    row.transmissions = trace.transmissionCount();
    row.avgInterEvent = trace.avgInterEvent;
    row.indices = trace.indices;
    row.finalNorm = trace.states.back().norm();
    row.trace = trace_file_name(scenario.name, cfg.sigma, cfg.tau_M, cfg.seed);
    write_trace_csv(model, trace, scenario.outDir / row.trace);
    write_event_log_csv(trace.log, scenario.outDir / "events.csv");
    const std::map<std::string, std::string> params{{"sigma", format_number(cfg.sigma)},
                                                    {"h", format_number(cfg.h)},
                                                    {"tau_m", format_number(cfg.tau_m)},
                                                    {"tau_M", format_number(cfg.tau_M)},
                                                    {"seed", std::to_string(cfg.seed)}};
    manifest.add("trace_csv", row.trace, params);
    manifest.add("event_log_csv", "events.csv", params);
  } catch (const NonFiniteState&) {
    row.diverged = true;
  }
  manifest.setTiming("simulate", seconds_since(start));
  return row;
}

}  // namespace phetc
