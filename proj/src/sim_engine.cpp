#include "phetc/sim_engine.hpp"

#include "phetc/csv.hpp"
#include "phetc/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <deque>
#include <limits>

namespace phetc {

namespace {

constexpr double kDivergenceNorm = 1e8;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PendingUpdate {
  long tick;
  Vec payload;
};

long snap_up(double time, double dt) {
  return static_cast<long>(std::ceil(time / dt - 1e-7));
}

}  // namespace

SimTrace simulate(const ClosedLoopModel& model, const TriggerDelayConfig& cfg, const Vec& xi0,
                  double T, double dt) {
  cfg.validate();
  if (!(dt > 0.0)) throw StepMismatch("dt must be positive");
  const double ratio = cfg.h / dt;
  const long stepsPerSample = std::lround(ratio);
  if (stepsPerSample < 1 || std::abs(ratio - static_cast<double>(stepsPerSample)) > 1e-9 * ratio) {
    throw StepMismatch(fmt::format("h = {} is not an integer multiple of dt = {}", cfg.h, dt));
  }
  if (T < cfg.h) throw StepMismatch("horizon T must be at least h");
  if (xi0.size() != model.stateDim()) throw DimensionMismatch("initial state has the wrong size");
  if (cfg.Omega.rows() != model.portDim()) throw DimensionMismatch("Omega does not match ports");

  const long steps = std::lround(T / dt);
  const Eigen::Index m = model.portDim();

  SimTrace trace;
  trace.dt = dt;
  trace.h = cfg.h;
  trace.log = TransmissionLog(Vec::Zero(m));
  const std::size_t points = static_cast<std::size_t>(steps) + 1;
  for (auto* v : {&trace.states, &trace.y1, &trace.y2, &trace.held, &trace.u1, &trace.u2}) {
    v->reserve(points);
  }

  Vec xi = xi0;
  Vec held = trace.log.initialHeld();
  std::deque<PendingUpdate> pending;
  // Opening ticks of sampling intervals, keyed by sample time.
  std::deque<std::pair<long, double>> intervalOpenings;
  double currentInterval = kNaN;

  auto applyDue = [&](long k) {
    while (!pending.empty() && pending.front().tick <= k) {
      held = pending.front().payload;
      pending.pop_front();
    }
    while (!intervalOpenings.empty() && intervalOpenings.front().first <= k) {
      const double s = intervalOpenings.front().second;
      if (std::isnan(currentInterval) || s > currentInterval) currentInterval = s;
      intervalOpenings.pop_front();
    }
  };

  auto openInterval = [&](long tick, double sampleTime) {
    auto pos = intervalOpenings.end();
    while (pos != intervalOpenings.begin() && std::prev(pos)->first > tick) --pos;
    intervalOpenings.insert(pos, {tick, sampleTime});
  };

  auto rhs = [&](const Vec& x) { return model.interconnectionRhs(x, held); };

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    applyDue(k);

    bool isEvent = false;
    double eventDelay = kNaN;
    if (k % stepsPerSample == 0) {
      const Vec y1 = model.y1(xi);
      const Vec e = held - y1;
      const bool fire = k == 0 || check_trigger(cfg, e, y1);
      trace.log.recordSample(t, y1, e, fire);
      const double tau = sample_delay(cfg, t);
      if (fire) {
        const Transmission& tx = trace.log.recordTransmission(t, tau, y1);
        pending.push_back({snap_up(tx.arrival, dt), tx.payload});
        openInterval(snap_up(tx.arrival, dt), t);
        isEvent = true;
        eventDelay = tx.delay;
      } else {
        openInterval(snap_up(t + tau, dt), t);
      }
      applyDue(k);
    }

    trace.times.push_back(t);
    trace.states.push_back(xi);
    trace.y1.push_back(model.y1(xi));
    trace.y2.push_back(model.y2(xi));
    trace.held.push_back(held);
    trace.u1.push_back(-trace.y2.back());
    trace.u2.push_back(held);
    trace.H1.push_back(model.sys1().H(model.x1(xi)));
    trace.Htotal.push_back(model.hamiltonian(xi));
    trace.event.push_back(isEvent ? 1 : 0);
    trace.delay.push_back(eventDelay);
    trace.intervalSample.push_back(currentInterval);

    if (k == steps) break;

    const Vec k1 = rhs(xi);
    const Vec k2 = rhs(xi + 0.5 * dt * k1);
    const Vec k3 = rhs(xi + 0.5 * dt * k2);
    const Vec k4 = rhs(xi + dt * k3);
    xi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!xi.allFinite() || xi.norm() > kDivergenceNorm) {
      throw NonFiniteState(fmt::format("state diverged at t = {}", t + dt));
    }
  }

  trace.indices = performance_indices(trace);
  const auto& tx = trace.log.transmissions();
  trace.avgInterEvent = tx.size() >= 2
                            ? (tx.back().t - tx.front().t) / static_cast<double>(tx.size() - 1)
                            : kNaN;
  return trace;
}

PerformanceIndices performance_indices(std::span<const double> times,
                                       std::span<const double> signal) {
  if (times.size() != signal.size()) throw DimensionMismatch("times and signal differ in size");
  PerformanceIndices out;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double w = 0.5 * (times[i] - times[i - 1]);
    const double a = signal[i - 1], b = signal[i];
    out.ise += w * (a * a + b * b);
    out.iae += w * (std::abs(a) + std::abs(b));
    out.itae += w * (times[i - 1] * std::abs(a) + times[i] * std::abs(b));
  }
  return out;
}

PerformanceIndices performance_indices(const SimTrace& trace) {
  return performance_indices(trace.times, trace.H1);
}

std::vector<std::string> trace_csv_header(const ClosedLoopModel& model) {
  std::vector<std::string> header{"t"};
  const bool pendulumLayout = model.n1() == 2 && model.n2() == 1 && model.portDim() == 1;
  if (pendulumLayout) {
    header.insert(header.end(), {"q", "qdot", "x2", "y1", "y1_held", "u1", "u2"});
  } else {
    for (Eigen::Index i = 0; i < model.stateDim(); ++i) header.push_back(fmt::format("xi{}", i));
    for (const char* name : {"y1", "y1_held", "u1", "u2"}) {
      for (Eigen::Index j = 0; j < model.portDim(); ++j) {
        header.push_back(fmt::format("{}_{}", name, j));
      }
    }
  }
  header.insert(header.end(), {"H1", "Htotal", "event", "delay"});
  return header;
}

void write_trace_csv(const ClosedLoopModel& model, const SimTrace& trace,
                     const std::filesystem::path& path) {
  CsvTable table;
  table.header = trace_csv_header(model);
  table.rows.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    row.push_back(format_number(trace.times[i]));
    for (Eigen::Index j = 0; j < trace.states[i].size(); ++j) {
      row.push_back(format_number(trace.states[i](j)));
    }
    for (const auto* series : {&trace.y1, &trace.held, &trace.u1, &trace.u2}) {
      const Vec& v = (*series)[i];
      for (Eigen::Index j = 0; j < v.size(); ++j) row.push_back(format_number(v(j)));
    }
    row.push_back(format_number(trace.H1[i]));
    row.push_back(format_number(trace.Htotal[i]));
    row.push_back(trace.event[i] ? "1" : "0");
    row.push_back(std::isnan(trace.delay[i]) ? "" : format_number(trace.delay[i]));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace phetc
