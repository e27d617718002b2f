#pragma once

#include "phetc/ph_core.hpp"
#include "phetc/trigger_net.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace phetc {

struct PerformanceIndices {
  double ise = 0.0;
  double iae = 0.0;
  double itae = 0.0;
};

/// Grid-sampled history of one closed-loop run.
struct SimTrace {
  double dt = 0.0;
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> y1, y2, held, u1, u2;
  std::vector<double> H1, Htotal;
  /// 1 on grid points that are transmission instants t_k.
  std::vector<char> event;
  /// tau(t_k) on event rows, NaN elsewhere.
  std::vector<double> delay;
  /// Sampling instant lh whose interval [lh + tau, ...) contains the grid point,
  /// i.e. t - delta(t). NaN before the first interval opens.
  std::vector<double> intervalSample;
  TransmissionLog log{Vec()};
  PerformanceIndices indices;
  /// NaN with fewer than two transmissions.
  double avgInterEvent = 0.0;

  std::size_t size() const { return times.size(); }
  std::size_t transmissionCount() const { return log.transmissions().size(); }
};

/// Fixed-step RK4 integration of the networked loop: u1 = -y2, u2 = held y1.
/// The trigger is evaluated every h; transmissions land after sample_delay,
/// snapped up to the next dt tick. The sample at t = 0 is always sent.
///
/// Throws StepMismatch when dt does not divide h, NonFiniteState when
/// |xi| exceeds 1e8 or stops being finite.
SimTrace simulate(const ClosedLoopModel& model, const TriggerDelayConfig& cfg, const Vec& xi0,
                  double T, double dt);

/// Trapezoidal ISE, IAE and ITAE of a sampled signal.
PerformanceIndices performance_indices(std::span<const double> times,
                                       std::span<const double> signal);

/// Indices of H1 along the trace.
PerformanceIndices performance_indices(const SimTrace& trace);

/// Header: t, q, qdot, x2, y1, y1_held, u1, u2, H1, Htotal, event, delay for the
/// 2+1 state, single-port layout; generic xi<i> / y1_<j> names otherwise.
std::vector<std::string> trace_csv_header(const ClosedLoopModel& model);
void write_trace_csv(const ClosedLoopModel& model, const SimTrace& trace,
                     const std::filesystem::path& path);

}  // namespace phetc
