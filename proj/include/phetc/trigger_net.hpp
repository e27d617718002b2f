#pragma once

#include "phetc/ph_core.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace phetc {

/// Sampling, trigger and network-delay parameters.
struct TriggerDelayConfig {
  double h = 0.3;      ///< sampling period [s]
  double sigma = 0.1;  ///< trigger threshold
  Mat Omega = Mat::Identity(1, 1);
  double tau_m = 0.0;  ///< minimum delay [s]
  double tau_M = 0.0;  ///< maximum delay [s]
  std::uint64_t seed = 1;

  /// Upper bound on t - lh over a sampling interval.
  double delta_M() const { return h + tau_M; }

  /// Throws ConfigError. tau_m = tau_M = 0 is accepted as the delay-free case.
  void validate() const;
};

struct SampleRecord {
  double t;
  Vec y1;
  Vec e;
  bool triggered;
};

struct Transmission {
  double t;        ///< sampling instant t_k
  double delay;    ///< tau(t_k) after arrival-order enforcement
  double arrival;  ///< t_k + tau(t_k)
  Vec payload;     ///< y1(t_k)
};

/// Samples S1 and transmissions S2 of one simulation run.
class TransmissionLog {
 public:
  explicit TransmissionLog(Vec initialHeld) : initial_(std::move(initialHeld)) {}

  void recordSample(double t, Vec y1, Vec e, bool triggered);

  /// Appends a transmission for the latest sample. When t + delay would not
  /// come strictly after the previous arrival the delay is re-clamped to
  /// (previous arrival - t) + 1e-9. Returns the stored record.
  const Transmission& recordTransmission(double t, double delay, Vec payload);

  const std::vector<SampleRecord>& samples() const { return samples_; }
  const std::vector<Transmission>& transmissions() const { return transmissions_; }
  const Vec& initialHeld() const { return initial_; }

 private:
  Vec initial_;
  std::vector<SampleRecord> samples_;
  std::vector<Transmission> transmissions_;
};

/// e^T Omega e - sigma y1^T Omega y1 >= 0, inclusive.
bool check_trigger(const TriggerDelayConfig& cfg, const Vec& e, const Vec& y1);

/// Uniform draw on [tau_m, tau_M], a pure function of (seed, t_k).
double sample_delay(const TriggerDelayConfig& cfg, double t_k);

/// Payload of the latest transmission with arrival <= t, else the initial value.
Vec held_value(const TransmissionLog& log, double t);

/// Columns: t, y1, e, triggered, delay, arrival (one row per sample).
void write_event_log_csv(const TransmissionLog& log, const std::filesystem::path& path);

/// splitmix64 finalizer; used to derive reproducible per-run seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace phetc
