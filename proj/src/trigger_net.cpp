#include "phetc/trigger_net.hpp"

#include "phetc/csv.hpp"
#include "phetc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>

namespace phetc {

void TriggerDelayConfig::validate() const {
  if (!(h > 0.0)) throw ConfigError(fmt::format("h must be positive, got {}", h));
  if (!(sigma >= 0.0)) throw ConfigError(fmt::format("sigma must be >= 0, got {}", sigma));
  if (Omega.rows() == 0 || Omega.rows() != Omega.cols()) {
    throw ConfigError("Omega must be a nonempty square matrix");
  }
  if (!(Omega - Omega.transpose()).isZero(1e-12 * std::max(1.0, Omega.norm()))) {
    throw ConfigError("Omega must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(Omega, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ConfigError("Omega must be positive definite");
  const bool delayFree = tau_m == 0.0 && tau_M == 0.0;
  if (!delayFree && !(tau_m > 0.0 && tau_m <= tau_M)) {
    throw ConfigError(
        fmt::format("delay bounds need 0 < tau_m <= tau_M (got {}, {})", tau_m, tau_M));
  }
}

void TransmissionLog::recordSample(double t, Vec y1, Vec e, bool triggered) {
  samples_.push_back({t, std::move(y1), std::move(e), triggered});
}

const Transmission& TransmissionLog::recordTransmission(double t, double delay, Vec payload) {
  if (!transmissions_.empty()) {
    const double previous = transmissions_.back().arrival;
    if (t + delay <= previous) delay = (previous - t) + 1e-9;
  }
  transmissions_.push_back({t, delay, t + delay, std::move(payload)});
  return transmissions_.back();
}

bool check_trigger(const TriggerDelayConfig& cfg, const Vec& e, const Vec& y1) {
  if (e.size() != cfg.Omega.rows() || y1.size() != cfg.Omega.rows()) {
    throw DimensionMismatch("trigger vectors do not match Omega");
  }
  return e.dot(cfg.Omega * e) - cfg.sigma * y1.dot(cfg.Omega * y1) >= 0.0;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double sample_delay(const TriggerDelayConfig& cfg, double t_k) {
  if (cfg.tau_M <= cfg.tau_m) return cfg.tau_m;
  const std::uint64_t key = mix64(cfg.seed ^ mix64(std::bit_cast<std::uint64_t>(t_k)));
  const double unit = static_cast<double>(key >> 11) * 0x1.0p-53;  // [0, 1)
  return cfg.tau_m + unit * (cfg.tau_M - cfg.tau_m);
}

Vec held_value(const TransmissionLog& log, double t) {
  const auto& tx = log.transmissions();
  auto it = std::upper_bound(tx.begin(), tx.end(), t,
                             [](double value, const Transmission& x) { return value < x.arrival; });
  if (it == tx.begin()) return log.initialHeld();
  return std::prev(it)->payload;
}

void write_event_log_csv(const TransmissionLog& log, const std::filesystem::path& path) {
  CsvTable table;
  table.header = {"t", "y1", "e", "triggered", "delay", "arrival"};
  const auto& tx = log.transmissions();
  std::size_t next = 0;
  auto joined = [](const Vec& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += format_number(v(i));
    }
    return s;
  };
  for (const auto& sample : log.samples()) {
    std::string delay = "-", arrival = "-";
    if (sample.triggered && next < tx.size() && tx[next].t == sample.t) {
      delay = format_number(tx[next].delay);
      arrival = format_number(tx[next].arrival);
      ++next;
    }
    table.rows.push_back({format_number(sample.t), joined(sample.y1), joined(sample.e),
                          sample.triggered ? "1" : "0", delay, arrival});
  }
  write_csv(path, table);
}

}  // namespace phetc
