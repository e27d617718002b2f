#pragma once

#include "phetc/lmi_certifier.hpp"
#include "phetc/pendulum.hpp"
#include "phetc/ph_core.hpp"
#include "phetc/trigger_net.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace phetc {

/// Explicit linear subsystems with H_i = 1/2 x^T M_i x.
struct LinearModelSpec {
  Mat J1, R1, G1, M1;
  Mat J2, R2, G2, M2;
};

/// One declarative benchmark description.
struct Scenario {
  // [model]
  std::string modelType = "pendulum";  ///< "pendulum" or "linear"
  PendulumParams pendulum;
  LinearModelSpec linear;

  // [trigger] and [network]
  TriggerDelayConfig trigger;

  // [simulation]
  Vec xi0 = (Vec(3) << 2.0, 0.0, 0.0).finished();
  double T = 40.0;
  double dt = 1e-3;

  // [sweep]
  std::vector<double> deltaM{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<double> sigma{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<double> tauM{0.1, 0.2, 0.3, 0.4};
  int runs = 1;
  double table3H = 0.2;
  double table3Sigma = 0.2;
  double table3TauMin = 0.01;

  // [output]
  std::filesystem::path outDir = "out";
  std::string name = "pendulum";

  // [lmi]
  CornerForm corner = CornerForm::Congruence;
  std::vector<double> alphas{1e-3, 1e-2, 1e-1, 1.0};
  double sigmaTol = 0.01;
  double sigmaHi = 10.0;
  double epsilon = 0.0;
  double validityRadius = std::numbers::pi;

  /// Throws ConfigError.
  void validate() const;

  ClosedLoopModel model() const;
  /// Vertices of the Hessian polytope used by the certifier.
  std::vector<Mat> hessianVertices() const;
  CertifyOptions certifyOptions() const;
};

/// Parses an INI file with sections [model] [trigger] [network] [simulation]
/// [sweep] [output] [lmi]. Lists are space or comma separated; matrix rows are
/// separated by ';'. Unknown sections or keys raise ConfigError.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text);

/// Reproducible per-run seed from (root, sigma, tau_M, run index).
std::uint64_t derive_seed(std::uint64_t root, double sigma, double tauM, std::uint64_t index);

}  // namespace phetc
