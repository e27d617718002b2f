#pragma once

#include "phetc/ph_core.hpp"

#include <numbers>
#include <vector>

namespace phetc {

/// Normalized damped pendulum qdd + sin q + zeta qd = u with a
/// port-Hamiltonian controller H2 = K/2 x2^2, R2 = zeta_c, G2 = 1.
struct PendulumParams {
  double zeta = 0.1;
  double zeta_c = 1.0;
  double K = 3.0;
};

PhSubsystem make_pendulum_plant(double zeta);
PhSubsystem make_pendulum_controller(double zeta_c, double K);
ClosedLoopModel make_pendulum_model(const PendulumParams& params = {});

/// Vertices of the Hessian polytope diag(cos q, 1, K) for |q| <= validityRadius.
/// The default radius covers every q and yields diag(-1,1,K), diag(1,1,K).
std::vector<Mat> pendulum_hessian_vertices(double K, double validityRadius = std::numbers::pi);

}  // namespace phetc
