#include "phetc/pendulum.hpp"

#include <cmath>

namespace phetc {

PhSubsystem make_pendulum_plant(double zeta) {
  Mat J(2, 2), R(2, 2), G(2, 1);
  J << 0, 1, -1, 0;
  R << 0, 0, 0, zeta;
  G << 0, 1;
  auto H = [](const Vec& x) { return 0.5 * x(1) * x(1) + (1.0 - std::cos(x(0))); };
  auto grad = [](const Vec& x) {
    Vec g(2);
    g << std::sin(x(0)), x(1);
    return g;
  };
  auto hess = [](const Vec& x) {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = std::cos(x(0));
    h(1, 1) = 1.0;
    return h;
  };
  return make_subsystem(J, R, G, H, grad, hess, Vec::Zero(2));
}

PhSubsystem make_pendulum_controller(double zeta_c, double K) {
  Mat J = Mat::Zero(1, 1), R(1, 1), G(1, 1);
  R << zeta_c;
  G << 1.0;
  auto H = [K](const Vec& x) { return 0.5 * K * x(0) * x(0); };
  auto grad = [K](const Vec& x) { return Vec(K * x); };
  auto hess = [K](const Vec&) { return Mat(Mat::Constant(1, 1, K)); };
  return make_subsystem(J, R, G, H, grad, hess, Vec::Zero(1));
}

ClosedLoopModel make_pendulum_model(const PendulumParams& params) {
  return assemble_interconnection(make_pendulum_plant(params.zeta),
                                  make_pendulum_controller(params.zeta_c, params.K));
}

std::vector<Mat> pendulum_hessian_vertices(double K, double validityRadius) {
  const double lo = validityRadius >= std::numbers::pi ? -1.0 : std::cos(validityRadius);
  std::vector<Mat> vertices;
  for (double c : {lo, 1.0}) {
    Mat h = Mat::Zero(3, 3);
    h.diagonal() << c, 1.0, K;
    vertices.push_back(h);
  }
  return vertices;
}

}  // namespace phetc
