#include "phetc/errors.hpp"
#include "phetc/lk_analysis.hpp"
#include "phetc/lmi_certifier.hpp"
#include "phetc/pendulum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace phetc;

namespace {

/// Linearised pendulum loop written with quadratic energies.
ClosedLoopModel linear_pendulum(double m1 = 1.0) {
  Mat J1(2, 2), R1 = Mat::Zero(2, 2), G1(2, 1);
  J1 << 0, 1, -1, 0;
  R1(1, 1) = 0.1;
  G1 << 0, 1;
  return assemble_interconnection(
      make_linear_subsystem(J1, R1, G1, m1 * Mat::Identity(2, 2)),
      make_linear_subsystem(Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1), 3.0 * Mat::Ones(1, 1)));
}

/// H = 1/2 |xi|^2 on a 2 + 1 split.
ClosedLoopModel unit_energy_model() {
  Mat J1(2, 2), G1(2, 1);
  J1 << 0, 1, -1, 0;
  G1 << 0, 1;
  return assemble_interconnection(
      make_linear_subsystem(J1, Mat::Zero(2, 2), G1, Mat::Identity(2, 2)),
      make_linear_subsystem(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1)));
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST(Wirtinger, ConstantFunctionIsTight) {
  const auto t = grid(0.3, 1.7, 64);
  std::vector<Vec> w(t.size(), Eigen::Vector2d(1.5, -0.5));
  Mat Q(2, 2);
  Q << 2.0, 0.3, 0.3, 1.0;
  const double lhs = wirtinger_lhs(Q, t, w);
  EXPECT_LE(std::abs(wirtinger_gap(Q, t, w)), 1e-9 * lhs);
}

TEST(Wirtinger, ReversedInnerOrientationFailsTheConstantCase) {
  // With int_s^a the middle term becomes I1 + (2/L) int C, which is 2 L c for
  // constant c and would give a negative gap.
  const auto t = grid(0.0, 2.0, 32);
  const double L = 2.0, c = 1.0;
  const double lhs = L * c * c;
  const double phiReversed = L * c + (2.0 / L) * (L * L * c / 2.0);
  EXPECT_LT(lhs - (L * c) * (L * c) / L - 3.0 * phiReversed * phiReversed / L, 0.0);
  std::vector<Vec> w(t.size(), Vec::Constant(1, c));
  EXPECT_NEAR(wirtinger_gap(Mat::Identity(1, 1), t, w), 0.0, 1e-12);
}

TEST(Wirtinger, AffineFunctionIsTight) {
  const auto t = grid(-1.0, 2.0, 101);
  std::vector<Vec> w;
  for (double s : t) w.push_back(Eigen::Vector2d(1.0 + 2.0 * s, -3.0 * s));
  const double lhs = wirtinger_lhs(Mat::Identity(2, 2), t, w);
  EXPECT_LE(std::abs(wirtinger_gap(Mat::Identity(2, 2), t, w)), 1e-10 * lhs);
}

TEST(Wirtinger, SineIsStrict) {
  const auto t = grid(0.0, 1.0, 10001);
  std::vector<Vec> w;
  for (double s : t) w.push_back(Vec::Constant(1, std::sin(5.0 * s)));
  EXPECT_GT(wirtinger_gap(Mat::Identity(1, 1), t, w), 1e-3);
}

TEST(Wirtinger, RandomPiecewiseLinearIsNonnegative) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nrm;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    const double a = u(rng), b = a + 0.1 + std::abs(u(rng));
    std::vector<double> t = grid(a, b, 16 + trial % 40);
    std::vector<Vec> w;
    for (std::size_t i = 0; i < t.size(); ++i) {
      Vec v(n);
      for (Eigen::Index j = 0; j < n; ++j) v(j) = nrm(rng);
      w.push_back(v);
    }
    Mat B(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) B(i, j) = nrm(rng);
    }
    const Mat Q = B * B.transpose() + 1e-2 * Mat::Identity(n, n);
    EXPECT_GE(wirtinger_gap(Q, t, w), -1e-8 * wirtinger_lhs(Q, t, w));
  }
  EXPECT_THROW(wirtinger_gap(Mat::Identity(1, 1), grid(0, 1, 15), std::vector<Vec>(15, Vec::Ones(1))),
               DimensionMismatch);
}

TEST(EvalV, TrivialCases) {
  const auto model = make_pendulum_model();
  HistoryBuffer buf(1e-3);
  for (int k = 0; k <= 400; ++k) buf.push(k * 1e-3, Vec::Zero(3), Vec::Zero(3));
  EXPECT_EQ(eval_V(Mat::Identity(3, 3), Mat::Identity(3, 3), buf, model, 0.3), 0.0);

  HistoryBuffer moving(1e-3);
  for (int k = 0; k <= 400; ++k) {
    const Vec xi = Eigen::Vector3d(std::cos(k * 1e-3), 0.2, -0.1);
    moving.push(k * 1e-3, xi, model.gradTotal(xi));
  }
  EXPECT_DOUBLE_EQ(eval_V(Mat::Zero(3, 3), Mat::Zero(3, 3), moving, model, 0.3),
                   model.hamiltonian(moving.state(400)));
  EXPECT_THROW(eval_V(Mat::Zero(3, 3), Mat::Zero(3, 3), moving, model, 0.5), InsufficientHistory);
}

TEST(EvalV, ExponentialOracle) {
  const auto model = unit_energy_model();
  const double dt = 1e-3;
  HistoryBuffer buf(dt);
  for (int k = 0; k <= 2000; ++k) {
    const Vec xi = Eigen::Vector3d(std::exp(-k * dt), 0.0, 0.0);
    buf.push(k * dt, xi, model.gradTotal(xi));
  }
  Mat P = Mat::Zero(3, 3), Q = Mat::Zero(3, 3);
  P(0, 0) = 0.7;
  Q(0, 0) = 1.3;
  for (double delta : {0.3, 0.3004, 0.75}) {
    const double t = 2.0, c = t - delta;
    const double v2 = delta * Q(0, 0) *
                      (std::exp(-2.0 * c) / 4.0 - std::exp(-2.0 * t) * (delta / 2.0 + 0.25));
    const double expected = (0.5 + P(0, 0)) * std::exp(-2.0 * t) + v2;
    EXPECT_NEAR(eval_V(P, Q, buf, model, delta), expected, 1e-4 * expected) << delta;
  }
}

TEST(HistoryBuffer, GridAndTrim) {
  HistoryBuffer buf(0.01);
  buf.push(0.0, Vec::Zero(1), Vec::Zero(1));
  EXPECT_THROW(buf.push(0.015, Vec::Zero(1), Vec::Zero(1)), DimensionMismatch);
  for (int k = 1; k <= 100; ++k) buf.push(k * 0.01, Vec::Zero(1), Vec::Zero(1));
  buf.trim(0.3);
  EXPECT_GE(buf.span(), 0.3 - 1e-12);
  EXPECT_LE(buf.span(), 0.31 + 1e-12);
}

TEST(Vdot, EquilibriumIsFlat) {
  const auto model = make_pendulum_model();
  TriggerDelayConfig cfg;
  const SimTrace trace = simulate(model, cfg, Vec::Zero(3), 3.0, 1e-3);
  const VdotSeries s = vdot_along_trace(trace, model, Mat::Identity(3, 3), Mat::Identity(3, 3),
                                        Mat::Identity(1, 1), 0.1, 0.3);
  for (std::size_t i = 1; i + 1 < s.t.size(); ++i) EXPECT_EQ(s.Vdot[i], 0.0);
}

TEST(Vdot, NumericalDerivativeRespectsTheBoundOnCertifiedLinearLoops) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const auto model = linear_pendulum(1.0 + 0.5 * trial);
    TriggerDelayConfig cfg;
    cfg.h = 0.1;
    cfg.tau_m = 0.01;
    cfg.tau_M = 0.05;
    cfg.sigma = 0.05;
    cfg.seed = 100 + trial;
    const Mat M = model.hessTotal(Vec::Zero(3));
    const Certificate c = certify_linear(M, model.A(), model.Ad(), model.Ae(), model.Gcal(),
                                         cfg.delta_M(), cfg.sigma);
    ASSERT_TRUE(c.feasible()) << c.message;
    const Vec xi0 = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const SimTrace trace = simulate(model, cfg, xi0, 8.0, 1e-3);
    const VdotSeries s = vdot_along_trace(trace, model, c.P, c.Q, c.Omega, cfg.sigma, cfg.delta_M());
    std::size_t checked = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (std::isnan(s.bound[i]) || std::isnan(s.Vdot[i])) continue;
      ++checked;
      EXPECT_LE(s.Vdot[i], s.bound[i] + 1e-4 * s.maxV) << "t = " << s.t[i];
    }
    EXPECT_GT(checked, s.t.size() / 2);
    EXPECT_GE(s.fractionNonIncreasing, 0.99);
  }
}
