#include "phetc/errors.hpp"
#include "phetc/lmi_certifier.hpp"
#include "phetc/pendulum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace phetc;

namespace {

Mat random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng);
  }
  return m;
}

Mat random_spd(std::mt19937_64& rng, Eigen::Index n) {
  const Mat B = random_matrix(rng, n, n);
  return B * B.transpose() + 0.1 * Mat::Identity(n, n);
}

double lambda_max(const Mat& S) {
  return Eigen::SelfAdjointEigenSolver<Mat>(S, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

LmiData random_lmi_data(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  return {random_matrix(rng, n, n), random_matrix(rng, n, n), random_matrix(rng, n, m),
          random_matrix(rng, m, n), u(rng), u(rng)};
}

}  // namespace

TEST(Xi, QuadraticFormMatchesDerivativeBound) {
  // psi^T Xi psi written out as d/dt of the functional after the integral
  // inequality and the trigger S-procedure.
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 3, m = 1 + trial % 2;
    const LmiData d = random_lmi_data(rng, n, m);
    const Mat H0 = random_matrix(rng, n, n), H = H0 + H0.transpose();
    const Mat P = random_spd(rng, n), Q = random_spd(rng, n), W = random_spd(rng, m);
    const Vec a = random_matrix(rng, n, 1), b = random_matrix(rng, n, 1), c = random_matrix(rng, n, 1);
    const Vec e = random_matrix(rng, m, 1);

    const Vec s = d.A * a + d.Ad * b + d.Ae * e;
    const Vec wdot = H * s;
    const Vec diff = a - b, phi = a + b - 2.0 * c, y = d.Gcal * b;
    const double expected = a.dot(s) + 2.0 * a.dot(P * wdot) +
                            d.deltaM * d.deltaM * wdot.dot(Q * wdot) - diff.dot(Q * diff) -
                            3.0 * phi.dot(Q * phi) + d.sigma * y.dot(W * y) - e.dot(W * e);

    Vec psi(3 * n + m);
    psi << a, b, c, e;
    const Mat xi = build_xi(d, H, P, Q, W);
    EXPECT_NEAR(psi.dot(xi * psi), expected, 1e-9 * (1.0 + std::abs(expected)));
    EXPECT_TRUE(xi.isApprox(xi.transpose()));

    const LmiVariables vars{n, m};
    EXPECT_TRUE(build_xi(d, H, vars).evaluate(vars.pack(P, Q, W)).isApprox(xi, 1e-12));
  }
}

TEST(Theta, CongruenceFormHasTheSignOfXi) {
  std::mt19937_64 rng(2);
  int negatives = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 3, m = 1;
    LmiData d = random_lmi_data(rng, n, m);
    // Shift A to make negative-definite instances common.
    d.A -= (trial % 4) * Mat::Identity(n, n);
    const Mat H = random_spd(rng, n);
    const Mat P = 0.1 * random_spd(rng, n), Q = 0.1 * random_spd(rng, n), W = random_spd(rng, m);
    const LmiVariables vars{n, m};
    const Vec x = vars.pack(P, Q, W);
    const double xiMax = lambda_max(build_xi(d, H, P, Q, W));
    const double congMax = lambda_max(build_theta(d, H, vars, CornerForm::Congruence).evaluate(x));
    const double exactMax = lambda_max(build_theta_exact(d, H, P, Q, W));
    EXPECT_EQ(xiMax < 0, congMax < 0);
    EXPECT_EQ(xiMax < 0, exactMax < 0);
    negatives += xiMax < 0;
  }
  EXPECT_GT(negatives, 0);
}

TEST(Theta, AlphaFormIsSufficient) {
  // With Q <= alpha I the alpha corner dominates the exact quadratic term.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 3, m = 1;
    LmiData d = random_lmi_data(rng, n, m);
    d.A -= 2.0 * Mat::Identity(n, n);
    const Mat H = random_spd(rng, n);
    const Mat P = 0.1 * random_spd(rng, n), Q = 0.05 * random_spd(rng, n), W = random_spd(rng, m);
    const double alpha = lambda_max(Q) * 1.5;
    const LmiVariables vars{n, m};
    const Mat theta = build_theta(d, H, vars, CornerForm::AlphaBound, alpha).evaluate(vars.pack(P, Q, W));
    if (lambda_max(theta) < 0) EXPECT_LT(lambda_max(build_xi(d, H, P, Q, W)), 0.0);
  }
}

TEST(Vertices, CartesianProduct) {
  const Mat base = Mat::Identity(3, 3);
  const auto v = enumerate_vertices(base, {{0, 0, -1.0, 1.0}, {0, 1, -0.5, 0.5}});
  ASSERT_EQ(v.size(), 4u);
  EXPECT_DOUBLE_EQ(v[0](0, 0), -1.0);
  EXPECT_DOUBLE_EQ(v[0](1, 0), -0.5);
  EXPECT_DOUBLE_EQ(v[0](0, 1), -0.5);
  EXPECT_DOUBLE_EQ(v[3](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(v[3](0, 1), 0.5);
}

TEST(Certify, PendulumFeasibleCellHasAValidWitness) {
  const auto model = make_pendulum_model();
  const auto vertices = pendulum_hessian_vertices(3.0);
  const Certificate c = certify_polytopic(model, 0.3, 0.1, vertices);
  ASSERT_TRUE(c.feasible()) << c.message;
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(c.P).eigenvalues().minCoeff(), 0.0);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(c.Q).eigenvalues().minCoeff(), 0.0);
  EXPECT_GT(c.Omega(0, 0), 0.0);
  EXPECT_LT(c.xiMaxEigenvalue, 0.0);
  for (const auto& mg : c.margins) EXPECT_GE(mg.minEigenvalue, 0.5 * c.epsilon) << mg.name;

  // Any Hessian in the hull keeps Xi negative definite at the witness.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const LmiData data = LmiData::from_model(model, 0.3, 0.1);
  for (int k = 0; k < 50; ++k) {
    const double l = u(rng);
    const Mat H = l * vertices[0] + (1.0 - l) * vertices[1];
    EXPECT_LT(lambda_max(build_xi(data, H, c.P, c.Q, c.Omega)), 0.0);
  }
}

TEST(Certify, LargeDelayIsRejected) {
  const auto model = make_pendulum_model();
  const Certificate c = certify_polytopic(model, 0.7, 0.0, pendulum_hessian_vertices(3.0));
  EXPECT_EQ(c.verdict, Verdict::Infeasible) << c.message;
  EXPECT_THROW(sigma_max(model, 0.7, pendulum_hessian_vertices(3.0)), NoFeasiblePoint);
}

TEST(Certify, AlphaVariantIsMoreConservative) {
  const auto model = make_pendulum_model();
  const auto vertices = pendulum_hessian_vertices(3.0);
  CertifyOptions o;
  o.corner = CornerForm::AlphaBound;
  const SigmaMaxResult alpha = sigma_max(model, 0.1, vertices, 0.01, 10.0, o);
  const SigmaMaxResult cong = sigma_max(model, 0.1, vertices);
  EXPECT_LE(alpha.sigmaMax, cong.sigmaMax + 0.01);
  EXPECT_TRUE(std::isfinite(alpha.alphaUsed));
  EXPECT_LT(alpha.certificate.xiMaxEigenvalue, 0.0);
}

TEST(Certify, LinearCaseUsesTheEnergyMatrix) {
  const auto model = make_pendulum_model();
  const Mat M = Eigen::Vector3d(1.0, 1.0, 3.0).asDiagonal();
  const Certificate c = certify_linear(M, model.A(), model.Ad(), model.Ae(), model.Gcal(), 0.1, 0.5);
  EXPECT_TRUE(c.feasible()) << c.message;
  EXPECT_THROW(certify_linear(-M, model.A(), model.Ad(), model.Ae(), model.Gcal(), 0.1, 0.5),
               DimensionMismatch);
}

TEST(Certify, StateDependentModelIsRefused) {
  auto G = [](const Vec& x) { return Mat::Constant(1, 1, 1.0 + x(0) * x(0)); };
  auto H = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  auto grad = [](const Vec& x) { return x; };
  const PhSubsystem s1 = make_subsystem(Mat::Zero(1, 1), Mat::Zero(1, 1), StateMatrix(G, 1, 1), H,
                                        grad, {}, Vec::Zero(1));
  const PhSubsystem s2 = make_linear_subsystem(Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1),
                                               Mat::Ones(1, 1));
  const ClosedLoopModel model = assemble_interconnection(s1, s2);
  EXPECT_THROW(certify_polytopic(model, 0.1, 0.1, {Mat::Identity(2, 2)}), NonConstantMatrices);
}

TEST(SigmaMax, FrontierIsNonincreasing) {
  const auto model = make_pendulum_model();
  const auto vertices = pendulum_hessian_vertices(3.0);
  double previous = 1e9;
  for (double dm : {0.1, 0.3, 0.5}) {
    const SigmaMaxResult r = sigma_max(model, dm, vertices);
    EXPECT_LE(r.sigmaMax, previous);
    EXPECT_TRUE(r.monotoneSpotCheck);
    EXPECT_TRUE(r.certificate.feasible());
    previous = r.sigmaMax;
  }
}

TEST(CertificateIo, JsonRoundTrip) {
  const auto model = make_pendulum_model();
  const Certificate c = certify_polytopic(model, 0.3, 0.1, pendulum_hessian_vertices(3.0));
  const auto path = std::filesystem::temp_directory_path() / "phetc_cert_test.json";
  write_certificate(c, path);
  const Certificate back = read_certificate(path);
  EXPECT_EQ(back.verdict, c.verdict);
  EXPECT_EQ(back.P, c.P);
  EXPECT_EQ(back.Q, c.Q);
  EXPECT_EQ(back.Omega, c.Omega);
  EXPECT_EQ(back.vertices.size(), c.vertices.size());
  EXPECT_EQ(back.margins.size(), c.margins.size());
  EXPECT_TRUE(std::isnan(back.alpha));
  EXPECT_EQ(back.xiMaxEigenvalue, c.xiMaxEigenvalue);
  std::filesystem::remove(path);
}
