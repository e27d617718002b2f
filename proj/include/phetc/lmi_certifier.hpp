#pragma once

#include "phetc/affine_matrix.hpp"
#include "phetc/ph_core.hpp"
#include "phetc/sdp.hpp"

#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace phetc {

/// Constant data entering the stability conditions.
struct LmiData {
  Mat A, Ad, Ae, Gcal;
  double deltaM = 0.0;
  double sigma = 0.0;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return Ae.cols(); }

  /// Throws NonConstantMatrices when the model has state-dependent matrices.
  static LmiData from_model(const ClosedLoopModel& model, double deltaM, double sigma);
};

/// Decision vector layout x = (P, Q, Omega), each stored as an upper triangle.
struct LmiVariables {
  Eigen::Index n = 0;
  Eigen::Index m = 0;

  Eigen::Index count() const { return 2 * sym_size(n) + sym_size(m); }
  AffineMatrix P() const { return AffineMatrix::symmetricVariable(0, n, count()); }
  AffineMatrix Q() const { return AffineMatrix::symmetricVariable(sym_size(n), n, count()); }
  AffineMatrix Omega() const {
    return AffineMatrix::symmetricVariable(2 * sym_size(n), m, count());
  }

  Eigen::VectorXd pack(const Mat& P, const Mat& Q, const Mat& Omega) const;
  Mat unpackP(const Eigen::VectorXd& x) const { return unpack_symmetric(x, 0, n); }
  Mat unpackQ(const Eigen::VectorXd& x) const { return unpack_symmetric(x, sym_size(n), n); }
  Mat unpackOmega(const Eigen::VectorXd& x) const {
    return unpack_symmetric(x, 2 * sym_size(n), m);
  }
};

/// Four-block matrix Xi(P, Q, Omega) for a fixed Hessian; blocks are sized
/// (n, n, n, m) for (gradH_t, gradH delayed, window average, e).
AffineMatrix build_xi(const LmiData& data, const Mat& hess, const LmiVariables& vars);
Mat build_xi(const LmiData& data, const Mat& hess, const Mat& P, const Mat& Q, const Mat& Omega);

/// How the quadratic delta_M^2 (.)^T Q (.) term is brought into LMI form.
enum class CornerForm {
  /// [[Theta0, *], [delta_M Q L, -Q]]: equivalent to Xi < 0 whenever Q > 0.
  Congruence,
  /// [[Theta0, *], [delta_M L, -(1/alpha) I]] paired with Q <= alpha I.
  AlphaBound,
};

const char* to_string(CornerForm form);

/// Five-block Schur form, affine in (P, Q, Omega) and in the Hessian.
/// L = [H A, H A_d, 0, H A_e].
AffineMatrix build_theta(const LmiData& data, const Mat& hess, const LmiVariables& vars,
                         CornerForm form = CornerForm::Congruence, double alpha = 1.0);

/// Schur form with the true -Q^{-1}/delta_M^2 corner block (numeric only).
Mat build_theta_exact(const LmiData& data, const Mat& hess, const Mat& P, const Mat& Q,
                      const Mat& Omega);

/// Cartesian product of per-entry Hessian intervals; each bound sets the
/// symmetric pair (i, j), (j, i) of the base matrix to lo or hi.
struct HessianBound {
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  double lo = 0.0;
  double hi = 0.0;
};
std::vector<Mat> enumerate_vertices(const Mat& base, const std::vector<HessianBound>& bounds);

struct ConstraintMargin {
  std::string name;
  double minEigenvalue = 0.0;
};

struct Certificate {
  Verdict verdict = Verdict::Undecided;
  double deltaM = 0.0;
  double sigma = 0.0;
  CornerForm corner = CornerForm::Congruence;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.0;
  double validityRadius = std::numeric_limits<double>::infinity();
  Mat P, Q, Omega;
  std::vector<Mat> vertices;
  /// Smallest eigenvalue of each raw constraint (P, Q, Omega, -Theta_j, ...)
  /// at the witness, from an eigensolver independent of the engine.
  std::vector<ConstraintMargin> margins;
  /// max_j lambda_max(Xi(H_j)) at the witness.
  double xiMaxEigenvalue = std::numeric_limits<double>::quiet_NaN();
  std::string engine;
  int newtonIterations = 0;
  double engineMargin = 0.0;
  double dualObjective = 0.0;
  double dualResidual = 0.0;
  std::string message;

  bool feasible() const { return verdict == Verdict::Feasible; }
};

struct CertifyOptions {
  CornerForm corner = CornerForm::Congruence;
  /// Tried in order for CornerForm::AlphaBound.
  std::vector<double> alphas{1e-3, 1e-2, 1e-1, 1.0};
  /// Strictness margin; <= 0 selects 1e-6 (1 + |A|).
  double epsilon = 0.0;
  /// Reported with every certificate; the vertex set must already cover it.
  double validityRadius = std::numeric_limits<double>::infinity();
  std::shared_ptr<const FeasibilityEngine> engine;
};

double default_epsilon(const Mat& A);

/// Theta_j < -eps I at every vertex, P, Q, Omega >= eps I (plus Q <= alpha I
/// for AlphaBound). Feasible verdicts are re-verified independently and
/// downgraded to undecided when the check fails.
Certificate certify_polytopic(const LmiData& data, const std::vector<Mat>& vertices,
                              const CertifyOptions& options = {});
/// Throws NonConstantMatrices for state-dependent models.
Certificate certify_polytopic(const ClosedLoopModel& model, double deltaM, double sigma,
                              const std::vector<Mat>& vertices, const CertifyOptions& options = {});

/// Linear port-Hamiltonian case: the Hessian is the constant energy matrix M.
Certificate certify_linear(const Mat& M, const Mat& A, const Mat& Ad, const Mat& Ae,
                           const Mat& Gcal, double deltaM, double sigma,
                           const CertifyOptions& options = {});

/// The feasibility problem certify_polytopic hands to the engine.
FeasibilityProblem polytopic_problem(const LmiData& data, const std::vector<Mat>& vertices,
                                     CornerForm corner, double alpha, double epsilon);

struct SigmaMaxResult {
  double deltaM = 0.0;
  double sigmaMax = 0.0;
  CornerForm corner = CornerForm::Congruence;
  double alphaUsed = std::numeric_limits<double>::quiet_NaN();
  int newtonIterations = 0;
  int solves = 0;
  /// Three random points below sigmaMax certified again.
  bool monotoneSpotCheck = true;
  Certificate certificate;  ///< at sigmaMax
};

/// Bisection on sigma in [0, sigmaHi] down to width tol. Throws
/// NoFeasiblePoint when sigma = 0 is not certified.
SigmaMaxResult sigma_max(const LmiData& data, const std::vector<Mat>& vertices, double tol = 0.01,
                         double sigmaHi = 10.0, const CertifyOptions& options = {});
SigmaMaxResult sigma_max(const ClosedLoopModel& model, double deltaM,
                         const std::vector<Mat>& vertices, double tol = 0.01,
                         double sigmaHi = 10.0, const CertifyOptions& options = {});

/// JSON text with verdict, parameters, full-precision witness and margins.
void write_certificate(const Certificate& cert, const std::filesystem::path& path);
Certificate read_certificate(const std::filesystem::path& path);

}  // namespace phetc
