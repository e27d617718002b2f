#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace phetc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

/// A matrix that is either constant or a function of the subsystem state.
class StateMatrix {
 public:
  StateMatrix(Mat constant);  // NOLINT(google-explicit-constructor)
  template <typename Derived>
  StateMatrix(const Eigen::MatrixBase<Derived>& constant) : StateMatrix(Mat(constant)) {}  // NOLINT
  StateMatrix(MatrixField fn, Eigen::Index rows, Eigen::Index cols);

  bool isConstant() const { return !fn_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  Mat operator()(const Vec& x) const;

  /// Throws NonConstantMatrices for callback-backed matrices.
  const Mat& constant() const;

  /// Same matrix, evaluated at x + shift.
  StateMatrix shifted(const Vec& shift) const;

 private:
  Mat constant_;
  MatrixField fn_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
};

/// One port-Hamiltonian block
///   xdot = (J - R) gradH + G u,   y = G^T gradH.
/// Coordinates are shifted so that the declared equilibrium sits at the
/// origin and H(0) = 0. Immutable after construction.
class PhSubsystem {
 public:
  Eigen::Index stateDim() const { return n_; }
  Eigen::Index portDim() const { return m_; }

  Mat J(const Vec& x) const { return J_(x); }
  Mat R(const Vec& x) const { return R_(x); }
  Mat G(const Vec& x) const { return G_(x); }
  const StateMatrix& structure() const { return J_; }
  const StateMatrix& dissipation() const { return R_; }
  const StateMatrix& inputMap() const { return G_; }
  bool isConstant() const { return J_.isConstant() && R_.isConstant() && G_.isConstant(); }

  double H(const Vec& x) const { return H_(x); }
  Vec gradH(const Vec& x) const { return grad_(x); }
  Mat hessH(const Vec& x) const { return hess_(x); }
  bool hasAnalyticHessian() const { return analyticHessian_; }

  /// y = G(x)^T gradH(x)
  Vec output(const Vec& x) const;
  /// (J - R) gradH + G u
  Vec dynamics(const Vec& x, const Vec& u) const;

  /// Equilibrium in the original (unshifted) coordinates.
  const Vec& equilibrium() const { return equilibrium_; }

 private:
  friend PhSubsystem make_subsystem(StateMatrix, StateMatrix, StateMatrix, ScalarField,
                                    VectorField, MatrixField, const Vec&);
  PhSubsystem() = default;

  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  StateMatrix J_{Mat()};
  StateMatrix R_{Mat()};
  StateMatrix G_{Mat()};
  ScalarField H_;
  VectorField grad_;
  MatrixField hess_;
  bool analyticHessian_ = false;
  Vec equilibrium_;
};

/// Validates and builds a subsystem. An empty hessH selects the central
/// finite-difference fallback on gradH.
///
/// Throws AntisymmetryViolation, DissipationViolation, EquilibriumViolation,
/// GradientMismatch or DimensionMismatch.
PhSubsystem make_subsystem(StateMatrix J, StateMatrix R, StateMatrix G, ScalarField H,
                           VectorField gradH, MatrixField hessH, const Vec& equilibrium);

/// Linear subsystem with quadratic energy H = 1/2 x^T M x.
PhSubsystem make_linear_subsystem(const Mat& J, const Mat& R, const Mat& G, const Mat& M);

/// Central finite-difference Jacobian of a gradient field, step 1e-5 (1 + |x_i|).
Mat finite_difference_hessian(const VectorField& grad, const Vec& x);

/// Two subsystems coupled through the network:
///   xi_dot = A gradH(xi) + A_d gradH(xi delayed) + A_e e(t - delta).
class ClosedLoopModel {
 public:
  const PhSubsystem& sys1() const { return sys1_; }
  const PhSubsystem& sys2() const { return sys2_; }

  Eigen::Index n1() const { return sys1_.stateDim(); }
  Eigen::Index n2() const { return sys2_.stateDim(); }
  Eigen::Index stateDim() const { return n1() + n2(); }
  Eigen::Index portDim() const { return sys1_.portDim(); }

  bool isConstant() const { return sys1_.isConstant() && sys2_.isConstant(); }

  Mat A(const Vec& xi) const;
  Mat Ad(const Vec& xi) const;
  Mat Ae(const Vec& xi) const;
  /// [G1^T 0], so that Gcal gradTotal = y1.
  Mat Gcal(const Vec& xi) const;

  /// Constant-matrix accessors; throw NonConstantMatrices otherwise.
  const Mat& A() const;
  const Mat& Ad() const;
  const Mat& Ae() const;
  const Mat& Gcal() const;

  double hamiltonian(const Vec& xi) const;
  Vec gradTotal(const Vec& xi) const;
  Mat hessTotal(const Vec& xi) const;

  auto x1(const Vec& xi) const { return xi.head(n1()); }
  auto x2(const Vec& xi) const { return xi.tail(n2()); }

  Vec y1(const Vec& xi) const;
  Vec y2(const Vec& xi) const;

  /// Right-hand side in the assembled form.
  Vec xiDot(const Vec& xi, const Vec& xiDelayed, const Vec& e) const;

  /// Right-hand side in the physically ordered form: u1 = -y2, u2 = y1Held.
  Vec interconnectionRhs(const Vec& xi, const Vec& y1Held) const;

 private:
  friend ClosedLoopModel assemble_interconnection(const PhSubsystem&, const PhSubsystem&);
  ClosedLoopModel(PhSubsystem s1, PhSubsystem s2);

  PhSubsystem sys1_;
  PhSubsystem sys2_;
  std::optional<Mat> A_, Ad_, Ae_, Gcal_;
};

/// Throws DimensionMismatch when the port dimensions differ.
ClosedLoopModel assemble_interconnection(const PhSubsystem& sys1, const PhSubsystem& sys2);

/// y1 = G1^T gradH1(x1).
Vec output_y1(const ClosedLoopModel& model, const Vec& xi);

}  // namespace phetc
