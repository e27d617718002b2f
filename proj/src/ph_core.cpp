#include "phetc/ph_core.hpp"

#include "phetc/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace phetc {

StateMatrix::StateMatrix(Mat constant)
    : constant_(std::move(constant)), rows_(constant_.rows()), cols_(constant_.cols()) {}

StateMatrix::StateMatrix(MatrixField fn, Eigen::Index rows, Eigen::Index cols)
    : fn_(std::move(fn)), rows_(rows), cols_(cols) {}

Mat StateMatrix::operator()(const Vec& x) const {
  if (!fn_) return constant_;
  Mat value = fn_(x);
  if (value.rows() != rows_ || value.cols() != cols_) {
    throw DimensionMismatch(fmt::format("state matrix callback returned {}x{}, declared {}x{}",
                                        value.rows(), value.cols(), rows_, cols_));
  }
  return value;
}

const Mat& StateMatrix::constant() const {
  if (fn_) throw NonConstantMatrices("matrix depends on the state");
  return constant_;
}

StateMatrix StateMatrix::shifted(const Vec& shift) const {
  if (!fn_) return *this;
  return StateMatrix([fn = fn_, shift](const Vec& x) { return fn(x + shift); }, rows_, cols_);
}

Mat finite_difference_hessian(const VectorField& grad, const Vec& x) {
  const Eigen::Index n = x.size();
  Mat hess(n, n);
  Vec probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = 1e-5 * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + step;
    const Vec plus = grad(probe);
    probe(i) = x(i) - step;
    const Vec minus = grad(probe);
    probe(i) = x(i);
    hess.col(i) = (plus - minus) / (2.0 * step);
  }
  return hess;
}

Vec PhSubsystem::output(const Vec& x) const { return G_(x).transpose() * grad_(x); }

Vec PhSubsystem::dynamics(const Vec& x, const Vec& u) const {
  return (J_(x) - R_(x)) * grad_(x) + G_(x) * u;
}

namespace {

constexpr int kProbePoints = 8;

void check_structure(const Mat& J, const Mat& R, const char* where) {
  if (!(J + J.transpose()).isZero(0.0)) {
    throw AntisymmetryViolation(fmt::format("J + J^T != 0 {}", where));
  }
  const double scale = std::max(1.0, R.norm());
  if (!(R - R.transpose()).isZero(1e-12 * scale)) {
    throw DissipationViolation(fmt::format("R is not symmetric {}", where));
  }
  if (R.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * R.norm()) {
      throw DissipationViolation(fmt::format("R is indefinite {} (min eigenvalue {})", where,
                                             eig.eigenvalues().minCoeff()));
    }
  }
}

}  // namespace

PhSubsystem make_subsystem(StateMatrix J, StateMatrix R, StateMatrix G, ScalarField H,
                           VectorField gradH, MatrixField hessH, const Vec& equilibrium) {
  const Eigen::Index n = J.rows();
  if (J.cols() != n || R.rows() != n || R.cols() != n) {
    throw DimensionMismatch("J and R must be square of equal size");
  }
  if (G.rows() != n) throw DimensionMismatch("G row count must equal the state dimension");
  if (equilibrium.size() != n) throw DimensionMismatch("equilibrium has the wrong size");
  if (!H || !gradH) throw DimensionMismatch("H and gradH callbacks are required");

  PhSubsystem sys;
  sys.n_ = n;
  sys.m_ = G.cols();
  sys.equilibrium_ = equilibrium;
  sys.J_ = J.shifted(equilibrium);
  sys.R_ = R.shifted(equilibrium);
  sys.G_ = G.shifted(equilibrium);

  const double h0 = H(equilibrium);
  sys.H_ = [H, equilibrium, h0](const Vec& x) { return H(x + equilibrium) - h0; };
  sys.grad_ = [gradH, equilibrium](const Vec& x) { return gradH(x + equilibrium); };
  sys.analyticHessian_ = static_cast<bool>(hessH);
  if (hessH) {
    sys.hess_ = [hessH, equilibrium](const Vec& x) { return hessH(x + equilibrium); };
  } else {
    sys.hess_ = [grad = sys.grad_](const Vec& x) { return finite_difference_hessian(grad, x); };
  }

  const Vec origin = Vec::Zero(n);
  const Vec g0 = sys.grad_(origin);
  if (g0.size() != n) throw DimensionMismatch("gradH returned the wrong size");
  if (g0.norm() > 1e-10) {
    throw EquilibriumViolation(
        fmt::format("|gradH(equilibrium)| = {:.3e} exceeds 1e-10", g0.norm()));
  }

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k <= kProbePoints; ++k) {
    Vec x = origin;
    if (k > 0) {
      for (Eigen::Index i = 0; i < n; ++i) x(i) = unit(rng);
    }
    check_structure(sys.J_(x), sys.R_(x), k == 0 ? "at the equilibrium" : "at a probe point");
    if (!sys.analyticHessian_) continue;
    const Mat hess = sys.hess_(x);
    if (hess.rows() != n || hess.cols() != n) throw DimensionMismatch("hessH has the wrong shape");
    const double scale = std::max(1.0, hess.norm());
    if (!(hess - hess.transpose()).isZero(1e-10 * scale)) {
      throw GradientMismatch("hessH is not symmetric");
    }
    const Mat fd = finite_difference_hessian(sys.grad_, x);
    if ((hess - fd).norm() > 1e-5 * scale) {
      throw GradientMismatch(fmt::format(
          "hessH disagrees with finite differences of gradH (|diff| = {:.3e})", (hess - fd).norm()));
    }
  }
  return sys;
}

PhSubsystem make_linear_subsystem(const Mat& J, const Mat& R, const Mat& G, const Mat& M) {
  if (M.rows() != J.rows() || M.cols() != J.rows()) throw DimensionMismatch("M must match J");
  const Mat Ms = 0.5 * (M + M.transpose());
  auto H = [Ms](const Vec& x) { return 0.5 * x.dot(Ms * x); };
  auto grad = [Ms](const Vec& x) { return Vec(Ms * x); };
  auto hess = [Ms](const Vec&) { return Ms; };
  return make_subsystem(J, R, G, H, grad, hess, Vec::Zero(J.rows()));
}

ClosedLoopModel::ClosedLoopModel(PhSubsystem s1, PhSubsystem s2)
    : sys1_(std::move(s1)), sys2_(std::move(s2)) {
  if (isConstant()) {
    const Vec origin = Vec::Zero(stateDim());
    A_ = A(origin);
    Ad_ = Ad(origin);
    Ae_ = Ae(origin);
    Gcal_ = Gcal(origin);
  }
}

ClosedLoopModel assemble_interconnection(const PhSubsystem& sys1, const PhSubsystem& sys2) {
  if (sys1.portDim() != sys2.portDim()) {
    throw DimensionMismatch(fmt::format("port dimensions differ: {} vs {}", sys1.portDim(),
                                        sys2.portDim()));
  }
  return ClosedLoopModel(sys1, sys2);
}

Mat ClosedLoopModel::A(const Vec& xi) const {
  const Vec x1v = x1(xi), x2v = x2(xi);
  Mat a = Mat::Zero(stateDim(), stateDim());
  a.topLeftCorner(n1(), n1()) = sys1_.J(x1v) - sys1_.R(x1v);
  a.topRightCorner(n1(), n2()) = -sys1_.G(x1v) * sys2_.G(x2v).transpose();
  a.bottomRightCorner(n2(), n2()) = sys2_.J(x2v) - sys2_.R(x2v);
  return a;
}

Mat ClosedLoopModel::Ad(const Vec& xi) const {
  Mat ad = Mat::Zero(stateDim(), stateDim());
  ad.bottomLeftCorner(n2(), n1()) = sys2_.G(x2(xi)) * sys1_.G(x1(xi)).transpose();
  return ad;
}

Mat ClosedLoopModel::Ae(const Vec& xi) const {
  Mat ae = Mat::Zero(stateDim(), portDim());
  ae.bottomRows(n2()) = sys2_.G(x2(xi));
  return ae;
}

Mat ClosedLoopModel::Gcal(const Vec& xi) const {
  Mat g = Mat::Zero(portDim(), stateDim());
  g.leftCols(n1()) = sys1_.G(x1(xi)).transpose();
  return g;
}

namespace {
const Mat& require(const std::optional<Mat>& m) {
  if (!m) throw NonConstantMatrices("the interconnection has state-dependent matrices");
  return *m;
}
}  // namespace

const Mat& ClosedLoopModel::A() const { return require(A_); }
const Mat& ClosedLoopModel::Ad() const { return require(Ad_); }
const Mat& ClosedLoopModel::Ae() const { return require(Ae_); }
const Mat& ClosedLoopModel::Gcal() const { return require(Gcal_); }

double ClosedLoopModel::hamiltonian(const Vec& xi) const {
  return sys1_.H(x1(xi)) + sys2_.H(x2(xi));
}

Vec ClosedLoopModel::gradTotal(const Vec& xi) const {
  Vec g(stateDim());
  g << sys1_.gradH(x1(xi)), sys2_.gradH(x2(xi));
  return g;
}

Mat ClosedLoopModel::hessTotal(const Vec& xi) const {
  Mat h = Mat::Zero(stateDim(), stateDim());
  h.topLeftCorner(n1(), n1()) = sys1_.hessH(x1(xi));
  h.bottomRightCorner(n2(), n2()) = sys2_.hessH(x2(xi));
  return h;
}

Vec ClosedLoopModel::y1(const Vec& xi) const { return sys1_.output(x1(xi)); }
Vec ClosedLoopModel::y2(const Vec& xi) const { return sys2_.output(x2(xi)); }

Vec ClosedLoopModel::xiDot(const Vec& xi, const Vec& xiDelayed, const Vec& e) const {
  if (xi.size() != stateDim() || xiDelayed.size() != stateDim() || e.size() != portDim()) {
    throw DimensionMismatch("xiDot argument sizes");
  }
  return A(xi) * gradTotal(xi) + Ad(xi) * gradTotal(xiDelayed) + Ae(xi) * e;
}

Vec ClosedLoopModel::interconnectionRhs(const Vec& xi, const Vec& y1Held) const {
  const Vec x1v = x1(xi), x2v = x2(xi);
  Vec rhs(stateDim());
  rhs << sys1_.dynamics(x1v, -sys2_.output(x2v)), sys2_.dynamics(x2v, y1Held);
  return rhs;
}

Vec output_y1(const ClosedLoopModel& model, const Vec& xi) {
  if (xi.size() != model.stateDim()) {
    throw DimensionMismatch(fmt::format("state has size {}, model expects {}", xi.size(),
                                        model.stateDim()));
  }
  return model.y1(xi);
}

}  // namespace phetc
