#include "phetc/sdp.hpp"

#include "phetc/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace phetc {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible:
      return "feasible";
    case Verdict::Infeasible:
      return "infeasible";
    case Verdict::Undecided:
      return "undecided";
  }
  return "undecided";
}

std::vector<double> constraint_min_eigenvalues(const FeasibilityProblem& problem,
                                               const Eigen::VectorXd& x) {
  std::vector<double> out;
  out.reserve(problem.constraints.size());
  for (const auto& c : problem.constraints) {
    const Eigen::MatrixXd F = c.F.evaluate(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (F + F.transpose()),
                                                       Eigen::EigenvaluesOnly);
    out.push_back(eig.eigenvalues().minCoeff());
  }
  return out;
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Barrier state at z = (x, t).
class Barrier {
 public:
  Barrier(const std::vector<AffineMatrix>& blocks, double radius)
      : blocks_(blocks), radius2_(radius * radius) {
    for (const auto& b : blocks_) nu_ += static_cast<double>(b.rows());
    nu_ += 1.0;
  }

  Eigen::Index numVars() const { return blocks_.front().numVars(); }
  double nu() const { return nu_; }

  /// -sum log det(F_k(x) - tI) - log(R^2 - |x|^2); +inf outside the domain.
  double value(const Vec& x, double t) const {
    const double ball = radius2_ - x.squaredNorm();
    if (!(ball > 0.0)) return kInf;
    double phi = -std::log(ball);
    for (const auto& b : blocks_) {
      Mat S = b.evaluate(x);
      S.diagonal().array() -= t;
      Eigen::LLT<Mat> llt(S);
      if (llt.info() != Eigen::Success) return kInf;
      const auto diag = llt.matrixLLT().diagonal();
      if ((diag.array() <= 0.0).any()) return kInf;
      phi -= 2.0 * diag.array().log().sum();
    }
    return phi;
  }

  /// Gradient and Hessian of the barrier in z = (x, t); false outside the domain.
  bool derivatives(const Vec& x, double t, Vec& grad, Mat& hess) const {
    const Eigen::Index n = numVars();
    grad = Vec::Zero(n + 1);
    hess = Mat::Zero(n + 1, n + 1);
    const double ball = radius2_ - x.squaredNorm();
    if (!(ball > 0.0)) return false;
    grad.head(n) += 2.0 * x / ball;
    hess.topLeftCorner(n, n) += (2.0 / ball) * Mat::Identity(n, n) + (4.0 / (ball * ball)) * x * x.transpose();

    std::vector<Mat> M(static_cast<std::size_t>(n + 1));
    for (const auto& b : blocks_) {
      Mat S = b.evaluate(x);
      S.diagonal().array() -= t;
      Eigen::LLT<Mat> llt(S);
      if (llt.info() != Eigen::Success) return false;
      const Mat Sinv = llt.solve(Mat::Identity(S.rows(), S.cols()));
      for (Eigen::Index i = 0; i < n; ++i) M[static_cast<std::size_t>(i)] = Sinv * b.coefficient(i);
      M[static_cast<std::size_t>(n)] = -Sinv;
      for (Eigen::Index i = 0; i <= n; ++i) {
        const Mat& Mi = M[static_cast<std::size_t>(i)];
        grad(i) -= Mi.trace();
        for (Eigen::Index j = 0; j <= i; ++j) {
          const double v = Mi.cwiseProduct(M[static_cast<std::size_t>(j)].transpose()).sum();
          hess(i, j) += v;
          if (j != i) hess(j, i) += v;
        }
      }
    }
    return true;
  }

  /// Rigorous upper bound on max t inside the ball from the dual point
  /// Z_k = S_k^{-1} / sum_k tr S_k^{-1}.
  void dualBound(const Vec& x, double t, double radius, double& objective, double& residual,
                 double& bound) const {
    const Eigen::Index n = numVars();
    std::vector<Mat> Z;
    double trace = 0.0;
    for (const auto& b : blocks_) {
      Mat S = b.evaluate(x);
      S.diagonal().array() -= t;
      Eigen::LLT<Mat> llt(S);
      Mat Sinv = llt.solve(Mat::Identity(S.rows(), S.cols()));
      trace += Sinv.trace();
      Z.push_back(std::move(Sinv));
    }
    objective = 0.0;
    Vec r = Vec::Zero(n);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      Z[k] /= trace;
      objective += blocks_[k].constantTerm().cwiseProduct(Z[k]).sum();
      for (Eigen::Index i = 0; i < n; ++i) r(i) += blocks_[k].coefficient(i).cwiseProduct(Z[k]).sum();
    }
    residual = r.norm();
    bound = objective + residual * radius;
  }

 private:
  const std::vector<AffineMatrix>& blocks_;
  double radius2_;
  double nu_ = 0.0;
};

}  // namespace

EngineResult BarrierFeasibilityEngine::solve(const FeasibilityProblem& problem) const {
  if (problem.constraints.empty()) throw DimensionMismatch("feasibility problem has no constraints");
  std::vector<AffineMatrix> blocks;
  blocks.reserve(problem.constraints.size());
  for (const auto& c : problem.constraints) {
    if (c.F.rows() != c.F.cols() || c.F.numVars() != problem.numVars) {
      throw DimensionMismatch(fmt::format("constraint '{}' has the wrong shape", c.name));
    }
    blocks.push_back(c.F.symmetrized());
  }

  const Eigen::Index n = problem.numVars;
  Barrier barrier(blocks, options_.radius);
  EngineResult result;
  Vec x = Vec::Zero(n);

  double lowest = kInf;
  for (double v : constraint_min_eigenvalues(problem, x)) lowest = std::min(lowest, v);
  double t = lowest - 1.0;
  result.x = x;
  result.margin = lowest;
  if (lowest > 0.0) {
    result.verdict = Verdict::Feasible;
    result.message = "origin is strictly feasible";
    return result;
  }

  double s = 1.0;
  int iterations = 0;
  while (iterations < options_.maxNewtonIterations) {
    // Centering: minimize -s t + barrier.
    for (int inner = 0; inner < 100 && iterations < options_.maxNewtonIterations; ++inner) {
      Vec grad;
      Mat hess;
      if (!barrier.derivatives(x, t, grad, hess)) break;
      grad(n) -= s;
      Vec step = hess.ldlt().solve(-grad);
      if (!step.allFinite()) {
        step = (hess + 1e-12 * Mat::Identity(n + 1, n + 1)).ldlt().solve(-grad);
      }
      const double decrement = -grad.dot(step);
      ++iterations;
      if (decrement < 2e-10) break;

      const double phi0 = barrier.value(x, t) - s * t;
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-14) {
        const Vec xn = x + alpha * step.head(n);
        const double tn = t + alpha * step(n);
        const double phi = barrier.value(xn, tn) - s * tn;
        if (phi <= phi0 - 0.25 * alpha * decrement) {
          x = xn;
          t = tn;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      if (t > 0.0) break;
    }

    result.x = x;
    result.margin = t;
    result.newtonIterations = iterations;
    if (t > 0.0) {
      result.verdict = Verdict::Feasible;
      result.marginUpperBound = kInf;
      result.message = fmt::format("strictly feasible point with margin {:.3e}", t);
      return result;
    }

    double objective = 0.0, residual = 0.0, bound = 0.0;
    barrier.dualBound(x, t, options_.radius, objective, residual, bound);
    result.dualObjective = objective;
    result.dualResidual = residual;
    result.marginUpperBound = bound;
    if (bound < -options_.tolerance) {
      result.verdict = Verdict::Infeasible;
      result.message = fmt::format("dual bound {:.3e} < 0 (radius {:g})", bound, options_.radius);
      return result;
    }
    if (barrier.nu() / s < 0.1 * options_.tolerance) {
      result.verdict = Verdict::Undecided;
      result.message = fmt::format("optimal margin within [{:.3e}, {:.3e}]", t, bound);
      return result;
    }
    s *= options_.barrierGrowth;
  }
  result.verdict = Verdict::Undecided;
  result.message = "Newton iteration budget exhausted";
  return result;
}

}  // namespace phetc
