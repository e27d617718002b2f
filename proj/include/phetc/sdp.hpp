#pragma once

#include "phetc/affine_matrix.hpp"

#include <string>
#include <vector>

namespace phetc {

/// One linear matrix inequality F(x) > 0 (strict, symmetric F).
struct LmiConstraint {
  std::string name;
  AffineMatrix F;
};

struct FeasibilityProblem {
  Eigen::Index numVars = 0;
  std::vector<LmiConstraint> constraints;
};

enum class Verdict { Feasible, Infeasible, Undecided };

const char* to_string(Verdict v);

struct EngineResult {
  Verdict verdict = Verdict::Undecided;
  Eigen::VectorXd x;  ///< witness when feasible, last iterate otherwise
  /// Best t found with F_k(x) >= t I for every k.
  double margin = 0.0;
  /// Upper bound on the optimal margin within the search ball.
  double marginUpperBound = 0.0;
  int newtonIterations = 0;
  /// Infeasibility evidence from the central-path dual point Z_k:
  /// sum_k <F_k(0), Z_k> and the norm of sum_k <F_ki, Z_k> over i.
  double dualObjective = 0.0;
  double dualResidual = 0.0;
  std::string message;
};

/// Decides strict feasibility of a set of LMIs.
class FeasibilityEngine {
 public:
  virtual ~FeasibilityEngine() = default;
  virtual std::string name() const = 0;
  virtual EngineResult solve(const FeasibilityProblem& problem) const = 0;
};

/// Log-det barrier path following on
///   maximize t  s.t.  F_k(x) >= t I,  |x| <= radius.
/// Stops as soon as t > 0 (feasible) or once the duality-gap bound proves the
/// optimum is below -tolerance (infeasible inside the ball).
class BarrierFeasibilityEngine : public FeasibilityEngine {
 public:
  struct Options {
    double radius = 1e4;
    double tolerance = 1e-9;
    double barrierGrowth = 8.0;
    int maxNewtonIterations = 2000;
  };

  BarrierFeasibilityEngine() = default;
  explicit BarrierFeasibilityEngine(Options options) : options_(options) {}

  std::string name() const override { return "log-det barrier"; }
  EngineResult solve(const FeasibilityProblem& problem) const override;

 private:
  Options options_;
};

/// Smallest eigenvalue of each constraint at x via a symmetric eigensolver.
std::vector<double> constraint_min_eigenvalues(const FeasibilityProblem& problem,
                                               const Eigen::VectorXd& x);

}  // namespace phetc
