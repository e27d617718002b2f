#pragma once

#include "phetc/ph_core.hpp"
#include "phetc/sim_engine.hpp"

#include <deque>
#include <filesystem>
#include <vector>

namespace phetc {

/// Time-ordered (t, xi, gradH(xi)) samples on a uniform dt grid.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(double dt);

  /// Throws DimensionMismatch when t is not one dt after the previous entry.
  void push(double t, Vec xi, Vec grad);
  /// Drops entries older than back time - span (keeps one extra point).
  void trim(double span);

  static HistoryBuffer from_trace(const ClosedLoopModel& model, const SimTrace& trace);

  double dt() const { return dt_; }
  std::size_t size() const { return times_.size(); }
  double time(std::size_t i) const { return times_[i]; }
  const Vec& state(std::size_t i) const { return states_[i]; }
  const Vec& grad(std::size_t i) const { return grads_[i]; }
  double span() const { return times_.empty() ? 0.0 : times_.back() - times_.front(); }

  /// d/dt gradH at entry i: central difference inside, second-order one-sided
  /// at both ends.
  Vec gradRate(std::size_t i) const;

 private:
  double dt_;
  std::deque<double> times_;
  std::deque<Vec> states_;
  std::deque<Vec> grads_;
};

/// V = H(xi_t) + w^T P w + deltaM * int_{t-deltaM}^t (r - t + deltaM) wdot^T Q wdot dr,
/// w = gradH, at buffer entry `index` (trapezoid quadrature; the weight
/// vanishes at the window start, so an off-grid start needs no interpolation
/// beyond the first partial segment). Throws InsufficientHistory.
double eval_V(const Mat& P, const Mat& Q, const HistoryBuffer& buffer,
              const ClosedLoopModel& model, double deltaM, std::size_t index);
/// At the newest entry.
double eval_V(const Mat& P, const Mat& Q, const HistoryBuffer& buffer,
              const ClosedLoopModel& model, double deltaM);

/// int w^T Q w - (1/L) I1^T Q I1 - (3/L) Phi^T Q Phi with
/// Phi = I1 - (2/L) int_a^b int_a^s w, for the piecewise-linear interpolant of
/// the samples (integrated exactly). Needs at least 16 increasing samples.
double wirtinger_gap(const Mat& Q, const std::vector<double>& times,
                     const std::vector<Vec>& omega);

/// The first term of the gap, used for relative tolerances.
double wirtinger_lhs(const Mat& Q, const std::vector<double>& times,
                     const std::vector<Vec>& omega);

struct VdotSeries {
  std::vector<double> t;
  std::vector<double> V;
  /// Central difference of V; NaN at the ends.
  std::vector<double> Vdot;
  /// psi^T Xi(Hess(xi_t)) psi with psi = (w_t, w(t - delta), (1/delta) int w, e);
  /// NaN where the interval index changes within one step.
  std::vector<double> bound;
  double maxV = 0.0;
  /// Share of consecutive grid pairs inside one interval with
  /// V_{k+1} - V_k <= 1e-6 max V.
  double fractionNonIncreasing = 0.0;
  std::size_t pairsChecked = 0;
};

/// Evaluates V, its numerical derivative and the quadratic-form bound on every
/// grid point of the trace with at least deltaM of history.
VdotSeries vdot_along_trace(const SimTrace& trace, const ClosedLoopModel& model, const Mat& P,
                            const Mat& Q, const Mat& Omega, double sigma, double deltaM);

/// Columns: t, V, Vdot, bound.
void write_vdot_csv(const VdotSeries& series, const std::filesystem::path& path);

}  // namespace phetc
