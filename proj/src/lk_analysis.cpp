#include "phetc/lk_analysis.hpp"

#include "phetc/csv.hpp"
#include "phetc/errors.hpp"
#include "phetc/lmi_certifier.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace phetc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

HistoryBuffer::HistoryBuffer(double dt) : dt_(dt) {
  if (!(dt > 0.0)) throw DimensionMismatch("history step must be positive");
}

void HistoryBuffer::push(double t, Vec xi, Vec grad) {
  if (!times_.empty()) {
    const double gap = t - times_.back();
    if (std::abs(gap - dt_) > 1e-9 * std::max(1.0, std::abs(t))) {
      throw DimensionMismatch(fmt::format("history entry at t = {} is off the dt grid", t));
    }
    if (grad.size() != grads_.back().size() || xi.size() != states_.back().size()) {
      throw DimensionMismatch("history entry has the wrong size");
    }
  }
  times_.push_back(t);
  states_.push_back(std::move(xi));
  grads_.push_back(std::move(grad));
}

void HistoryBuffer::trim(double span) {
  while (times_.size() > 2 && times_.back() - times_[1] >= span) {
    times_.pop_front();
    states_.pop_front();
    grads_.pop_front();
  }
}

HistoryBuffer HistoryBuffer::from_trace(const ClosedLoopModel& model, const SimTrace& trace) {
  HistoryBuffer buf(trace.dt);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    // Trace times are already on the grid.
    buf.times_.push_back(trace.times[k]);
    buf.states_.push_back(trace.states[k]);
    buf.grads_.push_back(model.gradTotal(trace.states[k]));
  }
  return buf;
}

Vec HistoryBuffer::gradRate(std::size_t i) const {
  const std::size_t n = grads_.size();
  if (n < 3) throw InsufficientHistory("at least three history entries are needed");
  if (i == 0) return (-3.0 * grads_[0] + 4.0 * grads_[1] - grads_[2]) / (2.0 * dt_);
  if (i + 1 == n) {
    return (3.0 * grads_[i] - 4.0 * grads_[i - 1] + grads_[i - 2]) / (2.0 * dt_);
  }
  return (grads_[i + 1] - grads_[i - 1]) / (2.0 * dt_);
}

double eval_V(const Mat& P, const Mat& Q, const HistoryBuffer& buffer,
              const ClosedLoopModel& model, double deltaM, std::size_t index) {
  if (index >= buffer.size()) throw InsufficientHistory("index beyond the history");
  const Vec& w = buffer.grad(index);
  if (P.rows() != w.size() || Q.rows() != w.size()) throw DimensionMismatch("P, Q must match the state");
  const double t = buffer.time(index);
  double V = model.hamiltonian(buffer.state(index)) + w.dot(P * w);
  if (deltaM <= 0.0) return V;

  const double start = t - deltaM;
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  if (start < buffer.time(0) - slack) {
    throw InsufficientHistory(fmt::format("history starts at {} but the window needs {}",
                                          buffer.time(0), start));
  }
  std::size_t j = index;
  while (j > 0 && buffer.time(j - 1) >= start - slack) --j;

  auto integrand = [&](std::size_t i) {
    const Vec rate = buffer.gradRate(i);
    return std::max(0.0, buffer.time(i) - start) * rate.dot(Q * rate);
  };
  double integral = 0.0;
  double prev = integrand(j);
  integral += 0.5 * std::max(0.0, buffer.time(j) - start) * prev;
  for (std::size_t i = j + 1; i <= index; ++i) {
    const double cur = integrand(i);
    integral += 0.5 * (buffer.time(i) - buffer.time(i - 1)) * (prev + cur);
    prev = cur;
  }
  return V + deltaM * integral;
}

double eval_V(const Mat& P, const Mat& Q, const HistoryBuffer& buffer,
              const ClosedLoopModel& model, double deltaM) {
  if (buffer.size() == 0) throw InsufficientHistory("empty history");
  return eval_V(P, Q, buffer, model, deltaM, buffer.size() - 1);
}

namespace {

void check_samples(const Mat& Q, const std::vector<double>& times, const std::vector<Vec>& omega) {
  if (times.size() != omega.size()) throw DimensionMismatch("times and samples differ in length");
  if (times.size() < 16) throw DimensionMismatch("at least 16 samples are needed");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DimensionMismatch("sample times must increase");
    if (omega[i].size() != Q.rows()) throw DimensionMismatch("sample size differs from Q");
  }
}

}  // namespace

double wirtinger_lhs(const Mat& Q, const std::vector<double>& times,
                     const std::vector<Vec>& omega) {
  check_samples(Q, times, omega);
  double lhs = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    const Vec& a = omega[i];
    const Vec& b = omega[i + 1];
    lhs += h / 3.0 * (a.dot(Q * a) + a.dot(Q * b) + b.dot(Q * b));
  }
  return lhs;
}

double wirtinger_gap(const Mat& Q, const std::vector<double>& times,
                     const std::vector<Vec>& omega) {
  const double lhs = wirtinger_lhs(Q, times, omega);
  const Eigen::Index n = Q.rows();
  Vec cumulative = Vec::Zero(n);  // int_a^s omega at the segment start
  Vec doubleIntegral = Vec::Zero(n);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    const Vec& a = omega[i];
    const Vec& b = omega[i + 1];
    doubleIntegral += h * cumulative + h * h / 6.0 * (2.0 * a + b);
    cumulative += 0.5 * h * (a + b);
  }
  const double L = times.back() - times.front();
  const Vec phi = cumulative - (2.0 / L) * doubleIntegral;
  return lhs - cumulative.dot(Q * cumulative) / L - 3.0 * phi.dot(Q * phi) / L;
}

VdotSeries vdot_along_trace(const SimTrace& trace, const ClosedLoopModel& model, const Mat& P,
                            const Mat& Q, const Mat& Omega, double sigma, double deltaM) {
  const HistoryBuffer buffer = HistoryBuffer::from_trace(model, trace);
  const std::size_t N = buffer.size();
  const double dt = trace.dt;
  if (N < 3) throw InsufficientHistory("trace is too short");
  const double t0 = trace.times.front();
  std::size_t first = 0;
  while (first < N && trace.times[first] < t0 + deltaM - 1e-9) ++first;
  if (first >= N) throw InsufficientHistory("trace is shorter than delta_M");

  VdotSeries out;
  for (std::size_t k = first; k < N; ++k) {
    out.t.push_back(trace.times[k]);
    out.V.push_back(eval_V(P, Q, buffer, model, deltaM, k));
    out.maxV = std::max(out.maxV, out.V.back());
  }
  const std::size_t M = out.t.size();
  out.Vdot.assign(M, kNaN);
  out.bound.assign(M, kNaN);
  for (std::size_t i = 1; i + 1 < M; ++i) out.Vdot[i] = (out.V[i + 1] - out.V[i - 1]) / (2.0 * dt);

  auto sameInterval = [&](std::size_t a, std::size_t b) {
    const double sa = trace.intervalSample[a], sb = trace.intervalSample[b];
    return std::isfinite(sa) && std::isfinite(sb) && sa == sb;
  };

  std::size_t good = 0;
  for (std::size_t i = 0; i + 1 < M; ++i) {
    const std::size_t k = first + i;
    if (!sameInterval(k, k + 1)) continue;
    ++out.pairsChecked;
    if (out.V[i + 1] - out.V[i] <= 1e-6 * out.maxV) ++good;
  }
  out.fractionNonIncreasing =
      out.pairsChecked ? static_cast<double>(good) / static_cast<double>(out.pairsChecked) : 1.0;

  for (std::size_t i = 1; i + 1 < M; ++i) {
    const std::size_t k = first + i;
    if (!sameInterval(k - 1, k) || !sameInterval(k, k + 1)) continue;
    const double s = trace.intervalSample[k];
    const auto is = static_cast<std::size_t>(std::llround((s - t0) / dt));
    const double delta = trace.times[k] - trace.times[is];
    if (delta < 0.5 * dt) continue;

    const Vec& xi = trace.states[k];
    const Vec& wt = buffer.grad(k);
    const Vec& wd = buffer.grad(is);
    Vec avg = Vec::Zero(wt.size());
    for (std::size_t j = is; j < k; ++j) avg += 0.5 * dt * (buffer.grad(j) + buffer.grad(j + 1));
    avg /= delta;
    const Mat G = model.Gcal(xi);
    const Vec e = trace.held[k] - G * wd;

    const LmiData data{model.A(xi), model.Ad(xi), model.Ae(xi), G, deltaM, sigma};
    const Mat xiMat = build_xi(data, model.hessTotal(xi), P, Q, Omega);
    const Eigen::Index n = wt.size(), m = e.size();
    Vec psi(3 * n + m);
    psi << wt, wd, avg, e;
    out.bound[i] = psi.dot(xiMat * psi);
  }
  return out;
}

void write_vdot_csv(const VdotSeries& series, const std::filesystem::path& path) {
  CsvTable table;
  table.header = {"t", "V", "Vdot", "bound"};
  auto cell = [](double v) { return std::isfinite(v) ? format_number(v) : std::string(); };
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    table.rows.push_back({format_number(series.t[i]), format_number(series.V[i]),
                          cell(series.Vdot[i]), cell(series.bound[i])});
  }
  write_csv(path, table);
}

}  // namespace phetc
