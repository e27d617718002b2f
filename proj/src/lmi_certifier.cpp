#include "phetc/lmi_certifier.hpp"

#include "phetc/errors.hpp"
#include "phetc/trigger_net.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>

namespace phetc {

LmiData LmiData::from_model(const ClosedLoopModel& model, double deltaM, double sigma) {
  LmiData d;
  d.A = model.A();
  d.Ad = model.Ad();
  d.Ae = model.Ae();
  d.Gcal = model.Gcal();
  d.deltaM = deltaM;
  d.sigma = sigma;
  return d;
}

Eigen::VectorXd LmiVariables::pack(const Mat& P, const Mat& Q, const Mat& Omega) const {
  Eigen::VectorXd x(count());
  pack_symmetric(P, 0, x);
  pack_symmetric(Q, sym_size(n), x);
  pack_symmetric(Omega, 2 * sym_size(n), x);
  return x;
}

namespace {

void check_dimensions(const LmiData& d, const Mat& hess) {
  const Eigen::Index n = d.n(), m = d.m();
  if (d.A.cols() != n || d.Ad.rows() != n || d.Ad.cols() != n || d.Ae.rows() != n ||
      d.Gcal.rows() != m || d.Gcal.cols() != n || hess.rows() != n || hess.cols() != n) {
    throw DimensionMismatch("LMI data dimensions are inconsistent");
  }
}

}  // namespace

AffineMatrix build_xi(const LmiData& d, const Mat& hess, const LmiVariables& vars) {
  check_dimensions(d, hess);
  const Eigen::Index n = d.n(), m = d.m(), nv = vars.count();
  const AffineMatrix P = vars.P(), Q = vars.Q(), W = vars.Omega();
  const Mat HA = hess * d.A, HAd = hess * d.Ad, HAe = hess * d.Ae;
  const double d2 = d.deltaM * d.deltaM;

  AffineMatrix x11 = HA.transpose() * P + P * HA + d2 * (HA.transpose() * Q * HA) - 4.0 * Q;
  x11 += 0.5 * (d.A + d.A.transpose());
  AffineMatrix x21 = HAd.transpose() * P + d2 * (HAd.transpose() * Q * HA) - 2.0 * Q;
  x21 += 0.5 * d.Ad.transpose();
  AffineMatrix x22 = d2 * (HAd.transpose() * Q * HAd) - 4.0 * Q +
                     d.sigma * (d.Gcal.transpose() * W * d.Gcal);
  AffineMatrix x41 = HAe.transpose() * P + d2 * (HAe.transpose() * Q * HA);
  x41 += 0.5 * d.Ae.transpose();
  AffineMatrix x42 = d2 * (HAe.transpose() * Q * HAd);
  AffineMatrix x44 = d2 * (HAe.transpose() * Q * HAe) - W;
  const AffineMatrix q6 = 6.0 * Q;
  const AffineMatrix zmn(m, n, nv);

  return AffineMatrix::blocks({
      {x11, x21.transpose(), q6, x41.transpose()},
      {x21, x22, q6, x42.transpose()},
      {q6, q6, -12.0 * Q, zmn.transpose()},
      {x41, x42, zmn, x44},
  });
}

Mat build_xi(const LmiData& d, const Mat& hess, const Mat& P, const Mat& Q, const Mat& W) {
  check_dimensions(d, hess);
  const Eigen::Index n = d.n(), m = d.m();
  const Mat HA = hess * d.A, HAd = hess * d.Ad, HAe = hess * d.Ae;
  const double d2 = d.deltaM * d.deltaM;

  const Mat x11 = 0.5 * (d.A + d.A.transpose()) + HA.transpose() * P + P * HA +
                  d2 * HA.transpose() * Q * HA - 4.0 * Q;
  const Mat x21 = HAd.transpose() * P + 0.5 * d.Ad.transpose() + d2 * HAd.transpose() * Q * HA -
                  2.0 * Q;
  const Mat x22 = d2 * HAd.transpose() * Q * HAd - 4.0 * Q + d.sigma * d.Gcal.transpose() * W * d.Gcal;
  const Mat x41 = HAe.transpose() * P + 0.5 * d.Ae.transpose() + d2 * HAe.transpose() * Q * HA;
  const Mat x42 = d2 * HAe.transpose() * Q * HAd;
  const Mat x44 = d2 * HAe.transpose() * Q * HAe - W;

  Mat xi = Mat::Zero(3 * n + m, 3 * n + m);
  xi.block(0, 0, n, n) = x11;
  xi.block(n, 0, n, n) = x21;
  xi.block(n, n, n, n) = x22;
  xi.block(2 * n, 0, n, n) = 6.0 * Q;
  xi.block(2 * n, n, n, n) = 6.0 * Q;
  xi.block(2 * n, 2 * n, n, n) = -12.0 * Q;
  xi.block(3 * n, 0, m, n) = x41;
  xi.block(3 * n, n, m, n) = x42;
  xi.block(3 * n, 3 * n, m, m) = x44;
  return xi.selfadjointView<Eigen::Lower>();
}

const char* to_string(CornerForm form) {
  return form == CornerForm::Congruence ? "congruence" : "alpha";
}

namespace {

/// The first four block rows shared by every Schur form.
std::vector<std::vector<AffineMatrix>> theta_core(const LmiData& d, const Mat& hess,
                                                  const LmiVariables& vars) {
  const Eigen::Index n = d.n(), m = d.m(), nv = vars.count();
  const AffineMatrix P = vars.P(), Q = vars.Q(), W = vars.Omega();
  const Mat HA = hess * d.A, HAd = hess * d.Ad, HAe = hess * d.Ae;

  AffineMatrix t11 = HA.transpose() * P + P * HA - 4.0 * Q;
  t11 += 0.5 * (d.A + d.A.transpose());
  AffineMatrix t21 = HAd.transpose() * P - 2.0 * Q;
  t21 += 0.5 * d.Ad.transpose();
  AffineMatrix t22 = -4.0 * Q + d.sigma * (d.Gcal.transpose() * W * d.Gcal);
  AffineMatrix t41 = HAe.transpose() * P;
  t41 += 0.5 * d.Ae.transpose();
  const AffineMatrix q6 = 6.0 * Q;
  const AffineMatrix zmn(m, n, nv);

  return {
      {t11, t21.transpose(), q6, t41.transpose()},
      {t21, t22, q6, zmn.transpose()},
      {q6, q6, -12.0 * Q, zmn.transpose()},
      {t41, zmn, zmn, -W},
  };
}

}  // namespace

AffineMatrix build_theta(const LmiData& d, const Mat& hess, const LmiVariables& vars,
                         CornerForm form, double alpha) {
  check_dimensions(d, hess);
  const Eigen::Index n = d.n(), m = d.m(), nv = vars.count();
  auto grid = theta_core(d, hess, vars);
  const Mat HA = hess * d.A, HAd = hess * d.Ad, HAe = hess * d.Ae;
  const AffineMatrix Q = vars.Q();

  std::vector<AffineMatrix> last;
  AffineMatrix corner;
  if (form == CornerForm::Congruence) {
    last = {d.deltaM * (Q * HA), d.deltaM * (Q * HAd), AffineMatrix(n, n, nv),
            d.deltaM * (Q * HAe)};
    corner = -Q;
  } else {
    if (!(alpha > 0.0)) throw DimensionMismatch("alpha must be positive");
    last = {AffineMatrix::constant(d.deltaM * HA, nv), AffineMatrix::constant(d.deltaM * HAd, nv),
            AffineMatrix(n, n, nv), AffineMatrix::constant(d.deltaM * HAe, nv)};
    corner = AffineMatrix::constant(-(1.0 / alpha) * Mat::Identity(n, n), nv);
  }
  for (std::size_t i = 0; i < 4; ++i) grid[i].push_back(last[i].transpose());
  last.push_back(corner);
  grid.push_back(std::move(last));
  (void)m;
  return AffineMatrix::blocks(grid);
}

Mat build_theta_exact(const LmiData& d, const Mat& hess, const Mat& P, const Mat& Q,
                      const Mat& W) {
  check_dimensions(d, hess);
  if (!(d.deltaM > 0.0)) throw DimensionMismatch("exact Schur form needs delta_M > 0");
  const Eigen::Index n = d.n(), m = d.m();
  const LmiVariables vars{n, m};
  const AffineMatrix core = AffineMatrix::blocks(theta_core(d, hess, vars));
  const Mat theta0 = core.evaluate(vars.pack(P, Q, W));

  Mat L = Mat::Zero(n, 3 * n + m);
  L.block(0, 0, n, n) = hess * d.A;
  L.block(0, n, n, n) = hess * d.Ad;
  L.block(0, 3 * n, n, m) = hess * d.Ae;

  const Eigen::Index k = 3 * n + m;
  Mat theta(k + n, k + n);
  theta.topLeftCorner(k, k) = theta0;
  theta.bottomLeftCorner(n, k) = L;
  theta.topRightCorner(k, n) = L.transpose();
  theta.bottomRightCorner(n, n) = -Q.inverse() / (d.deltaM * d.deltaM);
  return theta;
}

std::vector<Mat> enumerate_vertices(const Mat& base, const std::vector<HessianBound>& bounds) {
  if (bounds.size() > 20) throw DimensionMismatch("too many Hessian bounds");
  std::vector<Mat> out;
  const std::size_t count = std::size_t{1} << bounds.size();
  for (std::size_t mask = 0; mask < count; ++mask) {
    Mat v = base;
    for (std::size_t b = 0; b < bounds.size(); ++b) {
      const auto& hb = bounds[b];
      const double value = (mask >> b) & 1U ? hb.hi : hb.lo;
      v(hb.i, hb.j) = value;
      v(hb.j, hb.i) = value;
    }
    out.push_back(v);
  }
  return out;
}

double default_epsilon(const Mat& A) { return 1e-6 * (1.0 + A.norm()); }

FeasibilityProblem polytopic_problem(const LmiData& data, const std::vector<Mat>& vertices,
                                     CornerForm corner, double alpha, double epsilon) {
  if (vertices.empty()) throw DimensionMismatch("Hessian vertex set is empty");
  const LmiVariables vars{data.n(), data.m()};
  FeasibilityProblem problem;
  problem.numVars = vars.count();
  auto strict = [epsilon](AffineMatrix F) {
    F -= epsilon * Mat::Identity(F.rows(), F.cols());
    return F;
  };
  problem.constraints.push_back({"P", strict(vars.P())});
  problem.constraints.push_back({"Q", strict(vars.Q())});
  problem.constraints.push_back({"Omega", strict(vars.Omega())});
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    const Mat& h = vertices[j];
    if (!(h - h.transpose()).isZero(1e-12 * std::max(1.0, h.norm()))) {
      throw DimensionMismatch(fmt::format("Hessian vertex {} is not symmetric", j));
    }
    problem.constraints.push_back(
        {fmt::format("Theta_{}", j), strict(-build_theta(data, h, vars, corner, alpha))});
  }
  if (corner == CornerForm::AlphaBound) {
    AffineMatrix bound = -vars.Q();
    bound += alpha * Mat::Identity(data.n(), data.n());
    problem.constraints.push_back({"alpha_bound", strict(bound)});
  }
  return problem;
}

namespace {

std::shared_ptr<const FeasibilityEngine> engine_or_default(const CertifyOptions& options) {
  if (options.engine) return options.engine;
  static const auto fallback = std::make_shared<BarrierFeasibilityEngine>();
  return fallback;
}

Certificate certify_once(const LmiData& data, const std::vector<Mat>& vertices,
                         CornerForm corner, double alpha, double epsilon,
                         const CertifyOptions& options) {
  const auto engine = engine_or_default(options);
  const FeasibilityProblem problem = polytopic_problem(data, vertices, corner, alpha, epsilon);
  const EngineResult res = engine->solve(problem);

  Certificate cert;
  cert.verdict = res.verdict;
  cert.deltaM = data.deltaM;
  cert.sigma = data.sigma;
  cert.corner = corner;
  cert.alpha = corner == CornerForm::AlphaBound ? alpha : std::numeric_limits<double>::quiet_NaN();
  cert.epsilon = epsilon;
  cert.validityRadius = options.validityRadius;
  cert.vertices = vertices;
  cert.engine = engine->name();
  cert.newtonIterations = res.newtonIterations;
  cert.engineMargin = res.margin;
  cert.dualObjective = res.dualObjective;
  cert.dualResidual = res.dualResidual;
  cert.message = res.message;

  if (res.verdict != Verdict::Feasible) return cert;

  const LmiVariables vars{data.n(), data.m()};
  cert.P = vars.unpackP(res.x);
  cert.Q = vars.unpackQ(res.x);
  cert.Omega = vars.unpackOmega(res.x);

  // Margins of the raw constraints (epsilon added back).
  const auto eigs = constraint_min_eigenvalues(problem, res.x);
  bool ok = true;
  for (std::size_t k = 0; k < eigs.size(); ++k) {
    const double margin = eigs[k] + epsilon;
    cert.margins.push_back({problem.constraints[k].name, margin});
    if (margin < 0.5 * epsilon) ok = false;
  }
  double xiMax = -std::numeric_limits<double>::infinity();
  for (const Mat& h : vertices) {
    const Mat xi = build_xi(data, h, cert.P, cert.Q, cert.Omega);
    Eigen::SelfAdjointEigenSolver<Mat> eig(xi, Eigen::EigenvaluesOnly);
    xiMax = std::max(xiMax, eig.eigenvalues().maxCoeff());
  }
  cert.xiMaxEigenvalue = xiMax;
  if (!(xiMax < 0.0)) ok = false;
  if (!ok) {
    cert.verdict = Verdict::Undecided;
    cert.message = "engine reported feasible but the independent re-verification failed";
  }
  return cert;
}

}  // namespace

Certificate certify_polytopic(const LmiData& data, const std::vector<Mat>& vertices,
                              const CertifyOptions& options) {
  const double eps = options.epsilon > 0.0 ? options.epsilon : default_epsilon(data.A);
  if (options.corner == CornerForm::Congruence) {
    return certify_once(data, vertices, CornerForm::Congruence, 1.0, eps, options);
  }
  if (options.alphas.empty()) throw DimensionMismatch("alpha list is empty");
  Certificate last;
  bool sawUndecided = false;
  for (double alpha : options.alphas) {
    last = certify_once(data, vertices, CornerForm::AlphaBound, alpha, eps, options);
    if (last.feasible()) return last;
    sawUndecided = sawUndecided || last.verdict == Verdict::Undecided;
  }
  if (sawUndecided) last.verdict = Verdict::Undecided;
  return last;
}

Certificate certify_polytopic(const ClosedLoopModel& model, double deltaM, double sigma,
                              const std::vector<Mat>& vertices, const CertifyOptions& options) {
  return certify_polytopic(LmiData::from_model(model, deltaM, sigma), vertices, options);
}

Certificate certify_linear(const Mat& M, const Mat& A, const Mat& Ad, const Mat& Ae,
                           const Mat& Gcal, double deltaM, double sigma,
                           const CertifyOptions& options) {
  if (M.rows() != M.cols() || M.rows() != A.rows()) throw DimensionMismatch("M must match A");
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DimensionMismatch("energy matrix M must be positive definite");
  }
  LmiData data{A, Ad, Ae, Gcal, deltaM, sigma};
  return certify_polytopic(data, {0.5 * (M + M.transpose())}, options);
}

namespace {

SigmaMaxResult bisect_sigma(LmiData data, const std::vector<Mat>& vertices, double tol,
                            double sigmaHi, const CertifyOptions& options) {
  SigmaMaxResult out;
  out.deltaM = data.deltaM;
  out.corner = options.corner;
  if (options.corner == CornerForm::AlphaBound) out.alphaUsed = options.alphas.front();

  auto feasibleAt = [&](double sigma, Certificate* keep) {
    data.sigma = sigma;
    Certificate c = certify_polytopic(data, vertices, options);
    out.newtonIterations += c.newtonIterations;
    ++out.solves;
    const bool ok = c.feasible();
    if (keep) *keep = std::move(c);
    return ok;
  };

  Certificate best;
  if (!feasibleAt(0.0, &best)) {
    throw NoFeasiblePoint(fmt::format("sigma = 0 is not certified at delta_M = {}", data.deltaM));
  }
  double lo = 0.0, hi = sigmaHi;
  Certificate atHi;
  if (feasibleAt(sigmaHi, &atHi)) {
    lo = sigmaHi;
    best = std::move(atHi);
  } else {
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      Certificate c;
      if (feasibleAt(mid, &c)) {
        lo = mid;
        best = std::move(c);
      } else {
        hi = mid;
      }
    }
  }
  out.sigmaMax = lo;
  out.certificate = std::move(best);

  if (lo > 0.0) {
    std::mt19937_64 rng(mix64(std::bit_cast<std::uint64_t>(data.deltaM)));
    std::uniform_real_distribution<double> pick(0.0, lo);
    for (int k = 0; k < 3; ++k) {
      if (!feasibleAt(pick(rng), nullptr)) out.monotoneSpotCheck = false;
    }
  }
  return out;
}

}  // namespace

SigmaMaxResult sigma_max(const LmiData& data, const std::vector<Mat>& vertices, double tol,
                         double sigmaHi, const CertifyOptions& options) {
  if (!(tol > 0.0) || !(sigmaHi > 0.0)) throw DimensionMismatch("tol and sigmaHi must be positive");
  if (options.corner == CornerForm::Congruence) {
    return bisect_sigma(data, vertices, tol, sigmaHi, options);
  }
  std::optional<SigmaMaxResult> best;
  int iterations = 0, solves = 0;
  for (double alpha : options.alphas) {
    CertifyOptions single = options;
    single.alphas = {alpha};
    try {
      SigmaMaxResult r = bisect_sigma(data, vertices, tol, sigmaHi, single);
      iterations += r.newtonIterations;
      solves += r.solves;
      if (!best || r.sigmaMax > best->sigmaMax) best = std::move(r);
    } catch (const NoFeasiblePoint&) {
      ++solves;
    }
  }
  if (!best) {
    throw NoFeasiblePoint(fmt::format("sigma = 0 is not certified at delta_M = {} for any alpha",
                                      data.deltaM));
  }
  best->newtonIterations = iterations;
  best->solves = solves;
  return *best;
}

SigmaMaxResult sigma_max(const ClosedLoopModel& model, double deltaM,
                         const std::vector<Mat>& vertices, double tol, double sigmaHi,
                         const CertifyOptions& options) {
  return sigma_max(LmiData::from_model(model, deltaM, 0.0), vertices, tol, sigmaHi, options);
}

namespace {

using nlohmann::json;

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) return Mat();
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or(const json& j, double fallback) {
  return j.is_number() ? j.get<double>() : fallback;
}

}  // namespace

void write_certificate(const Certificate& c, const std::filesystem::path& path) {
  json j;
  j["verdict"] = to_string(c.verdict);
  j["delta_M"] = c.deltaM;
  j["sigma"] = c.sigma;
  j["corner"] = to_string(c.corner);
  j["alpha"] = finite_or_null(c.alpha);
  j["epsilon"] = c.epsilon;
  j["validity_radius"] = finite_or_null(c.validityRadius);
  j["P"] = matrix_to_json(c.P);
  j["Q"] = matrix_to_json(c.Q);
  j["Omega"] = matrix_to_json(c.Omega);
  j["vertices"] = json::array();
  for (const auto& v : c.vertices) j["vertices"].push_back(matrix_to_json(v));
  j["margins"] = json::object();
  for (const auto& m : c.margins) j["margins"][m.name] = m.minEigenvalue;
  j["xi_max_eigenvalue"] = finite_or_null(c.xiMaxEigenvalue);
  j["solver"] = {{"engine", c.engine},
                 {"newton_iterations", c.newtonIterations},
                 {"margin", c.engineMargin},
                 {"dual_objective", c.dualObjective},
                 {"dual_residual", c.dualResidual},
                 {"message", c.message}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

Certificate read_certificate(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  const json j = json::parse(in);
  Certificate c;
  const std::string verdict = j.at("verdict").get<std::string>();
  c.verdict = verdict == "feasible"     ? Verdict::Feasible
              : verdict == "infeasible" ? Verdict::Infeasible
                                        : Verdict::Undecided;
  c.deltaM = j.at("delta_M").get<double>();
  c.sigma = j.at("sigma").get<double>();
  c.corner = j.at("corner").get<std::string>() == "alpha" ? CornerForm::AlphaBound
                                                          : CornerForm::Congruence;
  c.alpha = number_or(j.at("alpha"), std::numeric_limits<double>::quiet_NaN());
  c.epsilon = j.at("epsilon").get<double>();
  c.validityRadius = number_or(j.at("validity_radius"), std::numeric_limits<double>::infinity());
  c.P = matrix_from_json(j.at("P"));
  c.Q = matrix_from_json(j.at("Q"));
  c.Omega = matrix_from_json(j.at("Omega"));
  for (const auto& v : j.at("vertices")) c.vertices.push_back(matrix_from_json(v));
  for (const auto& [name, value] : j.at("margins").items()) {
    c.margins.push_back({name, value.get<double>()});
  }
  c.xiMaxEigenvalue = number_or(j.at("xi_max_eigenvalue"), std::numeric_limits<double>::quiet_NaN());
  const json& s = j.at("solver");
  c.engine = s.at("engine").get<std::string>();
  c.newtonIterations = s.at("newton_iterations").get<int>();
  c.engineMargin = s.at("margin").get<double>();
  c.dualObjective = s.at("dual_objective").get<double>();
  c.dualResidual = s.at("dual_residual").get<double>();
  c.message = s.at("message").get<std::string>();
  return c;
}

}  // namespace phetc
