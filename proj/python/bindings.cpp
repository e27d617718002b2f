#include "phetc/errors.hpp"
#include "phetc/lk_analysis.hpp"
#include "phetc/lmi_certifier.hpp"
#include "phetc/pendulum.hpp"
#include "phetc/sim_engine.hpp"
#include "phetc/trigger_net.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace phetc;

namespace {

Mat stack_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return Mat();
  Mat out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

std::vector<Vec> split_rows(const Mat& m) {
  std::vector<Vec> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m.row(i).transpose());
  return out;
}

CornerForm parse_corner(const std::string& s) {
  if (s == "congruence") return CornerForm::Congruence;
  if (s == "alpha") return CornerForm::AlphaBound;
  throw py::value_error("corner must be 'congruence' or 'alpha'");
}

py::dict indices_dict(const PerformanceIndices& p) {
  py::dict d;
  d["ise"] = p.ise;
  d["iae"] = p.iae;
  d["itae"] = p.itae;
  return d;
}

}  // namespace

PYBIND11_MODULE(_phetc, m) {
  m.doc() = "Event-triggered port-Hamiltonian networks: simulation and LMI certification";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base);
  py::register_exception<StepMismatch>(m, "StepMismatch", base);
  py::register_exception<NonFiniteState>(m, "NonFiniteState", base);
  py::register_exception<InsufficientHistory>(m, "InsufficientHistory", base);
  py::register_exception<NonConstantMatrices>(m, "NonConstantMatrices", base);
  py::register_exception<NoFeasiblePoint>(m, "NoFeasiblePoint", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  py::class_<PendulumParams>(m, "PendulumParams")
      .def(py::init<>())
      .def_readwrite("zeta", &PendulumParams::zeta)
      .def_readwrite("zeta_c", &PendulumParams::zeta_c)
      .def_readwrite("K", &PendulumParams::K);

  py::class_<ClosedLoopModel>(m, "ClosedLoopModel")
      .def_property_readonly("state_dim", &ClosedLoopModel::stateDim)
      .def_property_readonly("port_dim", &ClosedLoopModel::portDim)
      .def("A", py::overload_cast<>(&ClosedLoopModel::A, py::const_))
      .def("Ad", py::overload_cast<>(&ClosedLoopModel::Ad, py::const_))
      .def("Ae", py::overload_cast<>(&ClosedLoopModel::Ae, py::const_))
      .def("Gcal", py::overload_cast<>(&ClosedLoopModel::Gcal, py::const_))
      .def("hamiltonian", &ClosedLoopModel::hamiltonian)
      .def("grad", &ClosedLoopModel::gradTotal)
      .def("hessian", &ClosedLoopModel::hessTotal);

  m.def("pendulum_model", [](double zeta, double zeta_c, double K) {
    return make_pendulum_model({zeta, zeta_c, K});
  }, py::arg("zeta") = 0.1, py::arg("zeta_c") = 1.0, py::arg("K") = 3.0);
  m.def("pendulum_hessian_vertices", &pendulum_hessian_vertices, py::arg("K") = 3.0,
        py::arg("validity_radius") = std::numbers::pi);

  py::class_<TriggerDelayConfig>(m, "TriggerDelayConfig")
      .def(py::init([](double h, double sigma, double tau_m, double tau_M, std::uint64_t seed,
                       std::optional<Mat> omega) {
             TriggerDelayConfig c;
             c.h = h;
             c.sigma = sigma;
             c.tau_m = tau_m;
             c.tau_M = tau_M;
             c.seed = seed;
             if (omega) c.Omega = *omega;
             c.validate();
             return c;
           }),
           py::arg("h") = 0.3, py::arg("sigma") = 0.1, py::arg("tau_m") = 0.0,
           py::arg("tau_M") = 0.0, py::arg("seed") = 1, py::arg("Omega") = py::none())
      .def_readwrite("h", &TriggerDelayConfig::h)
      .def_readwrite("sigma", &TriggerDelayConfig::sigma)
      .def_readwrite("tau_m", &TriggerDelayConfig::tau_m)
      .def_readwrite("tau_M", &TriggerDelayConfig::tau_M)
      .def_readwrite("seed", &TriggerDelayConfig::seed)
      .def_readwrite("Omega", &TriggerDelayConfig::Omega)
      .def_property_readonly("delta_M", &TriggerDelayConfig::delta_M);

  m.def("check_trigger", &check_trigger, py::arg("cfg"), py::arg("e"), py::arg("y1"));
  m.def("sample_delay", &sample_delay, py::arg("cfg"), py::arg("t_k"));

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("dt", &SimTrace::dt)
      .def_readonly("h", &SimTrace::h)
      .def_readonly("times", &SimTrace::times)
      .def_property_readonly("states", [](const SimTrace& t) { return stack_rows(t.states); })
      .def_property_readonly("held", [](const SimTrace& t) { return stack_rows(t.held); })
      .def_readonly("H1", &SimTrace::H1)
      .def_property_readonly("event", [](const SimTrace& t) {
        return std::vector<bool>(t.event.begin(), t.event.end());
      })
      .def_property_readonly("transmission_count", &SimTrace::transmissionCount)
      .def_readonly("avg_inter_event", &SimTrace::avgInterEvent)
      .def_property_readonly("indices", [](const SimTrace& t) { return indices_dict(t.indices); })
      .def("__len__", &SimTrace::size);

  m.def("simulate", &simulate, py::arg("model"), py::arg("cfg"), py::arg("xi0"), py::arg("T"),
        py::arg("dt"));
  m.def("performance_indices", [](const std::vector<double>& t, const std::vector<double>& s) {
    return indices_dict(performance_indices(t, s));
  }, py::arg("times"), py::arg("signal"));

  py::class_<Certificate>(m, "Certificate")
      .def_property_readonly("verdict", [](const Certificate& c) { return std::string(to_string(c.verdict)); })
      .def_property_readonly("feasible", &Certificate::feasible)
      .def_readonly("delta_M", &Certificate::deltaM)
      .def_readonly("sigma", &Certificate::sigma)
      .def_readonly("alpha", &Certificate::alpha)
      .def_readonly("epsilon", &Certificate::epsilon)
      .def_readonly("P", &Certificate::P)
      .def_readonly("Q", &Certificate::Q)
      .def_readonly("Omega", &Certificate::Omega)
      .def_readonly("xi_max_eigenvalue", &Certificate::xiMaxEigenvalue)
      .def_readonly("newton_iterations", &Certificate::newtonIterations)
      .def_readonly("message", &Certificate::message)
      .def_property_readonly("margins", [](const Certificate& c) {
        py::dict d;
        for (const auto& mg : c.margins) d[py::str(mg.name)] = mg.minEigenvalue;
        return d;
      });

  m.def("certify", [](const ClosedLoopModel& model, double deltaM, double sigma,
                      const std::vector<Mat>& vertices, const std::string& corner) {
    CertifyOptions o;
    o.corner = parse_corner(corner);
    return certify_polytopic(model, deltaM, sigma, vertices, o);
  }, py::arg("model"), py::arg("delta_M"), py::arg("sigma"), py::arg("vertices"),
        py::arg("corner") = "congruence");

  m.def("sigma_max", [](const ClosedLoopModel& model, double deltaM, const std::vector<Mat>& vertices,
                        double tol, double sigmaHi, const std::string& corner) {
    CertifyOptions o;
    o.corner = parse_corner(corner);
    const SigmaMaxResult r = sigma_max(model, deltaM, vertices, tol, sigmaHi, o);
    py::dict d;
    d["delta_M"] = r.deltaM;
    d["sigma_max"] = r.sigmaMax;
    d["alpha_used"] = r.alphaUsed;
    d["newton_iterations"] = r.newtonIterations;
    d["solves"] = r.solves;
    d["monotone_spot_check"] = r.monotoneSpotCheck;
    return d;
  }, py::arg("model"), py::arg("delta_M"), py::arg("vertices"), py::arg("tol") = 0.01,
        py::arg("sigma_hi") = 10.0, py::arg("corner") = "congruence");

  m.def("wirtinger_gap", [](const Mat& Q, const std::vector<double>& times, const Mat& omega) {
    return wirtinger_gap(Q, times, split_rows(omega));
  }, py::arg("Q"), py::arg("times"), py::arg("omega"),
        "omega holds one sample per row");
}
