#include "phetc/scenario.hpp"

#include "phetc/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace phetc {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"type", "zeta", "zeta_c", "K", "J1", "R1", "G1", "M1", "J2", "R2", "G2", "M2"}},
      {"trigger", {"h", "sigma", "Omega"}},
      {"network", {"tau_m", "tau_M", "seed"}},
      {"simulation", {"xi0", "T", "dt"}},
      {"sweep", {"delta_M", "sigma", "tau_M", "runs", "table3_h", "table3_sigma", "table3_tau_m"}},
      {"output", {"dir", "name"}},
      {"lmi", {"corner", "alphas", "tol", "sigma_hi", "epsilon", "validity_radius"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string spaced = text;
  for (char& c : spaced) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(spaced);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_double(key, token));
  return out;
}

Mat parse_matrix(const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::string row;
  std::istringstream in(text);
  while (std::getline(in, row, ';')) {
    if (trim(row).empty()) continue;
    rows.push_back(parse_list(key, row));
  }
  if (rows.empty()) throw ConfigError(fmt::format("{}: empty matrix", key));
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError(fmt::format("{}: ragged matrix", key));
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not an unsigned integer", key, text));
  }
  return value;
}

Mat block_diag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("malformed scenario: {}", e.what()));
  }

  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError(fmt::format("unknown section [{}]", section));
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("'{}' appears outside a section", section));
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(fmt::format("unknown key {}.{}", section, key));
    }
  }

  Scenario s;
  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto node = tree.get_child_optional(pt::ptree::path_type(section + "\x1f" + key, '\x1f'));
    if (!node) return std::nullopt;
    return node->data();
  };
  auto num = [&](const std::string& section, const std::string& key, double& target) {
    if (auto v = get(section, key)) target = parse_double(section + "." + key, *v);
  };
  auto list = [&](const std::string& section, const std::string& key, std::vector<double>& target) {
    if (auto v = get(section, key)) target = parse_list(section + "." + key, *v);
  };
  auto mat = [&](const std::string& section, const std::string& key, Mat& target) {
    if (auto v = get(section, key)) target = parse_matrix(section + "." + key, *v);
  };

  if (auto v = get("model", "type")) s.modelType = trim(*v);
  num("model", "zeta", s.pendulum.zeta);
  num("model", "zeta_c", s.pendulum.zeta_c);
  num("model", "K", s.pendulum.K);
  mat("model", "J1", s.linear.J1);
  mat("model", "R1", s.linear.R1);
  mat("model", "G1", s.linear.G1);
  mat("model", "M1", s.linear.M1);
  mat("model", "J2", s.linear.J2);
  mat("model", "R2", s.linear.R2);
  mat("model", "G2", s.linear.G2);
  mat("model", "M2", s.linear.M2);

  num("trigger", "h", s.trigger.h);
  num("trigger", "sigma", s.trigger.sigma);
  mat("trigger", "Omega", s.trigger.Omega);
  num("network", "tau_m", s.trigger.tau_m);
  num("network", "tau_M", s.trigger.tau_M);
  if (auto v = get("network", "seed")) s.trigger.seed = parse_u64("network.seed", *v);

  if (auto v = get("simulation", "xi0")) {
    const auto xs = parse_list("simulation.xi0", *v);
    s.xi0 = Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  }
  num("simulation", "T", s.T);
  num("simulation", "dt", s.dt);

  list("sweep", "delta_M", s.deltaM);
  list("sweep", "sigma", s.sigma);
  list("sweep", "tau_M", s.tauM);
  if (auto v = get("sweep", "runs")) s.runs = static_cast<int>(parse_u64("sweep.runs", *v));
  num("sweep", "table3_h", s.table3H);
  num("sweep", "table3_sigma", s.table3Sigma);
  num("sweep", "table3_tau_m", s.table3TauMin);

  if (auto v = get("output", "dir")) s.outDir = trim(*v);
  if (auto v = get("output", "name")) s.name = trim(*v);

  if (auto v = get("lmi", "corner")) {
    const std::string c = trim(*v);
    if (c == "congruence") {
      s.corner = CornerForm::Congruence;
    } else if (c == "alpha") {
      s.corner = CornerForm::AlphaBound;
    } else {
      throw ConfigError(fmt::format("lmi.corner: '{}' is not congruence or alpha", c));
    }
  }
  list("lmi", "alphas", s.alphas);
  num("lmi", "tol", s.sigmaTol);
  num("lmi", "sigma_hi", s.sigmaHi);
  num("lmi", "epsilon", s.epsilon);
  num("lmi", "validity_radius", s.validityRadius);

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open scenario {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

void Scenario::validate() const {
  if (modelType != "pendulum" && modelType != "linear") {
    throw ConfigError(fmt::format("model.type: unknown model '{}'", modelType));
  }
  trigger.validate();
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("simulation: T and dt must be positive");
  if (deltaM.empty() || sigma.empty() || tauM.empty()) throw ConfigError("sweep: axes must be nonempty");
  for (double d : deltaM) {
    if (!(d > 0.0)) throw ConfigError("sweep.delta_M: values must be positive");
  }
  for (double v : sigma) {
    if (!(v >= 0.0)) throw ConfigError("sweep.sigma: values must be nonnegative");
  }
  for (double v : tauM) {
    if (!(v >= 0.0)) throw ConfigError("sweep.tau_M: values must be nonnegative");
  }
  if (runs < 1) throw ConfigError("sweep.runs must be at least 1");
  if (!(table3H > 0.0) || !(table3Sigma >= 0.0) || !(table3TauMin >= 0.0)) {
    throw ConfigError("sweep: table3 parameters out of range");
  }
  if (name.empty()) throw ConfigError("output.name must be nonempty");
  if (alphas.empty()) throw ConfigError("lmi.alphas must be nonempty");
  for (double a : alphas) {
    if (!(a > 0.0)) throw ConfigError("lmi.alphas: values must be positive");
  }
  if (!(sigmaTol > 0.0) || !(sigmaHi > 0.0)) throw ConfigError("lmi: tol and sigma_hi must be positive");
  if (!(validityRadius > 0.0)) throw ConfigError("lmi.validity_radius must be positive");

  Eigen::Index n = 3, m = 1;
  if (modelType == "linear") {
    const auto& L = linear;
    for (const Mat* M : {&L.J1, &L.R1, &L.G1, &L.M1, &L.J2, &L.R2, &L.G2, &L.M2}) {
      if (M->size() == 0) throw ConfigError("model: linear models need J1 R1 G1 M1 J2 R2 G2 M2");
    }
    n = L.M1.rows() + L.M2.rows();
    m = L.G1.cols();
  }
  if (xi0.size() != n) throw ConfigError(fmt::format("simulation.xi0 must have {} entries", n));
  if (trigger.Omega.rows() != m) throw ConfigError(fmt::format("trigger.Omega must be {}x{}", m, m));
}

ClosedLoopModel Scenario::model() const {
  try {
    if (modelType == "pendulum") return make_pendulum_model(pendulum);
    return assemble_interconnection(make_linear_subsystem(linear.J1, linear.R1, linear.G1, linear.M1),
                                    make_linear_subsystem(linear.J2, linear.R2, linear.G2, linear.M2));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("model: {}", e.what()));
  }
}

std::vector<Mat> Scenario::hessianVertices() const {
  if (modelType == "pendulum") return pendulum_hessian_vertices(pendulum.K, validityRadius);
  return {block_diag(linear.M1, linear.M2)};
}

CertifyOptions Scenario::certifyOptions() const {
  CertifyOptions o;
  o.corner = corner;
  o.alphas = alphas;
  o.epsilon = epsilon;
  o.validityRadius = validityRadius;
  return o;
}

std::uint64_t derive_seed(std::uint64_t root, double sigma, double tauM, std::uint64_t index) {
  std::uint64_t h = mix64(root);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(sigma));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(tauM));
  return mix64(h ^ index);
}

}  // namespace phetc
