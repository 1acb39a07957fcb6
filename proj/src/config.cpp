#include "maslov/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "maslov/errors.hpp"

namespace maslov {

namespace pt = boost::property_tree;

namespace {

const std::vector<std::pair<std::string, std::vector<std::string>>> kKnownKeys = {
    {"lattice", {"sides", "basis"}},
    {"potential", {"m", "kind", "constant", "terms"}},
    {"bc", {"type", "theta"}},
    {"solver", {"field", "K", "tau", "auto_tau", "t_grid", "collocation_n", "identity", "seed"}},
    {"tolerances", {"eps_ker", "eps_form", "t_tol"}},
    {"output", {"dir", "prefix"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); }

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) bad(key, "not a number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad(key, "not a number: '" + s + "'");
  }
}

int to_int(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) bad(key, "not an integer: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad(key, "not an integer: '" + s + "'");
  }
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad(key, "expected true or false, got '" + s + "'");
}

std::vector<double> numbers(const std::string& key, const std::string& s) {
  std::vector<double> v;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) v.push_back(to_double(key, tok));
  return v;
}

// "re" or "re,im".
std::complex<double> to_complex(const std::string& key, const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() == 1) return {to_double(key, parts[0]), 0.0};
  if (parts.size() == 2) return {to_double(key, parts[0]), to_double(key, parts[1])};
  bad(key, "bad coefficient '" + s + "'");
}

Eigen::MatrixXd square(const std::string& key, const std::vector<double>& v, int m) {
  if (static_cast<int>(v.size()) != m * m) bad(key, "expected " + std::to_string(m * m) + " entries");
  Eigen::MatrixXd M(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) M(i, j) = v[static_cast<std::size_t>(i * m + j)];
  return M;
}

// "q_1 .. q_n : c_11 c_12 .. ; ..." with m * m coefficients per term.
std::vector<FourierTerm> parse_terms(const std::string& key, const std::string& s, int n, int m) {
  std::vector<FourierTerm> out;
  for (const auto& item : split(s, ';')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) bad(key, "term '" + item + "' lacks ':'");
    FourierTerm term;
    const auto q = numbers(key, item.substr(0, colon));
    if (static_cast<int>(q.size()) != n) bad(key, "term '" + item + "' needs " + std::to_string(n) + " indices");
    term.q.resize(n);
    for (int j = 0; j < n; ++j) {
      if (q[static_cast<std::size_t>(j)] != std::round(q[static_cast<std::size_t>(j)])) bad(key, "non-integer index");
      term.q(j) = static_cast<int>(q[static_cast<std::size_t>(j)]);
    }
    std::istringstream is(item.substr(colon + 1));
    std::vector<std::complex<double>> c;
    std::string tok;
    while (is >> tok) c.push_back(to_complex(key, tok));
    if (static_cast<int>(c.size()) != m * m) bad(key, "term '" + item + "' needs " + std::to_string(m * m) + " coefficients");
    term.coeff.resize(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) term.coeff(i, j) = c[static_cast<std::size_t>(i * m + j)];
    out.push_back(std::move(term));
  }
  if (out.empty()) bad(key, "no terms");
  return out;
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto known = std::find_if(kKnownKeys.begin(), kKnownKeys.end(),
                                     [&](const auto& e) { return e.first == section; });
    if (known == kKnownKeys.end()) bad(section, "unknown section");
    for (const auto& [key, value] : body)
      if (std::find(known->second.begin(), known->second.end(), key) == known->second.end())
        bad(section + "." + key, "unknown key");
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return trim(*v);
    return std::nullopt;
  };

  ExperimentConfig cfg;
  // [lattice]
  if (auto s = get("lattice.basis")) {
    const auto rows = split(*s, ';');
    const int n = static_cast<int>(rows.size());
    cfg.lattice_basis.resize(n, n);
    for (int j = 0; j < n; ++j) {
      const auto v = numbers("lattice.basis", rows[static_cast<std::size_t>(j)]);
      if (static_cast<int>(v.size()) != n) bad("lattice.basis", "each vector needs " + std::to_string(n) + " entries");
      for (int i = 0; i < n; ++i) cfg.lattice_basis(i, j) = v[static_cast<std::size_t>(i)];
    }
  } else if (auto s2 = get("lattice.sides")) {
    const auto v = numbers("lattice.sides", *s2);
    if (v.empty()) bad("lattice.sides", "empty");
    cfg.lattice_basis = Eigen::VectorXd::Map(v.data(), static_cast<Eigen::Index>(v.size())).asDiagonal();
  } else {
    bad("lattice", "needs 'sides' or 'basis'");
  }
  const int n = static_cast<int>(cfg.lattice_basis.cols());

  // [potential]
  if (auto s = get("potential.m")) cfg.m = to_int("potential.m", *s);
  if (cfg.m < 1) bad("potential.m", "must be positive");
  const std::string kind = get("potential.kind").value_or("constant");
  if (kind == "constant") {
    cfg.potential_kind = ExperimentConfig::PotentialKind::Constant;
    const auto s = get("potential.constant");
    if (!s) bad("potential.constant", "missing");
    cfg.constant = square("potential.constant", numbers("potential.constant", *s), cfg.m);
  } else if (kind == "fourier") {
    cfg.potential_kind = ExperimentConfig::PotentialKind::Fourier;
    const auto s = get("potential.terms");
    if (!s) bad("potential.terms", "missing");
    cfg.terms = parse_terms("potential.terms", *s, n, cfg.m);
  } else {
    bad("potential.kind", "expected constant or fourier, got '" + kind + "'");
  }

  // [bc]
  const std::string type = get("bc.type").value_or("theta");
  if (type == "theta") cfg.bc = Boundary::Theta;
  else if (type == "dirichlet") cfg.bc = Boundary::Dirichlet;
  else if (type == "neumann") cfg.bc = Boundary::Neumann;
  else bad("bc.type", "expected theta, dirichlet or neumann, got '" + type + "'");
  cfg.theta = Eigen::VectorXd::Zero(n);
  if (auto s = get("bc.theta")) {
    const auto v = numbers("bc.theta", *s);
    if (static_cast<int>(v.size()) != n) bad("bc.theta", "needs " + std::to_string(n) + " entries");
    cfg.theta = Eigen::VectorXd::Map(v.data(), n);
  }

  // [solver]
  if (auto s = get("solver.field")) {
    if (*s == "complex") cfg.field = Field::Complex;
    else if (*s == "realified") cfg.field = Field::Realified;
    else bad("solver.field", "expected complex or realified, got '" + *s + "'");
  }
  if (auto s = get("solver.K")) cfg.K = to_int("solver.K", *s);
  if (auto s = get("solver.tau")) cfg.tau = to_double("solver.tau", *s);
  if (auto s = get("solver.auto_tau")) cfg.auto_tau = to_bool("solver.auto_tau", *s);
  if (auto s = get("solver.t_grid")) cfg.t_grid = to_int("solver.t_grid", *s);
  if (auto s = get("solver.collocation_n")) cfg.collocation_n = to_int("solver.collocation_n", *s);
  if (auto s = get("solver.identity")) cfg.identity = *s;
  if (auto s = get("solver.seed")) cfg.seed = static_cast<unsigned>(to_int("solver.seed", *s));

  // [tolerances]
  if (auto s = get("tolerances.eps_ker"); s && *s != "auto") cfg.eps_ker = to_double("tolerances.eps_ker", *s);
  if (auto s = get("tolerances.eps_form")) cfg.eps_form = to_double("tolerances.eps_form", *s);
  if (auto s = get("tolerances.t_tol")) cfg.t_tol = to_double("tolerances.t_tol", *s);

  // [output]
  if (auto s = get("output.dir")) cfg.output_dir = *s;
  if (auto s = get("output.prefix")) cfg.prefix = *s;

  cfg.validate();
  return cfg;
}

pt::ptree read_tree(std::istream& is, const std::vector<std::pair<std::string, std::string>>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [key, value] : overrides) {
    if (std::count(key.begin(), key.end(), '.') != 1) bad(key, "override keys have the form section.key");
    tree.put(pt::ptree::path_type(key, '.'), value);
  }
  return tree;
}

}  // namespace

Lattice ExperimentConfig::lattice() const { return build_lattice(lattice_basis); }

Potential ExperimentConfig::potential() const {
  if (potential_kind == PotentialKind::Constant) return Potential::constant(lattice(), constant);
  return Potential::fourier(lattice(), m, terms);
}

BasisSpec ExperimentConfig::basis() const { return basis(field); }

BasisSpec ExperimentConfig::basis(Field f) const {
  BasisSpec b;
  b.bc = bc;
  b.theta = theta;
  b.K = K;
  b.lattice = lattice();
  b.m = m;
  b.field = f;
  return b;
}

void ExperimentConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) bad("solver.tau", "must lie in (0, 1)");
  if (K < 1) bad("solver.K", "must be positive");
  if (t_grid != 0 && t_grid < 2) bad("solver.t_grid", "needs at least 2 points");
  if (collocation_n < 0) bad("solver.collocation_n", "must be nonnegative");
  if (eps_ker && !(*eps_ker > 0.0)) bad("tolerances.eps_ker", "must be positive");
  if (!(eps_form > 0.0)) bad("tolerances.eps_form", "must be positive");
  if (!(t_tol > 0.0)) bad("tolerances.t_tol", "must be positive");
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    if (!(theta(j) >= 0.0 && theta(j) < 1.0)) bad("bc.theta", "entries must lie in [0, 1)");
  if (potential_kind == PotentialKind::Constant && (constant - constant.transpose()).norm() > 0.0)
    bad("potential.constant", "matrix must be symmetric");
  try {
    Lattice lat = lattice();
    if (bc != Boundary::Theta && !lat.is_rectangular()) bad("bc.type", "Dirichlet and Neumann need a rectangular cell");
    potential();
    basis().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::istringstream is(text);
  return from_tree(read_tree(is, overrides));
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return from_tree(read_tree(f, overrides));
}

}  // namespace maslov
