#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maslov/config.hpp"
#include "maslov/errors.hpp"

using namespace maslov;

namespace {

const char* kBase = R"(
[lattice]
sides = 1.0 2.0

[potential]
m = 2
kind = fourier
terms = 0 0 : -4 1 1 9 ; 1 0 : 0.25 0 0 0.25 ; -1 0 : 0.25 0 0 0.25

[bc]
type = theta
theta = 0.25 0.5

[solver]
K = 4
tau = 0.1
identity = quasi_periodic

[tolerances]
eps_form = 1e-5

[output]
prefix = demo
)";

std::string error_of(const std::string& text, const std::vector<std::pair<std::string, std::string>>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("a full config parses") {
  const ExperimentConfig c = parse_config(kBase);
  CHECK(c.lattice_basis.isApprox(Eigen::Vector2d(1.0, 2.0).asDiagonal().toDenseMatrix()));
  CHECK(c.m == 2);
  REQUIRE(c.terms.size() == 3);
  CHECK(c.terms[0].coeff.real().isApprox((Eigen::Matrix2d() << -4, 1, 1, 9).finished()));
  CHECK(c.terms[1].q == Eigen::Vector2i(1, 0));
  CHECK(c.bc == Boundary::Theta);
  CHECK(c.theta.isApprox(Eigen::Vector2d(0.25, 0.5)));
  CHECK(c.K == 4);
  CHECK(c.tau == 0.1);
  CHECK(c.identity == "quasi_periodic");
  CHECK(c.eps_form == 1e-5);
  CHECK(!c.eps_ker.has_value());
  CHECK(c.prefix == "demo");
  const Potential V = c.potential();
  CHECK(V.eval(Eigen::Vector2d(0.0, 0.3)).isApprox((Eigen::Matrix2d() << -3.5, 1, 1, 9.5).finished(), 1e-12));
  CHECK(c.basis().size() == 81 * 2);
}

TEST_CASE("overrides replace file values") {
  const ExperimentConfig c = parse_config(kBase, {{"solver.K", "6"}, {"bc.theta", "0 0"}, {"tolerances.eps_ker", "1e-9"}});
  CHECK(c.K == 6);
  CHECK(c.theta.isZero());
  REQUIRE(c.eps_ker.has_value());
  CHECK(*c.eps_ker == 1e-9);
}

TEST_CASE("errors name the offending key") {
  CHECK(error_of(kBase, {{"solver.K", "four"}}).find("solver.K") != std::string::npos);
  CHECK(error_of(kBase, {{"solver.tau", "1.5"}}).find("solver.tau") != std::string::npos);
  CHECK(error_of(kBase, {{"bc.theta", "0.25"}}).find("bc.theta") != std::string::npos);
  CHECK(error_of(kBase, {{"bc.theta", "1.0 0.0"}}).find("bc.theta") != std::string::npos);
  CHECK(error_of(kBase, {{"bc.type", "robin"}}).find("bc.type") != std::string::npos);
  CHECK(error_of(kBase, {{"solver.colour", "red"}}).find("solver.colour") != std::string::npos);
  CHECK(error_of(kBase, {{"potential.terms", "0 0 : 1 2 3"}}).find("potential.terms") != std::string::npos);
  CHECK(error_of(kBase, {{"tolerances.t_tol", "-1"}}).find("tolerances.t_tol") != std::string::npos);
  CHECK(error_of("[lattice]\nsides = 1\n[potential]\nconstant = 1 2 3 4\nm = 2\n").find("symmetric") !=
        std::string::npos);
  CHECK(error_of("[lattice]\nsides = 1\n[potential]\nconstant = 1 2\n").find("potential.constant") !=
        std::string::npos);
  CHECK(error_of("[potential]\nconstant = 1\n").find("lattice") != std::string::npos);
  CHECK(error_of("[lattice\nsides = 1\n").find("malformed") != std::string::npos);
  CHECK(!error_of("[lattice]\nbasis = 1 0 ; 0.5 1\n[potential]\nconstant = 1\n[bc]\ntype = dirichlet\n").empty());
}

TEST_CASE("skew lattices and complex coefficients") {
  const ExperimentConfig c = parse_config(
      "[lattice]\nbasis = 1 0 ; 0.5 1\n[potential]\nkind = fourier\n"
      "terms = 0 0 : -3 ; 1 0 : 0,-0.5 ; -1 0 : 0,0.5\n[bc]\ntheta = 0.1 0.2\n");
  CHECK(c.lattice_basis(0, 1) == 0.5);
  CHECK(c.terms[1].coeff(0, 0) == std::complex<double>(0.0, -0.5));
  // -3 + sin(2 pi s_1) at lattice coordinate s_1 = 1/4.
  const Lattice lat = c.lattice();
  CHECK(c.potential().eval(lat.to_cartesian(Eigen::Vector2d(0.25, 0.0)))(0, 0) == doctest::Approx(-2.0));
}
