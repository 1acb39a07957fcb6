#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "maslov/errors.hpp"
#include "maslov/shooting.hpp"

using namespace maslov;
using std::numbers::pi;

namespace {

Potential const_1d(double v) { return Potential::constant(rectangular_lattice({1.0}), Eigen::MatrixXd::Constant(1, 1, v)); }

// v0 + 2 a cos(2 pi x).
Potential cos_1d(double v0, double a) {
  const Lattice lat = rectangular_lattice({1.0});
  return Potential::fourier(lat, 1,
                            {{Eigen::VectorXi::Constant(1, 0), Eigen::MatrixXcd::Constant(1, 1, v0)},
                             {Eigen::VectorXi::Constant(1, 1), Eigen::MatrixXcd::Constant(1, 1, a)},
                             {Eigen::VectorXi::Constant(1, -1), Eigen::MatrixXcd::Constant(1, 1, a)}});
}

BasisSpec basis_1d(Boundary bc, double theta, int K, int m = 1) {
  BasisSpec b;
  b.bc = bc;
  b.theta = Eigen::VectorXd::Constant(1, theta);
  b.K = K;
  b.lattice = rectangular_lattice({1.0});
  b.m = m;
  return b;
}

}  // namespace

TEST_CASE("trace space and reference planes") {
  for (int m : {1, 2, 3}) {
    const SymplecticSpace S = trace_space(m);
    CHECK(S.real_dim() == 8 * m);
    for (double theta : {0.0, 0.25, 0.7}) CHECK(is_lagrangian(S, reference_plane(Boundary::Theta, theta, m).X, 1e-12));
    CHECK(is_lagrangian(S, reference_plane(Boundary::Dirichlet, 0.0, m).X, 1e-12));
    CHECK(is_lagrangian(S, reference_plane(Boundary::Neumann, 0.0, m).X, 1e-12));
  }
  // omega((u0, u1, p0, p1), (v0, v1, q0, q1)) for m = 1 in realified coordinates.
  const SymplecticSpace S = trace_space(1);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(8), w = Eigen::VectorXd::Zero(8);
  z(2) = 1.0;  // u1 real part
  w(6) = 1.0;  // p1 real part
  CHECK(S.omega(z, w) == doctest::Approx(1.0));
  z.setZero();
  z(0) = 1.0;  // u0
  w.setZero();
  w(4) = 1.0;  // p0
  CHECK(S.omega(z, w) == doctest::Approx(-1.0));
}

TEST_CASE("fundamental solutions: free equation and cosine") {
  const SolutionBundle b = fundamental_solutions(const_1d(0.0), 1.0, 0.0, 64);
  // Realified columns 0 and 2 are the real parts of the solutions 1 and x.
  Eigen::VectorXd one(8), lin(8);
  one << 1, 0, 1, 0, 0, 0, 0, 0;
  lin << 0, 0, 1, 0, 1, 0, 1, 0;
  CHECK((b.traces.col(0) - one).norm() < 1e-14);
  CHECK((b.traces.col(2) - lin).norm() < 1e-14);
  CHECK(b.richardson_error < 1e-14);

  const double c = 5.0;
  const SolutionBundle cb = fundamental_solutions(const_1d(-c * c), 1.0, 0.0, 512);
  CHECK(std::abs(cb.traces(2, 0) - std::cos(c)) < 1e-9);
  CHECK(std::abs(cb.traces(2, 2) - std::sin(c) / c) < 1e-9);
  CHECK(std::abs(cb.traces(6, 0) + c * std::sin(c)) < 1e-8);
  // Wronskian constancy is isotropy of the trace frame.
  const SymplecticSpace S = trace_space(1);
  CHECK((cb.traces.transpose() * S.J * cb.traces).norm() < 1e-10);

  CHECK_THROWS_AS(fundamental_solutions(const_1d(-1e4), 1.0, 0.0, 64), StepTooCoarse);
  CHECK_THROWS_AS(fundamental_solutions(const_1d(0.0), 1.0, 0.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(fundamental_solutions(Potential::constant(rectangular_lattice({1.0, 1.0}), Eigen::MatrixXd::Ones(1, 1)),
                                        1.0, 0.0, 64),
                  UnsupportedLattice);
}

TEST_CASE("fundamental solutions: matrix potential stays Lagrangian") {
  const Lattice lat = rectangular_lattice({1.0});
  Eigen::MatrixXcd c0(2, 2), c1(2, 2);
  c0 << -30.0, 4.0, 4.0, -10.0;
  c1 << 3.0, 1.0, 1.0, -2.0;
  const Potential V = Potential::fourier(lat, 2,
                                         {{Eigen::VectorXi::Constant(1, 0), c0},
                                          {Eigen::VectorXi::Constant(1, 1), c1},
                                          {Eigen::VectorXi::Constant(1, -1), c1}});
  const SolutionBundle b = fundamental_solutions(V, 0.8, -3.0, 256);
  CHECK((b.traces.transpose() * trace_space(2).J * b.traces).norm() < 1e-8);
}

TEST_CASE("maslov_1d: quasi-periodic constant potential") {
  const Potential V = const_1d(-100.0);
  Maslov1dOptions o;
  o.theta = 0.25;
  const Maslov1dResult cf = maslov_1d(V, Boundary::Theta, 0.05, Route::CrossingForms, o);
  const Maslov1dResult sf = maslov_1d(V, Boundary::Theta, 0.05, Route::SpectralFlow, o);
  CHECK(cf.maslov == -6);
  CHECK(sf.maslov == -6);
  const double expected[] = {2 * pi * 0.25 / 10, 2 * pi * 0.75 / 10, 2 * pi * 1.25 / 10};
  REQUIRE(cf.crossings.size() == 3);
  REQUIRE(sf.crossings.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(cf.crossings[i].t - expected[i]) < 1e-6);
    CHECK(std::abs(sf.crossings[i].t - expected[i]) < 1e-6);
    CHECK(cf.crossings[i].dim_real == 2);
    CHECK(cf.crossings[i].signature == -2);
    CHECK(cf.crossings[i].relative_gap < 1e-5);
  }
}

TEST_CASE("maslov_1d: periodic constant potential, degenerate crossing") {
  Maslov1dOptions o;
  o.theta = 0.0;
  const Maslov1dResult r = maslov_1d(const_1d(-100.0), Boundary::Theta, 0.05, Route::CrossingForms, o);
  REQUIRE(r.crossings.size() == 1);
  CHECK(std::abs(r.crossings[0].t - 2 * pi / 10) < 1e-6);
  CHECK(r.crossings[0].dim_real == 4);
  CHECK(r.crossings[0].signature == -4);
  CHECK(r.crossings[0].relative_gap < 1e-5);
  CHECK(r.maslov == -4);
  CHECK(maslov_1d(const_1d(-100.0), Boundary::Theta, 0.05, Route::SpectralFlow, o).maslov == -4);
}

TEST_CASE("maslov_1d: positive potential has no crossings") {
  Maslov1dOptions o;
  o.theta = 0.25;
  for (Route r : {Route::CrossingForms, Route::SpectralFlow}) {
    const Maslov1dResult res = maslov_1d(const_1d(100.0), Boundary::Theta, 0.05, r, o);
    CHECK(res.maslov == 0);
    CHECK(res.crossings.empty());
  }
}

TEST_CASE("maslov_1d: Dirichlet and Neumann") {
  const Maslov1dResult d = maslov_1d(const_1d(-25.0), Boundary::Dirichlet, 0.05, Route::CrossingForms);
  REQUIRE(d.crossings.size() == 1);
  CHECK(std::abs(d.crossings[0].t - pi / 5) < 1e-6);
  CHECK(d.maslov == -2);
  CHECK(d.crossings[0].relative_gap < 1e-5);
  CHECK(maslov_1d(const_1d(-25.0), Boundary::Dirichlet, 0.05, Route::SpectralFlow).maslov == -2);
  CHECK(morse_count(basis_1d(Boundary::Dirichlet, 0.0, 32), const_1d(-25.0), 1.0) == 1);

  // Neumann, V = -25: eigenvalues (k pi)^2 t^-2 scaled; crossings at t = k pi / 5 for k = 1.
  const Maslov1dResult n = maslov_1d(const_1d(-25.0), Boundary::Neumann, 0.05, Route::CrossingForms);
  REQUIRE(n.crossings.size() == 1);
  CHECK(std::abs(n.crossings[0].t - pi / 5) < 1e-6);
  CHECK(n.maslov == -2);
}

TEST_CASE("maslov_1d: cosine potential against the Galerkin spectrum") {
  const Potential V = cos_1d(-50.0, -5.0);
  for (double theta : {0.0, 0.25}) {
    Maslov1dOptions o;
    o.theta = theta;
    const double tau = 0.05;
    const Maslov1dResult cf = maslov_1d(V, Boundary::Theta, tau, Route::CrossingForms, o);
    const Maslov1dResult sf = maslov_1d(V, Boundary::Theta, tau, Route::SpectralFlow, o);
    CHECK(cf.maslov == sf.maslov);
    const BasisSpec b = basis_1d(Boundary::Theta, theta, 48);
    const int mor1 = morse_count(b, V, 1.0), mor_tau = morse_count(b, V, tau);
    CHECK(cf.maslov == -2 * (mor1 - mor_tau));
    const auto zc = find_zero_crossings(b, V, tau, 1.0);
    REQUIRE(zc.size() == cf.crossings.size());
    for (std::size_t i = 0; i < zc.size(); ++i) {
      CHECK(std::abs(zc[i].t - cf.crossings[i].t) < 1e-6);
      CHECK(cf.crossings[i].dim_real == 2 * zc[i].dim);
      CHECK(cf.crossings[i].relative_gap < 1e-5);
      CHECK(cf.crossings[i].signature == -cf.crossings[i].dim_real);
    }
  }
}

TEST_CASE("maslov_1d: matrix potentials, Morse identity") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const Lattice lat = rectangular_lattice({1.0});
  for (int trial = 0; trial < 3; ++trial) {
    const int m = 1 + trial % 2;
    // Negative-definite constant part dominating a small cosine mode.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m), B(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) B(i, j) = g(rng);
    A = -40.0 * Eigen::MatrixXd::Identity(m, m) - 5.0 * (B * B.transpose());
    Eigen::MatrixXd C(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) C(i, j) = g(rng);
    C = (0.5 * (C + C.transpose())).eval();
    const Potential V = Potential::fourier(lat, m,
                                           {{Eigen::VectorXi::Constant(1, 0), A.cast<std::complex<double>>()},
                                            {Eigen::VectorXi::Constant(1, 1), C.cast<std::complex<double>>()},
                                            {Eigen::VectorXi::Constant(1, -1), C.cast<std::complex<double>>()}});
    Maslov1dOptions o;
    o.theta = 0.3;
    const Maslov1dResult r = maslov_1d(V, Boundary::Theta, 0.05, Route::CrossingForms, o);
    CHECK(r.maslov == maslov_1d(V, Boundary::Theta, 0.05, Route::SpectralFlow, o).maslov);
    const BasisSpec b = basis_1d(Boundary::Theta, 0.3, 32, m);
    CHECK(morse_count(b, V, 0.05) == 0);
    CHECK(2 * morse_count(b, V, 1.0) == -r.maslov);
    for (const auto& c : r.crossings) CHECK(c.signature == -c.dim_real);
  }
}

TEST_CASE("maslov_1d_lambda: eigenvalue sweep") {
  // At t = 1 the theta = 0.25 operator with V = -100 has three negative
  // eigenvalues above -101; increasing lambda through each is a negative crossing.
  Maslov1dOptions o;
  o.theta = 0.25;
  const Maslov1dResult r = maslov_1d_lambda(const_1d(-100.0), Boundary::Theta, 1.0, -101.0, -1.0, Route::CrossingForms, o);
  CHECK(r.maslov == -6);
  REQUIRE(r.crossings.size() == 3);
  for (const auto& c : r.crossings) CHECK(c.signature == -2);
  CHECK(maslov_1d_lambda(const_1d(-100.0), Boundary::Theta, 1.0, -101.0, -1.0, Route::SpectralFlow, o).maslov == -6);
}
