#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "maslov/collocation.hpp"
#include "maslov/errors.hpp"

using namespace maslov;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

BasisSpec make_basis(Boundary bc, const Lattice& lat, Eigen::VectorXd theta, int K, int m = 1) {
  BasisSpec b;
  b.bc = bc;
  b.theta = std::move(theta);
  b.K = K;
  b.lattice = lat;
  b.m = m;
  return b;
}

Potential trig_2d() {
  // -50 - 5 cos(2 pi x1) cos(2 pi x2)
  const Lattice lat = rectangular_lattice({1.0, 1.0});
  std::vector<FourierTerm> terms{{Eigen::Vector2i(0, 0), Eigen::MatrixXcd::Constant(1, 1, -50.0)}};
  for (int a : {-1, 1})
    for (int b : {-1, 1}) terms.push_back({Eigen::Vector2i(a, b), Eigen::MatrixXcd::Constant(1, 1, -1.25)});
  return Potential::fourier(lat, 1, terms);
}

double rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

std::vector<FieldSampler> samplers(const ChebyshevCollocation& col, const RefinedKernel& rk) {
  std::vector<FieldSampler> u;
  for (int j = 0; j < rk.dim(); ++j) u.push_back(col.sampler(rk.values.col(j)));
  return u;
}

}  // namespace

TEST_CASE("collocation: constant potential, quasi-periodic 1-D") {
  const Lattice lat = rectangular_lattice({1.0});
  const Potential V = Potential::constant(lat, Eigen::MatrixXd::Constant(1, 1, -100.0));
  const BasisSpec b = make_basis(Boundary::Theta, lat, Eigen::VectorXd::Constant(1, 0.25), 8);
  const ChebyshevCollocation col(b, 40);
  const RefinedKernel rk = col.refine(V, 0.157, 1);
  CHECK(std::abs(rk.t - pi / 20) < 1e-12);
  const auto u = samplers(col, rk);
  // Kernel is |Q|^{-1/2} e^{i pi x / 2} up to phase.
  Eigen::VectorXd x(1);
  x << 0.3;
  const FieldSample s = u[0](x);
  CHECK(std::abs(std::abs(s.value(0)) - 1.0) < 1e-10);
  CHECK(std::abs(s.gradient(0, 0) - cd(0, pi / 2) * s.value(0)) < 1e-9);
  const Eigen::MatrixXcd vol = volume_form(u, V, rk.t);
  CHECK(std::abs(vol(0, 0).real() + 200.0 * rk.t) < 1e-9);
  CHECK(std::abs(boundary_form(u, V, rk.t)(0, 0).real() + 200.0 * rk.t) < 1e-9);
  CHECK(boundary_form_value(u[0], V, rk.t) == doctest::Approx(vol(0, 0).real()).epsilon(1e-10));
}

TEST_CASE("collocation: 1-D cosine potential, formulas agree") {
  const Lattice lat = rectangular_lattice({1.0});
  const Potential V = Potential::fourier(lat, 1,
                                         {{Eigen::VectorXi::Constant(1, 0), Eigen::MatrixXcd::Constant(1, 1, -50.0)},
                                          {Eigen::VectorXi::Constant(1, 1), Eigen::MatrixXcd::Constant(1, 1, -5.0)},
                                          {Eigen::VectorXi::Constant(1, -1), Eigen::MatrixXcd::Constant(1, 1, -5.0)}});
  for (double theta : {0.0, 0.25}) {
    const BasisSpec b = make_basis(Boundary::Theta, lat, Eigen::VectorXd::Constant(1, theta), 32);
    const auto zc = find_zero_crossings(b, V, 0.05, 1.0);
    REQUIRE(!zc.empty());
    const ChebyshevCollocation col(b, 40);
    for (const auto& z : zc) {
      const RefinedKernel rk = col.refine(V, z.t, z.dim);
      CHECK(std::abs(rk.t - z.t) < 1e-8);
      const auto u = samplers(col, rk);
      const Eigen::MatrixXcd vol = volume_form(u, V, rk.t), bnd = boundary_form(u, V, rk.t);
      CHECK(rel(bnd, vol) < 1e-8);
      // Eigenvalue slopes are the form eigenvalues.
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(vol).eigenvalues();
      for (int i = 0; i < z.dim; ++i) CHECK(ev(i) == doctest::Approx(z.slopes(i)).epsilon(1e-4));
    }
  }
}

TEST_CASE("collocation: 2-D trigonometric potential") {
  const Potential V = trig_2d();
  for (double th : {0.0, 0.25}) {
    const BasisSpec b = make_basis(Boundary::Theta, V.lattice(), Eigen::Vector2d(th, th), 8);
    const auto zc = find_zero_crossings(b, V, 0.05, 1.0);
    REQUIRE(!zc.empty());
    const ChebyshevCollocation col(b, 22);
    for (const auto& z : zc) {
      const RefinedKernel rk = col.refine(V, z.t, z.dim);
      CHECK(std::abs(rk.t - z.t) < 1e-5);
      const auto u = samplers(col, rk);
      CHECK(rel(boundary_form(u, V, rk.t), volume_form(u, V, rk.t)) < 1e-7);
    }
  }
}

TEST_CASE("collocation: 2-D Dirichlet constant potential") {
  const Lattice lat = rectangular_lattice({1.0, 1.0});
  const Potential V = Potential::constant(lat, Eigen::MatrixXd::Constant(1, 1, -100.0));
  const BasisSpec b = make_basis(Boundary::Dirichlet, lat, Eigen::VectorXd(), 6);
  const ChebyshevCollocation col(b, 20);
  // (1,2) and (2,1) modes: pi^2 * 5 = 100 t^2.
  const double t_star = pi * std::sqrt(5.0) / 10.0;
  const RefinedKernel rk = col.refine(V, t_star + 1e-4, 2);
  CHECK(std::abs(rk.t - t_star) < 1e-10);
  const auto u = samplers(col, rk);
  const Eigen::MatrixXcd vol = volume_form(u, V, rk.t);
  CHECK(rel(vol, -200.0 * t_star * Eigen::MatrixXcd::Identity(2, 2)) < 1e-9);
  CHECK(rel(boundary_form(u, V, rk.t), vol) < 1e-9);
}

TEST_CASE("collocation: rejects skew cells") {
  Eigen::Matrix2d B;
  B << 1.0, 0.5, 0.0, 1.0;
  const Lattice lat = build_lattice(B);
  const Potential V = Potential::constant(lat, Eigen::MatrixXd::Constant(1, 1, -1.0));
  CHECK_THROWS_AS(boundary_form({}, V, 0.5), UnsupportedLattice);
  CHECK_THROWS_AS(ChebyshevCollocation(make_basis(Boundary::Theta, lat, Eigen::Vector2d(0, 0), 4), 10), UnsupportedLattice);
}
