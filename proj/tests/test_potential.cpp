#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "maslov/errors.hpp"
#include "maslov/potential.hpp"

using namespace maslov;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// V(x) = 2 a cos(2 pi x) on the unit interval.
Potential cosine_1d(double a) {
  Lattice lat = rectangular_lattice({1.0});
  std::vector<FourierTerm> terms{{Eigen::VectorXi::Constant(1, 1), Eigen::MatrixXcd::Constant(1, 1, a)},
                                 {Eigen::VectorXi::Constant(1, -1), Eigen::MatrixXcd::Constant(1, 1, a)}};
  return Potential::fourier(lat, 1, terms);
}

// A 2x2 matrix potential on a skew 2-D lattice with a handful of modes.
Potential sample_2d() {
  Eigen::Matrix2d b;
  b << 1.0, 0.3, 0.0, 0.8;
  Lattice lat = build_lattice(b);
  Eigen::MatrixXcd c0(2, 2), c1(2, 2), c2(2, 2);
  c0 << -3.0, 0.5, 0.5, 2.0;
  c1 << cd(0.4, 0.2), cd(0.1, -0.3), cd(0.1, -0.3), cd(-0.2, 0.1);
  c2 << cd(0.0, 0.7), 0.25, 0.25, cd(0.3, 0.0);
  std::vector<FourierTerm> terms{{Eigen::Vector2i(0, 0), c0},
                                 {Eigen::Vector2i(1, 0), c1},
                                 {Eigen::Vector2i(-1, 0), c1.conjugate()},
                                 {Eigen::Vector2i(1, -2), c2},
                                 {Eigen::Vector2i(-1, 2), c2.conjugate()}};
  return Potential::fourier(lat, 2, terms);
}

// Gauss-Legendre oracle for (1/|Q|) int_Q F(x) e^{2 pi i kappa . s} dx over lattice coordinates.
template <typename F>
Eigen::MatrixXcd gauss_moment(const Lattice& lat, int m, const Eigen::VectorXd& kappa, F&& field) {
  using G = boost::math::quadrature::gauss<double, 40>;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
  // Split [0,1] into panels so the 40-point rule resolves the oscillation.
  std::vector<std::pair<double, double>> nodes;  // (s, w) on [0,1]
  const int panels = lat.dim == 1 ? 8 : 3;
  const auto& abs = G::abscissa();
  const auto& wts = G::weights();
  for (int p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) / panels, h = 1.0 / panels;
    for (std::size_t i = 0; i < abs.size(); ++i) {
      const double xs[2] = {abs[i], -abs[i]};
      for (int sgn = 0; sgn < (abs[i] == 0.0 ? 1 : 2); ++sgn)
        nodes.emplace_back(lo + h * 0.5 * (xs[sgn] + 1.0), h * 0.5 * wts[i]);
    }
  }
  if (lat.dim == 1) {
    for (auto [s, w] : nodes) {
      Eigen::VectorXd sv = Eigen::VectorXd::Constant(1, s);
      acc += (w * std::exp(cd(0, 2 * pi * kappa(0) * s))) * field(lat.to_cartesian(sv)).template cast<cd>();
    }
  } else {
    for (auto [s0, w0] : nodes)
      for (auto [s1, w1] : nodes) {
        Eigen::VectorXd sv(2);
        sv << s0, s1;
        acc += (w0 * w1 * std::exp(cd(0, 2 * pi * kappa.dot(sv)))) *
               field(lat.to_cartesian(sv)).template cast<cd>();
      }
  }
  return acc;
}

}  // namespace

TEST_CASE("eval_scaled on constants and cosines") {
  Lattice lat = rectangular_lattice({1.0});
  Potential c = Potential::constant(lat, m1(-100));
  CHECK(c.eval_scaled(0.5, Eigen::VectorXd::Constant(1, 0.3))(0, 0) == doctest::Approx(-25.0));
  Potential v = cosine_1d(1.0);
  CHECK(std::abs(v.eval_scaled(0.5, Eigen::VectorXd::Constant(1, 0.5))(0, 0)) < 1e-15);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.37);
  CHECK(v.eval_scaled(1.0, x)(0, 0) == v.eval(x)(0, 0));
  CHECK(v.eval(x)(0, 0) == doctest::Approx(2 * std::cos(2 * pi * 0.37)).epsilon(1e-14));
}

TEST_CASE("construction rejects nonsymmetric data") {
  Lattice lat = rectangular_lattice({1.0});
  Eigen::MatrixXd s(2, 2);
  s << 1, 2, 3, 4;
  CHECK_THROWS_AS(Potential::constant(lat, s), InvalidPotential);
  // Missing conjugate partner.
  std::vector<FourierTerm> terms{{Eigen::VectorXi::Constant(1, 1), Eigen::MatrixXcd::Constant(1, 1, 1.0)}};
  CHECK_THROWS_AS(Potential::fourier(lat, 1, terms), InvalidPotential);
  // Partner present but not conjugate.
  terms.push_back({Eigen::VectorXi::Constant(1, -1), Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.5))});
  CHECK_THROWS_AS(Potential::fourier(lat, 1, terms), InvalidPotential);
}

TEST_CASE("radial derivative examples") {
  Lattice lat = rectangular_lattice({1.0});
  Potential c = Potential::constant(lat, m1(-4));
  CellGrid g = cell_grid(lat, 8);
  RadialDerivative rd = radial_derivative(c, 0.25, g);
  for (const auto& d : rd.values) CHECK(d(0, 0) == doctest::Approx(-2.0));
  CHECK(rd.max_eigenvalue == doctest::Approx(-2.0));

  // V(x) = x sampled with exact gradients: first-order reconstruction is exact.
  CellGrid fine = cell_grid(lat, 16);
  std::vector<Eigen::MatrixXd> vals;
  std::vector<std::vector<Eigen::MatrixXd>> grads;
  for (Eigen::Index i = 0; i < fine.size(); ++i) {
    vals.push_back(m1(fine.nodes(0, i)));
    grads.push_back({m1(1.0)});
  }
  Potential lin = Potential::grid_sampled(lat, fine, vals, grads);
  CHECK(lin.radial_derivative_at(1.0, Eigen::VectorXd::Constant(1, 0.5))(0, 0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(lin.eval(Eigen::VectorXd::Constant(1, 1.5)), OutOfCell);

  Potential nograd = Potential::grid_sampled(lat, fine, vals);
  CHECK_FALSE(nograd.has_gradient());
  CHECK_THROWS_AS(radial_derivative(nograd, 0.5, g), NoGradient);
}

TEST_CASE("radial derivative of a constant is 2tS") {
  Lattice lat = rectangular_lattice({1.0, 1.0});
  Eigen::MatrixXd S(2, 2);
  S << -1.0, 0.3, 0.3, 2.0;
  Potential c = Potential::constant(lat, S);
  for (double t : {0.1, 0.5, 1.0}) {
    RadialDerivative rd = radial_derivative(c, t, cell_grid(lat, 3));
    for (const auto& d : rd.values) CHECK((d - 2 * t * S).norm() == 0.0);
  }
}

TEST_CASE("radial derivative matches a t-difference of V_t") {
  Potential v = sample_2d();
  Eigen::Vector2d x(0.6, 0.35);
  const double t = 0.7, h = 1e-5;
  Eigen::MatrixXd fd = (v.eval_scaled(t + h, x) - v.eval_scaled(t - h, x)) / (2 * h);
  CHECK((fd - v.radial_derivative_at(t, x)).norm() < 1e-8);
}

TEST_CASE("fourier coefficients: constants and cosines") {
  Lattice lat = rectangular_lattice({1.0});
  Potential c = Potential::constant(lat, m1(-100));
  CHECK(fourier_coeff(c, 0.5, Eigen::VectorXi::Zero(1))(0, 0).real() == doctest::Approx(-25.0));
  for (int q = 1; q < 5; ++q) CHECK(std::abs(fourier_coeff(c, 0.5, Eigen::VectorXi::Constant(1, q))(0, 0)) < 1e-12);

  Potential v = cosine_1d(1.0);
  for (int q = -4; q <= 4; ++q) {
    const cd w = fourier_coeff(v, 1.0, Eigen::VectorXi::Constant(1, q))(0, 0);
    CHECK(std::abs(w - (std::abs(q) == 1 ? 1.0 : 0.0)) < 1e-12);
  }
  // t = 0.5 against the quadrature oracle.
  for (int q = -6; q <= 6; ++q) {
    const Eigen::VectorXd kappa = Eigen::VectorXd::Constant(1, -q);
    Eigen::MatrixXcd oracle = gauss_moment(lat, 1, kappa, [&](const Eigen::VectorXd& x) {
      return Eigen::MatrixXd(v.eval_scaled(0.5, x));
    });
    CHECK(std::abs(fourier_coeff(v, 0.5, Eigen::VectorXi::Constant(1, q))(0, 0) - oracle(0, 0)) < 1e-12);
  }
}

TEST_CASE("fourier coefficients of a 2-D matrix potential match the oracle") {
  Potential v = sample_2d();
  const Lattice& lat = v.lattice();
  for (double t : {0.35, 1.0})
    for (int q0 = -2; q0 <= 2; ++q0)
      for (int q1 = -2; q1 <= 2; ++q1) {
        Eigen::VectorXi q(2);
        q << q0, q1;
        Eigen::MatrixXcd w = fourier_coeff(v, t, q);
        Eigen::MatrixXcd oracle = gauss_moment(lat, 2, -q.cast<double>(), [&](const Eigen::VectorXd& x) {
          return Eigen::MatrixXd(v.eval_scaled(t, x));
        });
        CHECK((w - oracle).norm() < 1e-9);
        CHECK((fourier_coeff(v, t, -q) - w.conjugate()).norm() < 1e-12);
        // Radial moments against the same oracle applied to D_t.
        Eigen::MatrixXcd rm = v.radial_moment(t, -q.cast<double>());
        Eigen::MatrixXcd roracle = gauss_moment(lat, 2, -q.cast<double>(), [&](const Eigen::VectorXd& x) {
          return Eigen::MatrixXd(v.radial_derivative_at(t, x));
        });
        CHECK((rm - roracle).norm() < 1e-9);
      }
}

TEST_CASE("Parseval at t = 1") {
  Potential v = sample_2d();
  const Lattice& lat = v.lattice();
  double lhs = 0.0;
  for (int q0 = -3; q0 <= 3; ++q0)
    for (int q1 = -4; q1 <= 4; ++q1) lhs += fourier_coeff(v, 1.0, Eigen::Vector2i(q0, q1)).squaredNorm();
  lhs *= lat.cell_volume;
  CellGrid g = cell_grid(lat, 32);
  double rhs = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) rhs += g.weights(i) * v.eval(g.nodes.col(i)).squaredNorm();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("grid-sampled coefficients approach the analytic ones") {
  Potential v = cosine_1d(1.0);
  const Lattice& lat = v.lattice();
  CellGrid g = cell_grid(lat, 256);
  std::vector<Eigen::MatrixXd> vals;
  std::vector<std::vector<Eigen::MatrixXd>> grads;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    vals.push_back(v.eval(g.nodes.col(i)));
    grads.push_back(v.gradient(g.nodes.col(i)));
  }
  Potential s = Potential::grid_sampled(lat, g, vals, grads);
  for (int q = -3; q <= 3; ++q) {
    const Eigen::VectorXi qq = Eigen::VectorXi::Constant(1, q);
    CHECK(std::abs(fourier_coeff(s, 0.6, qq, 2048)(0, 0) - fourier_coeff(v, 0.6, qq)(0, 0)) < 1e-4);
  }
}

TEST_CASE("realify") {
  Lattice lat = rectangular_lattice({1.0});
  Potential c = Potential::constant(lat, m1(-9));
  Potential r = c.realify();
  CHECK(r.m() == 2);
  CHECK((r.eval(Eigen::VectorXd::Constant(1, 0.2)) - Eigen::Matrix2d::Identity() * -9.0).norm() == 0.0);

  Eigen::MatrixXd S(2, 2);
  S << 1.0, 2.0, 2.0, 3.0;
  Potential r2 = Potential::constant(lat, S).realify();
  Eigen::MatrixXd expect(4, 4);
  expect << 1, 0, 2, 0, 0, 1, 0, 2, 2, 0, 3, 0, 0, 2, 0, 3;
  CHECK((r2.eval(Eigen::VectorXd::Constant(1, 0.4)) - expect).norm() == 0.0);

  Potential v = sample_2d();
  Potential vr = v.realify();
  Eigen::Vector2d x(0.3, 0.55);
  Eigen::MatrixXd a = vr.eval_scaled(0.6, x);
  Eigen::MatrixXd b = v.eval_scaled(0.6, x);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(a(2 * i, 2 * j) == doctest::Approx(b(i, j)).epsilon(1e-14));
      CHECK(a(2 * i + 1, 2 * j + 1) == doctest::Approx(b(i, j)).epsilon(1e-14));
      CHECK(a(2 * i, 2 * j + 1) == 0.0);
    }
}

TEST_CASE("hypothesis_check") {
  Lattice lat = rectangular_lattice({1.0});
  CellGrid g = cell_grid(lat, 4);
  std::vector<double> ts{0.2, 0.5, 1.0};
  Eigen::MatrixXd neg(2, 2), pos(2, 2), ind(2, 2);
  neg << -3, 1, 1, -2;
  pos = -neg;
  ind << 1, 0, 0, -1;
  HypothesisResult h = hypothesis_check(Potential::constant(lat, neg), ts, g);
  CHECK(h.which == Hypothesis::NegativeDerivative);
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(neg).eigenvalues()(1);
  CHECK(h.margin == doctest::Approx(2 * 0.2 * top));
  CHECK(hypothesis_check(Potential::constant(lat, pos), ts, g).which == Hypothesis::PositiveDerivative);
  CHECK(hypothesis_check(Potential::constant(lat, ind), ts, g).which == Hypothesis::Neither);
}
