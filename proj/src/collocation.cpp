#include "maslov/collocation.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "maslov/errors.hpp"

namespace maslov {

namespace {
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Chebyshev-Lobatto nodes on [0, L] in increasing order and the matching
// first-derivative matrix.
void cheb(int N, double L, Eigen::VectorXd& x, Eigen::MatrixXd& D, Eigen::VectorXd& w) {
  Eigen::VectorXd c(N + 1), s(N + 1);
  for (int k = 0; k <= N; ++k) {
    s(k) = std::cos(kPi * k / N);  // on [-1, 1], decreasing
    c(k) = ((k == 0 || k == N) ? 2.0 : 1.0) * ((k % 2) ? -1.0 : 1.0);
  }
  D = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j)
      if (i != j) D(i, j) = (c(i) / c(j)) / (s(i) - s(j));
  for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();
  // y = L (1 - s) / 2 increases with k; d/dy = -(2 / L) d/ds.
  x = 0.5 * L * (Eigen::VectorXd::Ones(N + 1) - s);
  D *= -2.0 / L;
  // Clenshaw-Curtis weights.
  w = Eigen::VectorXd::Zero(N + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(N - 1);
  const Eigen::Index inner = N - 1;
  if (N % 2 == 0) {
    w(0) = w(N) = 1.0 / (N * N - 1.0);
    for (int k = 1; k < N / 2; ++k)
      for (Eigen::Index i = 0; i < inner; ++i) v(i) -= 2.0 * std::cos(2.0 * k * kPi * (i + 1) / N) / (4.0 * k * k - 1);
    for (Eigen::Index i = 0; i < inner; ++i) v(i) -= std::cos(N * kPi * (i + 1) / N) / (N * N - 1.0);
  } else {
    w(0) = w(N) = 1.0 / (N * N);
    for (int k = 1; k <= (N - 1) / 2; ++k)
      for (Eigen::Index i = 0; i < inner; ++i) v(i) -= 2.0 * std::cos(2.0 * k * kPi * (i + 1) / N) / (4.0 * k * k - 1);
  }
  for (Eigen::Index i = 0; i < inner; ++i) w(i + 1) = 2.0 * v(i) / N;
  w *= 0.5 * L;
}

// Gauss-Legendre rule on [0, 1] with `panels` panels of 30 points.
void gauss01(int panels, std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, 30>;
  x.clear();
  w.clear();
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
      const double a = G::abscissa()[i], wt = G::weights()[i];
      x.push_back(mid + 0.5 * h * a);
      w.push_back(0.5 * h * wt);
      if (a != 0.0) {
        x.push_back(mid - 0.5 * h * a);
        w.push_back(0.5 * h * wt);
      }
    }
  }
}

Eigen::VectorXd bary_basis(const Eigen::VectorXd& nodes, const Eigen::VectorXd& bw, double x) {
  Eigen::VectorXd l(nodes.size());
  for (Eigen::Index k = 0; k < nodes.size(); ++k) {
    const double d = x - nodes(k);
    if (std::abs(d) < 1e-15 * (1.0 + std::abs(x))) {
      l.setZero();
      l(k) = 1.0;
      return l;
    }
    l(k) = bw(k) / d;
  }
  return l / l.sum();
}

}  // namespace

ChebyshevCollocation::ChebyshevCollocation(const BasisSpec& basis, int N) : basis_(basis), N_(N) {
  basis_.validate();
  n_ = basis.lattice.dim;
  m_ = basis.m;
  if (n_ > 2 || !basis.lattice.is_rectangular())
    throw UnsupportedLattice("collocation needs an axis-aligned box with n <= 2");
  if (N < 4) throw std::invalid_argument("collocation needs at least 5 nodes per axis");
  const Eigen::VectorXd L = basis.lattice.side_lengths();
  const int q = N + 1;
  P_ = n_ == 1 ? q : q * q;
  x_.resize(n_);
  w_.resize(n_);
  std::vector<Eigen::MatrixXd> d1(n_);
  for (int j = 0; j < n_; ++j) cheb(N, L(j), x_[j], d1[j], w_[j]);
  bary_ = Eigen::VectorXd::Ones(q);
  for (int k = 0; k < q; ++k) bary_(k) = ((k % 2) ? -1.0 : 1.0) * ((k == 0 || k == N) ? 0.5 : 1.0);
  D_.resize(n_);
  if (n_ == 1) {
    D_[0] = d1[0];
  } else {
    // Node p = i1 + q i2.
    D_[0] = Eigen::MatrixXd::Zero(P_, P_);
    D_[1] = Eigen::MatrixXd::Zero(P_, P_);
    for (int i2 = 0; i2 < q; ++i2)
      for (int i1 = 0; i1 < q; ++i1)
        for (int k = 0; k < q; ++k) {
          D_[0](i1 + q * i2, k + q * i2) = d1[0](i1, k);
          D_[1](i1 + q * i2, i1 + q * k) = d1[1](i2, k);
        }
  }

  auto id = [&](int i1, int i2) -> Eigen::Index { return n_ == 1 ? i1 : i1 + q * i2; };
  auto add = [&](Eigen::Index lo, Eigen::Index hi, int axis) {
    if (basis_.bc == Boundary::Theta) {
      rows_.push_back({hi, lo, hi, axis, false});
      rows_.push_back({lo, lo, hi, axis, true});
    } else {
      const bool deriv = basis_.bc == Boundary::Neumann;
      rows_.push_back({lo, lo, lo, axis, deriv});
      rows_.push_back({hi, hi, hi, axis, deriv});
    }
  };
  if (n_ == 1) {
    add(0, N, 0);
  } else {
    for (int i2 = 0; i2 <= N; ++i2) add(id(0, i2), id(N, i2), 0);
    for (int i1 = 1; i1 < N; ++i1) add(id(i1, 0), id(i1, N), 1);
  }
  std::vector<bool> is_b(static_cast<std::size_t>(P_), false);
  for (const auto& r : rows_) is_b[r.row] = true;
  for (Eigen::Index p = 0; p < P_; ++p) (is_b[p] ? boundary_ : interior_).push_back(p);
}

Eigen::VectorXd ChebyshevCollocation::node(Eigen::Index p) const {
  Eigen::VectorXd x(n_);
  const int q = N_ + 1;
  x(0) = x_[0](p % q);
  if (n_ == 2) x(1) = x_[1](p / q);
  return x;
}

Eigen::MatrixXcd ChebyshevCollocation::full_matrix(const Potential& V, double t) const {
  const Eigen::Index M = m_ * P_;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(M, M);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(P_, P_);
  for (int j = 0; j < n_; ++j) lap.noalias() += D_[j] * D_[j];
  for (int c = 0; c < m_; ++c) A.block(c * P_, c * P_, P_, P_) = (-basis_.laplace_scale * lap).cast<cd>();
  for (Eigen::Index p = 0; p < P_; ++p) {
    const Eigen::MatrixXd v = t * t * V.eval(t * node(p));
    for (int c = 0; c < m_; ++c)
      for (int d = 0; d < m_; ++d) A(c * P_ + p, d * P_ + p) += v(c, d);
  }
  for (const auto& r : rows_) {
    const cd e = basis_.bc == Boundary::Theta ? std::exp(cd(0, 2 * kPi * basis_.theta(r.axis))) : cd(0);
    for (int c = 0; c < m_; ++c) {
      const Eigen::Index row = c * P_ + r.row;
      A.row(row).setZero();
      if (r.derivative) {
        for (Eigen::Index k = 0; k < P_; ++k) {
          A(row, c * P_ + k) += D_[r.axis](r.hi, k);
          A(row, c * P_ + k) -= e * D_[r.axis](r.lo, k);
        }
      } else {
        A(row, c * P_ + r.hi) += 1.0;
        A(row, c * P_ + r.lo) -= e;
      }
    }
  }
  return A;
}

namespace {
std::vector<Eigen::Index> expand(const std::vector<Eigen::Index>& idx, int m, Eigen::Index P) {
  std::vector<Eigen::Index> out;
  for (int c = 0; c < m; ++c)
    for (Eigen::Index p : idx) out.push_back(c * P + p);
  return out;
}
}  // namespace

Eigen::MatrixXcd ChebyshevCollocation::reduced_operator(const Potential& V, double t) const {
  const Eigen::MatrixXcd A = full_matrix(V, t);
  const auto I = expand(interior_, m_, P_), B = expand(boundary_, m_, P_);
  const Eigen::MatrixXcd AII = A(I, I), AIB = A(I, B), ABI = A(B, I), ABB = A(B, B);
  return AII - AIB * ABB.partialPivLu().solve(ABI);
}

Eigen::VectorXcd ChebyshevCollocation::lift(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& interior) const {
  const auto I = expand(interior_, m_, P_), B = expand(boundary_, m_, P_);
  const Eigen::MatrixXcd ABI = A(B, I), ABB = A(B, B);
  const Eigen::VectorXcd ub = -ABB.partialPivLu().solve(ABI * interior);
  Eigen::VectorXcd u(m_ * P_);
  for (std::size_t i = 0; i < I.size(); ++i) u(I[i]) = interior(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < B.size(); ++i) u(B[i]) = ub(static_cast<Eigen::Index>(i));
  return u;
}

void ChebyshevCollocation::ritz(const Eigen::MatrixXcd& L, int k, Eigen::VectorXcd& mu, Eigen::MatrixXcd& vecs) const {
  const Eigen::Index n = L.rows();
  const int s = static_cast<int>(std::min<Eigen::Index>(n, k + 4));
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(L);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd X(n, s);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < s; ++j) X(i, j) = cd(g(rng), g(rng));
  for (int it = 0; it < 25; ++it) {
    X = lu.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXcd::Identity(n, s);
  }
  const Eigen::MatrixXcd G = X.adjoint() * L * X;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(G);
  std::vector<int> order(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(es.eigenvalues()(a)) < std::abs(es.eigenvalues()(b)); });
  mu.resize(k);
  vecs.resize(n, k);
  for (int i = 0; i < k; ++i) {
    mu(i) = es.eigenvalues()(order[i]);
    vecs.col(i) = X * es.eigenvectors().col(order[i]);
  }
}

RefinedKernel ChebyshevCollocation::refine(const Potential& V, double t_guess, int dim, double t_tol) const {
  if (dim < 1) throw std::invalid_argument("refine: kernel dimension must be positive");
  auto f = [&](double t) {
    Eigen::VectorXcd mu;
    Eigen::MatrixXcd vecs;
    ritz(reduced_operator(V, t), dim, mu, vecs);
    return mu.real().mean();
  };
  double t0 = t_guess, t1 = t_guess + 1e-6;
  double f0 = f(t0), f1 = f(t1);
  for (int it = 0; it < 40 && std::abs(t1 - t0) > t_tol && f1 != f0; ++it) {
    const double t2 = t1 - f1 * (t1 - t0) / (f1 - f0);
    t0 = t1;
    f0 = f1;
    t1 = t2;
    f1 = f(t1);
  }
  if (!(std::abs(t1 - t_guess) < 1e-3)) {
    std::ostringstream os;
    os << "collocation refinement drifted from t = " << t_guess << " to " << t1;
    throw ConvergenceFailure(os.str());
  }
  RefinedKernel rk;
  rk.t = t1;
  const Eigen::MatrixXcd A = full_matrix(V, t1);
  const auto I = expand(interior_, m_, P_), B = expand(boundary_, m_, P_);
  const Eigen::MatrixXcd L = A(I, I) - A(I, B) * A(B, B).partialPivLu().solve(A(B, I));
  Eigen::MatrixXcd vecs;
  ritz(L, dim, rk.eigenvalues, vecs);
  Eigen::MatrixXcd U(m_ * P_, dim);
  for (int j = 0; j < dim; ++j) U.col(j) = lift(A, vecs.col(j));
  // L2-orthonormalize with the tensor Clenshaw-Curtis weights.
  Eigen::VectorXd w(P_);
  for (Eigen::Index p = 0; p < P_; ++p) {
    const int q = N_ + 1;
    w(p) = w_[0](p % q) * (n_ == 2 ? w_[1](p / q) : 1.0);
  }
  Eigen::MatrixXcd Wh(m_ * P_, dim);
  for (int c = 0; c < m_; ++c) Wh.middleRows(c * P_, P_) = w.cwiseSqrt().asDiagonal() * U.middleRows(c * P_, P_);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Wh);
  const Eigen::MatrixXcd R = qr.matrixQR().topRows(dim).triangularView<Eigen::Upper>();
  rk.values = U * R.inverse();
  return rk;
}

FieldSample ChebyshevCollocation::sample(const Eigen::VectorXcd& nodal, const Eigen::VectorXd& x) const {
  return sampler(nodal)(x);
}

FieldSampler ChebyshevCollocation::sampler(const Eigen::VectorXcd& nodal) const {
  // Nodal gradients once, then barycentric interpolation of value and gradient.
  std::vector<Eigen::MatrixXcd> data;  // per component: P x (1 + n)
  for (int c = 0; c < m_; ++c) {
    Eigen::MatrixXcd d(P_, 1 + n_);
    const Eigen::VectorXcd u = nodal.segment(c * P_, P_);
    d.col(0) = u;
    for (int j = 0; j < n_; ++j) d.col(1 + j) = D_[j].cast<cd>() * u;
    data.push_back(std::move(d));
  }
  const int q = N_ + 1, n = n_, m = m_;
  const std::vector<Eigen::VectorXd> xs = x_;
  const Eigen::VectorXd bw = bary_;
  return [data = std::move(data), xs, bw, q, n, m](const Eigen::VectorXd& x) {
    Eigen::VectorXd l1 = bary_basis(xs[0], bw, x(0));
    Eigen::VectorXd wgt;
    if (n == 1) {
      wgt = l1;
    } else {
      const Eigen::VectorXd l2 = bary_basis(xs[1], bw, x(1));
      wgt.resize(q * q);
      for (int i2 = 0; i2 < q; ++i2) wgt.segment(q * i2, q) = l1 * l2(i2);
    }
    FieldSample s;
    s.value.resize(m);
    s.gradient.resize(m, n);
    for (int c = 0; c < m; ++c) {
      const Eigen::RowVectorXcd r = wgt.cast<cd>().transpose() * data[c];
      s.value(c) = r(0);
      for (int j = 0; j < n; ++j) s.gradient(c, j) = r(1 + j);
    }
    return s;
  };
}

Eigen::MatrixXcd volume_form(const std::vector<FieldSampler>& u, const Potential& V, double t, int panels) {
  const Lattice& lat = V.lattice();
  const int n = lat.dim;
  if (n > 2) throw UnsupportedLattice("volume_form supports n <= 2");
  std::vector<double> gx, gw;
  gauss01(panels, gx, gw);
  const std::size_t k = u.size(), g = gx.size();
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  const std::size_t total = n == 1 ? g : g * g;
  std::vector<FieldSample> s(k);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Eigen::VectorXd lc(n);
    lc(0) = gx[idx % g];
    double w = gw[idx % g];
    if (n == 2) {
      lc(1) = gx[idx / g];
      w *= gw[idx / g];
    }
    const Eigen::VectorXd x = lat.to_cartesian(lc);
    const Eigen::MatrixXcd D = V.radial_derivative_at(t, x).cast<cd>();
    for (std::size_t a = 0; a < k; ++a) s[a] = u[a](x);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        Q(a, b) += w * s[a].value.dot(D * s[b].value);  // dot conjugates the left side
  }
  Q *= lat.cell_volume;
  return 0.5 * (Q + Q.adjoint());
}

Eigen::MatrixXcd boundary_form(const std::vector<FieldSampler>& u, const Potential& V, double t, int panels) {
  const Lattice& lat = V.lattice();
  const int n = lat.dim;
  if (n > 2 || !lat.is_rectangular()) throw UnsupportedLattice("boundary form needs an axis-aligned box with n <= 2");
  const Eigen::VectorXd L = lat.side_lengths();
  std::vector<double> gx, gw;
  gauss01(panels, gx, gw);
  const std::size_t k = u.size();
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  std::vector<FieldSample> s(k);
  for (int j = 0; j < n; ++j)
    for (int side = 0; side < 2; ++side) {
      Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
      nu(j) = side ? 1.0 : -1.0;
      const std::size_t count = n == 1 ? 1 : gx.size();
      for (std::size_t i = 0; i < count; ++i) {
        Eigen::VectorXd x(n);
        double w = 1.0;
        x(j) = side ? L(j) : 0.0;
        if (n == 2) {
          const int o = 1 - j;
          x(o) = gx[i] * L(o);
          w = gw[i] * L(o);
        }
        const double xn = x.dot(nu);
        Eigen::VectorXd tx = t * x;
        const Eigen::MatrixXcd Vt = V.eval(tx).cast<cd>();
        for (std::size_t a = 0; a < k; ++a) s[a] = u[a](x);
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b) {
            const auto &A = s[a], &B = s[b];
            const Eigen::VectorXcd ax = A.gradient * x.cast<cd>(), an = A.gradient * nu.cast<cd>();
            const Eigen::VectorXcd bx = B.gradient * x.cast<cd>(), bn = B.gradient * nu.cast<cd>();
            cd v = t * xn * A.value.dot(Vt * B.value);
            v += (xn / t) * (A.gradient.array().conjugate() * B.gradient.array()).sum();
            v -= (ax.dot(bn) + an.dot(bx)) / t;
            Q(a, b) += w * v;
          }
      }
    }
  return 0.5 * (Q + Q.adjoint());
}

double boundary_form_value(const FieldSampler& u, const Potential& V, double t, int panels) {
  return boundary_form({u}, V, t, panels)(0, 0).real();
}

}  // namespace maslov
