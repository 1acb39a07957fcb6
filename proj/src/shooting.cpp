#include "maslov/shooting.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "maslov/errors.hpp"
#include "maslov/linalg.hpp"

namespace maslov {

namespace {

// Realified 4m x 2m trace matrix -> 8m x 4m, block by block.
Eigen::MatrixXd realify_traces(const Eigen::MatrixXd& T, int m) {
  Eigen::MatrixXd R(8 * m, 4 * m);
  for (int b = 0; b < 4; ++b) R.middleRows(2 * m * b, 2 * m) = kron_identity(T.middleRows(m * b, m), 2);
  return R;
}

double side_length(const Potential& V) {
  if (V.dim() != 1) throw UnsupportedLattice("shooting needs a one-dimensional lattice");
  return V.lattice().basis(0, 0);
}

// RK4 for Y' = [[0, I], [W(x), 0]] Y, Y(0) = I, with W sampled on a grid of
// spacing a / (4 n) (`w` holds 4n + 1 samples).  `stride` = 2 runs n steps,
// `stride` = 1 runs 2n steps.  Returns the 4m x 2m traces.
Eigen::MatrixXd rk4_traces(const std::vector<Eigen::MatrixXd>& w, int m, double a, int stride) {
  const int samples = static_cast<int>(w.size()) - 1;
  const int steps = samples / (2 * stride);
  const double h = a / steps;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(m, 2 * m), P = Eigen::MatrixXd::Zero(m, 2 * m);
  U.leftCols(m).setIdentity();
  P.rightCols(m).setIdentity();
  for (int k = 0; k < steps; ++k) {
    const Eigen::MatrixXd& w0 = w[2 * stride * k];
    const Eigen::MatrixXd& wm = w[2 * stride * k + stride];
    const Eigen::MatrixXd& w1 = w[2 * stride * (k + 1)];
    const Eigen::MatrixXd ku1 = P, kp1 = w0 * U;
    const Eigen::MatrixXd ku2 = P + 0.5 * h * kp1, kp2 = wm * (U + 0.5 * h * ku1);
    const Eigen::MatrixXd ku3 = P + 0.5 * h * kp2, kp3 = wm * (U + 0.5 * h * ku2);
    const Eigen::MatrixXd ku4 = P + h * kp3, kp4 = w1 * (U + h * ku3);
    U += (h / 6.0) * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4);
    P += (h / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(4 * m, 2 * m);
  T.block(0, 0, m, m).setIdentity();  // u(0)
  T.middleRows(m, m) = U;             // u(a)
  T.block(2 * m, m, m, m).setIdentity();  // u'(0)
  T.middleRows(3 * m, m) = P;         // u'(a)
  return T;
}

std::vector<Eigen::MatrixXd> sample_w(const Potential& V, double t, double lambda, double a, int steps) {
  const int m = V.m();
  std::vector<Eigen::MatrixXd> w(static_cast<std::size_t>(4 * steps + 1));
  Eigen::VectorXd x(1);
  for (int i = 0; i <= 4 * steps; ++i) {
    x(0) = t * a * i / (4.0 * steps);
    w[i] = t * t * V.eval(x) - lambda * Eigen::MatrixXd::Identity(m, m);
  }
  return w;
}

// Traces from `steps` RK4 steps without the Richardson comparison (used along
// paths once the step count has been validated).
Eigen::MatrixXd path_traces(const Potential& V, double t, double lambda, double a, int steps) {
  Eigen::VectorXd x(1);
  const int m = V.m();
  std::vector<Eigen::MatrixXd> w(static_cast<std::size_t>(2 * steps + 1));
  for (int i = 0; i <= 2 * steps; ++i) {
    x(0) = t * a * i / (2.0 * steps);
    w[i] = t * t * V.eval(x) - lambda * Eigen::MatrixXd::Identity(m, m);
  }
  return realify_traces(rk4_traces(w, m, a, 1), m);
}

}  // namespace

SymplecticSpace trace_space(int m) {
  const int k = 2 * m;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4 * k, 4 * k);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
  // (Jz)_u0 = z_p0, (Jz)_u1 = -z_p1, (Jz)_p0 = -z_u0, (Jz)_p1 = z_u1.
  J.block(0, 2 * k, k, k) = I;
  J.block(k, 3 * k, k, k) = -I;
  J.block(2 * k, 0, k, k) = -I;
  J.block(3 * k, k, k, k) = I;
  return SymplecticSpace::from_J(J);
}

LagrangianFrame reference_plane(Boundary bc, double theta, int m) {
  const int k = 2 * m;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4 * k, 2 * k);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
  switch (bc) {
    case Boundary::Theta: {
      const double c = std::cos(2 * std::numbers::pi * theta), s = std::sin(2 * std::numbers::pi * theta);
      Eigen::Matrix2d r;
      r << c, -s, s, c;
      Eigen::MatrixXd Mb = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < m; ++i) Mb.block(2 * i, 2 * i, 2, 2) = r;
      X.block(0, 0, k, k) = I;
      X.block(k, 0, k, k) = Mb;
      X.block(2 * k, k, k, k) = I;
      X.block(3 * k, k, k, k) = Mb;
      X /= std::sqrt(2.0);
      break;
    }
    case Boundary::Dirichlet:
      X.block(2 * k, 0, 2 * k, 2 * k).setIdentity();
      break;
    case Boundary::Neumann:
      X.block(0, 0, 2 * k, 2 * k).setIdentity();
      break;
  }
  const SymplecticSpace S = trace_space(m);
  if (!is_lagrangian(S, X, 1e-12)) throw BCMismatch("boundary plane is not Lagrangian in the trace space");
  return {X};
}

SolutionBundle fundamental_solutions(const Potential& V, double t, double lambda, int steps, double tol) {
  if (steps < 64) throw std::invalid_argument("fundamental_solutions: steps must be at least 64");
  const double a = side_length(V);
  const int m = V.m();
  const auto w = sample_w(V, t, lambda, a, steps);
  const Eigen::MatrixXd coarse = rk4_traces(w, m, a, 2);
  const Eigen::MatrixXd fine = rk4_traces(w, m, a, 1);
  SolutionBundle b;
  b.t = t;
  b.lambda = lambda;
  b.steps = 2 * steps;
  b.traces = realify_traces(fine, m);
  b.richardson_error = (fine - coarse).cwiseAbs().maxCoeff();
  if (b.richardson_error > tol) {
    std::ostringstream os;
    os << "trace change " << b.richardson_error << " between " << steps << " and " << 2 * steps
       << " steps at t = " << t << ", lambda = " << lambda;
    throw StepTooCoarse(os.str());
  }
  return b;
}

int choose_steps(const Potential& V, const std::vector<double>& t_probe, double lambda, int start, int cap,
                 double tol) {
  for (int n = std::max(64, start); n <= cap; n *= 2) {
    bool ok = true;
    for (double t : t_probe) {
      try {
        fundamental_solutions(V, t, lambda, n, tol);
      } catch (const StepTooCoarse&) {
        ok = false;
        break;
      }
    }
    if (ok) return 2 * n;
  }
  std::ostringstream os;
  os << "no step count up to " << cap << " meets the trace tolerance " << tol;
  throw StepTooCoarse(os.str());
}

const char* to_string(Route r) { return r == Route::SpectralFlow ? "spectral_flow" : "crossing_forms"; }

namespace {

ShootingCrossing describe(const CrossingDatum& c, const Potential& V, double a, double t_star, bool closed) {
  ShootingCrossing sc;
  sc.t = c.t;
  sc.dim_real = c.dim();
  sc.signature = c.signature();
  sc.regular = c.regular;
  sc.form = c.form;
  if (closed) {
    const int k = 2 * V.m();
    Eigen::VectorXd x(1);
    x(0) = t_star * a;
    const Eigen::MatrixXd VR = kron_identity(V.eval(x), 2);
    const Eigen::MatrixXd u1 = c.intersection.middleRows(k, k), p1 = c.intersection.middleRows(3 * k, k);
    sc.closed_form = a * (t_star * u1.transpose() * VR * u1 - (1.0 / t_star) * p1.transpose() * p1);
    const double nrm = sc.closed_form.norm();
    sc.relative_gap = nrm > 0 ? (sc.form - sc.closed_form).norm() / nrm : (sc.form - sc.closed_form).norm();
  }
  return sc;
}

Maslov1dResult run(const Potential& V, Boundary bc, const FramePath& Y, double lo, double hi, Route route,
                   const Maslov1dOptions& opts, bool t_path) {
  const double a = side_length(V);
  const SymplecticSpace S = trace_space(V.m());
  const LagrangianFrame X = reference_plane(bc, opts.theta, V.m());
  Maslov1dResult res;
  if (route == Route::CrossingForms) {
    const CrossingFormsResult cf = maslov_crossing_forms(S, X, Y, lo, hi, opts.scan);
    res.maslov = cf.maslov;
    for (const auto& c : cf.crossings) res.crossings.push_back(describe(c, V, a, c.t, t_path));
  } else {
    res.maslov = maslov_spectral_flow(S, X, Y, lo, hi, opts.flow);
    CrossingFormOptions fo = opts.scan.form;
    fo.lo = lo;
    fo.hi = hi;
    fo.throw_on_nonregular = false;
    for (double t : locate_crossings(S, X, Y, lo, hi, opts.scan))
      res.crossings.push_back(describe(crossing_form(S, Y, t, X, fo), V, a, t, t_path));
  }
  return res;
}

}  // namespace

Maslov1dResult maslov_1d(const Potential& V, Boundary bc, double tau, Route route, const Maslov1dOptions& opts) {
  const double a = side_length(V);
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("maslov_1d: tau must lie in (0, 1)");
  const double lam = opts.lambda;
  const int steps = opts.steps > 0 ? opts.steps : choose_steps(V, {tau, 0.5 * (tau + 1.0), 1.0}, lam);
  FramePath Y = [&V, a, lam, steps](double t) { return path_traces(V, t, lam, a, steps); };
  // The closed form of the crossing form holds at lambda = 0 only.
  Maslov1dResult res = run(V, bc, Y, tau, 1.0, route, opts, lam == 0.0);
  res.steps = steps;
  return res;
}

Maslov1dResult maslov_1d_lambda(const Potential& V, Boundary bc, double t, double lambda0, double lambda1, Route route,
                                const Maslov1dOptions& opts) {
  const double a = side_length(V);
  if (!(lambda0 < lambda1)) throw std::invalid_argument("maslov_1d_lambda: needs lambda0 < lambda1");
  // The stiffest point is the end with the largest |lambda|.
  const int steps = opts.steps > 0 ? opts.steps
                                   : choose_steps(V, {t}, std::abs(lambda0) >= std::abs(lambda1) ? lambda0 : lambda1);
  FramePath Y = [&V, a, t, steps](double lam) { return path_traces(V, t, lam, a, steps); };
  Maslov1dResult res = run(V, bc, Y, lambda0, lambda1, route, opts, false);
  res.steps = steps;
  return res;
}

}  // namespace maslov
