#include "maslov/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "maslov/errors.hpp"

namespace maslov {

namespace {
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void check_dims(const SymplecticSpace& S, const Eigen::MatrixXd& X) {
  if (X.rows() != S.real_dim() || X.cols() != S.N) {
    std::ostringstream os;
    os << "frame is " << X.rows() << "x" << X.cols() << ", space needs " << S.real_dim() << "x" << S.N;
    throw DimensionMismatch(os.str());
  }
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& A) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  // Keep the orientation of the input columns (positive diagonal of R).
  const Eigen::MatrixXd R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}
}  // namespace

SymplecticSpace SymplecticSpace::canonical(int N) {
  if (N < 1) throw DimensionMismatch("symplectic space needs N >= 1");
  SymplecticSpace s;
  s.N = N;
  s.J = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  s.J.topRightCorner(N, N) = -Eigen::MatrixXd::Identity(N, N);
  s.J.bottomLeftCorner(N, N) = Eigen::MatrixXd::Identity(N, N);
  return s;
}

SymplecticSpace SymplecticSpace::from_J(const Eigen::MatrixXd& J) {
  if (J.rows() != J.cols() || J.rows() % 2 != 0 || J.rows() == 0)
    throw DimensionMismatch("J must be a square matrix of even size");
  const auto n = J.rows();
  if ((J * J + Eigen::MatrixXd::Identity(n, n)).norm() > 1e-12 || (J + J.transpose()).norm() > 1e-12)
    throw NotLagrangian("J must satisfy J^2 = -I and J^T = -J");
  SymplecticSpace s;
  s.N = static_cast<int>(n / 2);
  s.J = J;
  return s;
}

bool is_lagrangian(const SymplecticSpace& S, const Eigen::MatrixXd& X, double tol) {
  if (X.rows() != S.real_dim() || X.cols() != S.N) return false;
  const auto N = X.cols();
  return (X.transpose() * X - Eigen::MatrixXd::Identity(N, N)).norm() <= tol &&
         (X.transpose() * S.J * X).norm() <= tol;
}

LagrangianFrame make_frame(const SymplecticSpace& S, const Eigen::MatrixXd& span, double tol) {
  check_dims(S, span);
  LagrangianFrame f{orthonormalize(span)};
  const double iso = (f.X.transpose() * S.J * f.X).norm();
  if (!(iso <= tol)) {
    std::ostringstream os;
    os << "subspace is not isotropic: ||X^T J X|| = " << iso;
    throw NotLagrangian(os.str());
  }
  return f;
}

Eigen::VectorXcd ComplexStructure::to_complex(const Eigen::VectorXd& u) const {
  return (X.transpose() * u).cast<cd>() + cd(0, 1) * (JX.transpose() * u).cast<cd>();
}

Eigen::VectorXd ComplexStructure::to_real(const Eigen::VectorXcd& z) const {
  return X * z.real() + JX * z.imag();
}

Eigen::MatrixXcd ComplexStructure::coordinates(const Eigen::MatrixXd& Y) const {
  return (X.transpose() * Y).cast<cd>() + cd(0, 1) * (JX.transpose() * Y).cast<cd>();
}

ComplexStructure complexify(const SymplecticSpace& S, const LagrangianFrame& X) {
  check_dims(S, X.X);
  if (!is_lagrangian(S, X.X)) throw NotLagrangian("reference frame is not Lagrangian");
  return {X.X, S.J * X.X};
}

Eigen::MatrixXcd souriau(const SymplecticSpace& S, const LagrangianFrame& X, const LagrangianFrame& Y) {
  check_dims(S, X.X);
  check_dims(S, Y.X);
  const ComplexStructure cs = complexify(S, X);
  const auto n = S.real_dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // Real operator, complex-linear because both projections commute with J
  // up to the reflections; read off its matrix on the basis X e_j.
  const Eigen::MatrixXd R = (I - 2.0 * Y.X * Y.X.transpose()) * (2.0 * X.X * X.X.transpose() - I);
  return cs.coordinates(R * X.X);
}

Eigen::VectorXd souriau_phases(const Eigen::MatrixXcd& U) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(U, false);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("unitary eigensolver did not converge");
  Eigen::VectorXd ph(U.rows());
  for (Eigen::Index i = 0; i < U.rows(); ++i) ph(i) = std::arg(-es.eigenvalues()(i));
  std::sort(ph.data(), ph.data() + ph.size());
  return ph;
}

int intersection_dim(const SymplecticSpace& S, const LagrangianFrame& X, const LagrangianFrame& Y, double tol) {
  check_dims(S, X.X);
  check_dims(S, Y.X);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>((S.J * X.X).transpose() * Y.X).singularValues();
  return static_cast<int>((sv.array() <= tol).count());
}

UnitaryPath unitary_path(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y,
                         const std::vector<double>& t_grid) {
  UnitaryPath p;
  for (double t : t_grid) {
    const LagrangianFrame f{orthonormalize(Y(t))};
    p.t.push_back(t);
    p.u.push_back(souriau(S, X, f));
    p.phases.push_back(souriau_phases(p.u.back()));
  }
  return p;
}

namespace {

// Gap phase for a segment: middle of the widest empty arc of (0, pi) given
// the eigenphases at both ends.  Returns (epsilon, chord distance).
std::pair<double, double> gap_phase(const Eigen::VectorXd& pa, const Eigen::VectorXd& pb) {
  std::vector<double> pts{0.0, kPi};
  for (const auto* p : {&pa, &pb})
    for (Eigen::Index i = 0; i < p->size(); ++i)
      if ((*p)(i) > 0.0 && (*p)(i) < kPi) pts.push_back((*p)(i));
  std::sort(pts.begin(), pts.end());
  double best = -1.0, eps = 0.5 * kPi;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i + 1] - pts[i] > best) {
      best = pts[i + 1] - pts[i];
      eps = 0.5 * (pts[i] + pts[i + 1]);
    }
  double chord = 2.0;
  for (const auto* p : {&pa, &pb})
    for (Eigen::Index i = 0; i < p->size(); ++i)
      chord = std::min(chord, std::abs(std::exp(cd(0, (*p)(i))) - std::exp(cd(0, eps))));
  return {eps, chord};
}

int k_count(const Eigen::VectorXd& ph, double eps, double eta) {
  return static_cast<int>(((ph.array() >= -eta) && (ph.array() <= eps)).count());
}

double op_norm(const Eigen::MatrixXcd& A) { return Eigen::JacobiSVD<Eigen::MatrixXcd>(A).singularValues()(0); }

}  // namespace

int maslov_spectral_flow(const UnitaryPath& path, const SpectralFlowOptions& opts) {
  int total = 0;
  for (std::size_t j = 1; j < path.t.size(); ++j) {
    const auto [eps, chord] = gap_phase(path.phases[j - 1], path.phases[j]);
    if (op_norm(path.u[j] - path.u[j - 1]) >= 0.5 * chord) {
      std::ostringstream os;
      os << "segment [" << path.t[j - 1] << ", " << path.t[j] << "] moves farther than its gap";
      throw NoGapFound(os.str());
    }
    total += k_count(path.phases[j], eps, opts.eta) - k_count(path.phases[j - 1], eps, opts.eta);
  }
  return total;
}

int maslov_spectral_flow(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y, double a, double b,
                         const SpectralFlowOptions& opts) {
  if (!(a < b)) throw std::invalid_argument("spectral flow needs a < b");
  auto point = [&](double t) {
    const LagrangianFrame f{orthonormalize(Y(t))};
    Eigen::MatrixXcd u = souriau(S, X, f);
    Eigen::VectorXd ph = souriau_phases(u);
    return std::make_pair(std::move(u), std::move(ph));
  };
  using Pt = std::pair<Eigen::MatrixXcd, Eigen::VectorXd>;
  std::function<int(double, double, const Pt&, const Pt&, int)> segment = [&](double ta, double tb, const Pt& pa,
                                                                              const Pt& pb, int depth) -> int {
    const auto [eps, chord] = gap_phase(pa.second, pb.second);
    const double tm = 0.5 * (ta + tb);
    const Pt pm = point(tm);
    const double move = std::max({op_norm(pb.first - pa.first), op_norm(pm.first - pa.first), op_norm(pb.first - pm.first)});
    if (move < 0.5 * chord) return k_count(pb.second, eps, opts.eta) - k_count(pa.second, eps, opts.eta);
    if (depth >= opts.refine_cap) {
      std::ostringstream os;
      os << "no gap phase on [" << ta << ", " << tb << "] after " << depth << " bisections";
      throw NoGapFound(os.str());
    }
    return segment(ta, tm, pa, pm, depth + 1) + segment(tm, tb, pm, pb, depth + 1);
  };
  const int n = std::max(1, opts.initial_segments);
  int total = 0;
  Pt prev = point(a);
  for (int i = 1; i <= n; ++i) {
    const double t0 = a + (b - a) * (i - 1) / n, t1 = (i == n) ? b : a + (b - a) * i / n;
    Pt next = point(t1);
    total += segment(t0, t1, prev, next, 0);
    prev = std::move(next);
  }
  return total;
}

CrossingDatum crossing_form(const SymplecticSpace& S, const FramePath& Y, double t_star, const LagrangianFrame& X,
                            const CrossingFormOptions& opts) {
  check_dims(S, X.X);
  const Eigen::MatrixXd W = orthonormalize(Y(t_star));
  const Eigen::MatrixXd JW = S.J * W;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd((S.J * X.X).transpose() * W, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  int d = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= opts.intersection_tol) ++d;
  if (d == 0) {
    std::ostringstream os;
    os << "no intersection at t = " << t_star << " (smallest singular value " << sv(sv.size() - 1) << ")";
    throw NotACrossing(os.str());
  }
  const Eigen::MatrixXd C = svd.matrixV().rightCols(d);  // coordinates in the W frame

  auto graph = [&](double s) -> Eigen::MatrixXd {
    const Eigen::MatrixXd Ys = Y(s);
    const Eigen::MatrixXd a = W.transpose() * Ys, b = JW.transpose() * Ys;
    Eigen::MatrixXd M = a.transpose().fullPivLu().solve(b.transpose()).transpose();  // b a^{-1}
    M = 0.5 * (M + M.transpose());
    const double nrm = M.size() ? Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0) : 0.0;
    if (!(nrm <= 1.0)) {
      std::ostringstream os;
      os << "graph operator norm " << nrm << " exceeds 1 at s = " << s << "; reduce delta";
      throw GraphBreakdown(os.str());
    }
    return M;
  };

  const double dl = opts.delta;
  std::function<Eigen::MatrixXd(double)> diff;
  if (t_star - dl >= opts.lo && t_star + dl <= opts.hi) {
    diff = [&](double h) -> Eigen::MatrixXd { return (graph(t_star + h) - graph(t_star - h)) / (2 * h); };
  } else if (t_star + 2 * dl <= opts.hi) {
    const Eigen::MatrixXd M0 = graph(t_star);
    diff = [&, M0](double h) -> Eigen::MatrixXd {
      return (-3.0 * M0 + 4.0 * graph(t_star + h) - graph(t_star + 2 * h)) / (2 * h);
    };
  } else {
    const Eigen::MatrixXd M0 = graph(t_star);
    diff = [&, M0](double h) -> Eigen::MatrixXd {
      return (3.0 * M0 - 4.0 * graph(t_star - h) + graph(t_star - 2 * h)) / (2 * h);
    };
  }
  // Both stencils are second order; one Richardson step removes the h^2 term.
  const Eigen::MatrixXd Mdot = (4.0 * diff(0.5 * dl) - diff(dl)) / 3.0;

  CrossingDatum cd_;
  cd_.t = t_star;
  cd_.intersection = W * C;
  cd_.form = C.transpose() * Mdot * C;
  cd_.form = 0.5 * (cd_.form + cd_.form.transpose());
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cd_.form).eigenvalues();
  const double qn = ev.cwiseAbs().maxCoeff();
  const double eps = opts.eps_form_rel * qn;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > eps) ++cd_.n_plus;
    if (ev(i) < -eps) ++cd_.n_minus;
  }
  cd_.regular = qn > 0.0 && cd_.n_plus + cd_.n_minus == d;
  if (!cd_.regular && opts.throw_on_nonregular) {
    std::ostringstream os;
    os << "crossing form at t = " << t_star << " has an eigenvalue within " << eps << " of zero";
    throw NonRegular(os.str());
  }
  return cd_;
}

std::vector<double> locate_crossings(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y, double a,
                                     double b, const CrossingScanOptions& opts) {
  if (!(a < b)) throw std::invalid_argument("crossing scan needs a < b");
  struct Sample {
    double t;
    Eigen::MatrixXcd u;
    Eigen::VectorXd ph;
  };
  auto sample = [&](double t) {
    const LagrangianFrame f{orthonormalize(Y(t))};
    Sample s{t, souriau(S, X, f), {}};
    s.ph = souriau_phases(s.u);
    return s;
  };
  const int n = std::max(2, opts.grid_points);
  std::vector<Sample> grid;
  for (int i = 0; i < n; ++i) grid.push_back(sample(i == n - 1 ? b : a + (b - a) * i / (n - 1)));
  // Refine until the unitary moves little between neighbours.
  for (int pass = 0; pass < opts.refine_cap; ++pass) {
    std::vector<Sample> next{grid.front()};
    bool changed = false;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (op_norm(grid[i].u - grid[i - 1].u) > opts.max_step_change && grid[i].t - grid[i - 1].t > 1e-9) {
        next.push_back(sample(0.5 * (grid[i - 1].t + grid[i].t)));
        changed = true;
      }
      next.push_back(grid[i]);
    }
    grid = std::move(next);
    if (!changed) break;
  }

  std::vector<double> ts;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const Sample &sa = grid[i - 1], &sb = grid[i];
    for (Eigen::Index p = 0; p < sa.ph.size(); ++p) {
      const double pa = sa.ph(p);
      if (std::abs(pa) > 0.5) continue;
      Eigen::Index q = 0;
      (sb.ph.array() - pa).abs().minCoeff(&q);
      const double pb = sb.ph(q);
      if ((pa < 0) == (pb < 0)) continue;
      // Bisect on the eigenphase closest to the linear interpolant.
      double lo = sa.t, hi = sb.t, flo = pa;
      while (hi - lo > opts.t_tol) {
        const double mid = 0.5 * (lo + hi);
        const Eigen::VectorXd ph = sample(mid).ph;
        const double target = pa + (pb - pa) * (mid - sa.t) / (sb.t - sa.t);
        Eigen::Index r = 0;
        (ph.array() - target).abs().minCoeff(&r);
        const double fm = ph(r);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      ts.push_back(0.5 * (lo + hi));
    }
  }
  for (double te : {a, b}) {
    const LagrangianFrame f{orthonormalize(Y(te))};
    if (intersection_dim(S, X, f, opts.form.intersection_tol) > 0) ts.push_back(te);
  }
  std::sort(ts.begin(), ts.end());
  std::vector<double> merged;
  for (double t : ts) {
    if (!merged.empty() && t - merged.back() <= std::max(1e-8, 10 * opts.t_tol)) {
      if (t == a || t == b) merged.back() = t;
      continue;
    }
    merged.push_back(t);
  }
  // Snap roots that converged onto an end of the interval.
  for (double& t : merged) {
    if (std::abs(t - a) <= 10 * opts.t_tol) t = a;
    if (std::abs(t - b) <= 10 * opts.t_tol) t = b;
  }
  std::vector<double> out;
  for (double t : merged) {
    const LagrangianFrame f{orthonormalize(Y(t))};
    if (intersection_dim(S, X, f, opts.form.intersection_tol) > 0) out.push_back(t);
  }
  return out;
}

CrossingFormsResult maslov_crossing_forms(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y,
                                          double a, double b, const CrossingScanOptions& opts) {
  CrossingFormsResult res;
  CrossingFormOptions fo = opts.form;
  fo.lo = a;
  fo.hi = b;
  for (double t : locate_crossings(S, X, Y, a, b, opts)) {
    CrossingDatum c = crossing_form(S, Y, t, X, fo);
    if (t == a)
      res.maslov -= c.n_minus;
    else if (t == b)
      res.maslov += c.n_plus;
    else
      res.maslov += c.signature();
    res.crossings.push_back(std::move(c));
  }
  return res;
}

Eigen::MatrixXcd haar_unitary(int N, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd Z(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) Z(i, j) = cd(g(rng), g(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
  Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(N, N);
  const Eigen::MatrixXcd R = qr.matrixQR();
  for (int j = 0; j < N; ++j) Q.col(j) *= R(j, j) / std::abs(R(j, j));
  return Q;
}

Eigen::MatrixXd frame_from_unitary(const Eigen::MatrixXcd& U) {
  Eigen::MatrixXd Y(2 * U.rows(), U.cols());
  Y.topRows(U.rows()) = U.real();
  Y.bottomRows(U.rows()) = U.imag();
  return Y;
}

}  // namespace maslov
