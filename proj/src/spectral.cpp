#include "maslov/spectral.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "maslov/errors.hpp"
#include "maslov/linalg.hpp"
#include "maslov/parallel.hpp"

namespace maslov {

namespace {
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr cd kI(0.0, 1.0);

// Moments of t^2 V(t x) (or of D_t) keyed by the lattice frequency kappa.
// Grid-sampled potentials are sampled once and summed per frequency.
class MomentTable {
public:
  MomentTable(const Potential& V, double t, bool radial, int resolution)
      : V_(V), t_(t), radial_(radial) {
    if (V.kind() == Potential::Kind::GridSampled) {
      grid_ = cell_grid(V.lattice(), resolution);
      samples_.reserve(static_cast<std::size_t>(grid_.size()));
      for (Eigen::Index i = 0; i < grid_.size(); ++i) {
        const Eigen::VectorXd x = grid_.nodes.col(i);
        samples_.push_back(radial ? V.radial_derivative_at(t, x) : V.eval_scaled(t, x));
      }
    }
  }

  const Eigen::MatrixXcd& at(const Eigen::VectorXd& kappa) {
    std::vector<double> key(kappa.data(), kappa.data() + kappa.size());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Eigen::MatrixXcd val;
    if (samples_.empty()) {
      val = radial_ ? V_.radial_moment(t_, kappa) : V_.moment(t_, kappa);
    } else {
      val = Eigen::MatrixXcd::Zero(V_.m(), V_.m());
      for (Eigen::Index i = 0; i < grid_.size(); ++i)
        val += (grid_.weights(i) * std::exp(kI * (kTwoPi * kappa.dot(grid_.lattice_coords.col(i))))) *
               samples_[static_cast<std::size_t>(i)].cast<cd>();
      val /= V_.lattice().cell_volume;
    }
    return cache_.emplace(std::move(key), std::move(val)).first->second;
  }

private:
  const Potential& V_;
  double t_;
  bool radial_;
  CellGrid grid_;
  std::vector<Eigen::MatrixXd> samples_;
  std::map<std::vector<double>, Eigen::MatrixXcd> cache_;
};

// 1-D product f_k(s) f_k'(s) of sine (Dirichlet) or cosine (Neumann) factors
// written as sum of coef * cos(pi p s).
struct CosTerm {
  double coef;
  int p;
};

std::vector<CosTerm> product_terms(Boundary bc, int k, int kp) {
  const double sgn = bc == Boundary::Dirichlet ? -1.0 : 1.0;
  return {{0.5, k - kp}, {0.5 * sgn, k + kp}};
}

double separated_norm(Boundary bc, int k, double L) {
  return (bc == Boundary::Neumann && k == 0) ? std::sqrt(1.0 / L) : std::sqrt(2.0 / L);
}

// Potential part of the Galerkin matrix; `table` supplies the moments.
Eigen::MatrixXcd potential_block(const BasisSpec& b, MomentTable& table) {
  const auto modes = b.modes();
  const auto N = static_cast<Eigen::Index>(modes.size());
  const int n = b.lattice.dim;
  const Eigen::Index dim = b.size();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);

  if (b.bc == Boundary::Theta && b.field == Field::Complex) {
    const Eigen::Index m = b.m;
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = 0; j < N; ++j) {
        const Eigen::VectorXd kappa = (modes[i] - modes[j]).cast<double>();
        H.block(i * m, j * m, m, m) = table.at(kappa);
      }
    return H;
  }

  if (b.bc == Boundary::Theta) {
    // Real pairs phi = (c, s), psi = (-s, c) in components (2l, 2l+1),
    // integrated against the realified potential entry by entry.
    const Eigen::Index m = b.m;
    const Eigen::Index off = N * m;
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = 0; j < N; ++j) {
        const Eigen::VectorXd kd = (modes[j] - modes[i]).cast<double>();
        const Eigen::VectorXd ks = 2.0 * b.theta - (modes[i] + modes[j]).cast<double>();
        const Eigen::MatrixXcd Md = table.at(kd);
        const Eigen::MatrixXcd Ms = table.at(ks);
        const Eigen::MatrixXd Cd = Md.real(), Sd = Md.imag(), Cs = Ms.real(), Ss = Ms.imag();
        const Eigen::MatrixXd cc = 0.5 * (Cd + Cs), ss = 0.5 * (Cd - Cs);
        const Eigen::MatrixXd cs = 0.5 * (Ss - Sd), sc = 0.5 * (Ss + Sd);
        for (Eigen::Index a = 0; a < m; ++a)
          for (Eigen::Index bb = 0; bb < m; ++bb) {
            const Eigen::Index ga = 2 * a, gb = 2 * bb;
            // Each entry sums R_{gamma delta} f^gamma g^delta over the two components.
            const double pp = cc(ga, gb) + cs(ga, gb + 1) + sc(ga + 1, gb) + ss(ga + 1, gb + 1);
            const double pq = -cs(ga, gb) + cc(ga, gb + 1) - ss(ga + 1, gb) + sc(ga + 1, gb + 1);
            const double qp = -sc(ga, gb) - ss(ga, gb + 1) + cc(ga + 1, gb) + cs(ga + 1, gb + 1);
            const double qq = ss(ga, gb) - sc(ga, gb + 1) - cs(ga + 1, gb) + cc(ga + 1, gb + 1);
            H(i * m + a, j * m + bb) = pp;
            H(i * m + a, off + j * m + bb) = pq;
            H(off + i * m + a, j * m + bb) = qp;
            H(off + i * m + a, off + j * m + bb) = qq;
          }
      }
    return H;
  }

  // Separated boundary conditions on a box.  Products of sines / cosines
  // reduce to cosine moments at half-integer frequencies p / 2 with
  // |p| <= 2K per axis; their real parts are cached in a dense array.
  const Eigen::Index c = b.components();
  const Eigen::VectorXd L = b.lattice.side_lengths();
  const int P = 2 * b.K, W = 2 * P + 1;
  std::vector<Eigen::MatrixXd> mom(static_cast<std::size_t>(n == 1 ? W : W * W));
  std::vector<char> have(mom.size(), 0);
  auto moment = [&](int p0, int p1) -> const Eigen::MatrixXd& {
    const std::size_t idx = static_cast<std::size_t>((p0 + P) + (n == 1 ? 0 : W * (p1 + P)));
    if (!have[idx]) {
      Eigen::VectorXd kappa(n);
      kappa(0) = 0.5 * p0;
      if (n == 2) kappa(1) = 0.5 * p1;
      mom[idx] = table.at(kappa).real();
      have[idx] = 1;
    }
    return mom[idx];
  };
  std::vector<std::vector<double>> norms(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d)
    for (Eigen::Index i = 0; i < N; ++i) norms[static_cast<std::size_t>(d)].push_back(separated_norm(b.bc, modes[i](d), L(d)));
  Eigen::MatrixXd acc(c, c);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      double norm = b.lattice.cell_volume;
      for (int d = 0; d < n; ++d)
        norm *= norms[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)] *
                norms[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)];
      acc.setZero();
      const auto t0 = product_terms(b.bc, modes[i](0), modes[j](0));
      if (n == 1) {
        for (const auto& a : t0) acc += a.coef * moment(a.p, 0);
      } else {
        const auto t1 = product_terms(b.bc, modes[i](1), modes[j](1));
        for (const auto& a : t0)
          for (const auto& e : t1) {
            // cos(x) cos(y) = (cos(x + y) + cos(x - y)) / 2
            acc += (0.5 * a.coef * e.coef) * (moment(a.p, e.p) + moment(a.p, -e.p));
          }
      }
      H.block(i * c, j * c, c, c) = (norm * acc).cast<cd>();
    }
  return H;
}

Potential field_potential(const BasisSpec& b, const Potential& V) {
  if (V.m() != b.m) throw std::invalid_argument("potential block size does not match the basis");
  if (V.dim() != b.lattice.dim) throw std::invalid_argument("potential dimension does not match the basis");
  return b.field == Field::Realified ? V.realify() : V;
}

int resolve_resolution(const BasisSpec& b, int r) {
  if (r == 0) r = 2 * b.min_resolution();
  if (r < b.min_resolution()) {
    std::ostringstream os;
    os << "assembly resolution " << r << " below " << b.min_resolution();
    throw AliasingRisk(os.str());
  }
  return r;
}

}  // namespace

const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::Theta: return "theta";
    case Boundary::Dirichlet: return "dirichlet";
    default: return "neumann";
  }
}

const char* to_string(Field f) { return f == Field::Complex ? "complex" : "realified"; }

void BasisSpec::validate() const {
  const int n = lattice.dim;
  if (n < 1) throw std::invalid_argument("basis needs a lattice");
  if (m < 1) throw std::invalid_argument("block size must be >= 1");
  if (!(laplace_scale > 0.0)) throw std::invalid_argument("laplace scale must be positive");
  if (bc == Boundary::Theta) {
    if (K < 0) throw std::invalid_argument("truncation K must be >= 0");
    if (theta.size() != n) throw std::invalid_argument("theta needs n components");
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(theta(j) >= 0.0 && theta(j) < 1.0)) throw std::invalid_argument("theta must lie in [0,1)^n");
  } else {
    if (K < 1) throw std::invalid_argument("truncation K must be >= 1");
    if (n > 2) throw UnsupportedLattice("separated boundary conditions need n <= 2");
    if (!lattice.is_rectangular()) throw UnsupportedLattice("separated boundary conditions need a rectangular cell");
  }
}

std::vector<Eigen::VectorXi> BasisSpec::modes() const {
  const int n = lattice.dim;
  int lo = -K, hi = K;
  if (bc == Boundary::Dirichlet) lo = 1;
  if (bc == Boundary::Neumann) lo = 0;
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi k = Eigen::VectorXi::Constant(n, lo);
  while (true) {
    out.push_back(k);
    int d = n - 1;
    while (d >= 0 && k(d) == hi) k(d--) = lo;
    if (d < 0) break;
    ++k(d);
  }
  return out;
}

double BasisSpec::free_eigenvalue(const Eigen::VectorXi& k) const {
  if (bc == Boundary::Theta) return laplace_eigenvalue(lattice, theta, k);
  const Eigen::VectorXd L = lattice.side_lengths();
  double s = 0.0;
  for (int d = 0; d < lattice.dim; ++d) s += std::pow(kPi * k(d) / L(d), 2);
  return s;
}

Eigen::Index BasisSpec::size() const {
  Eigen::Index per_axis = bc == Boundary::Theta ? 2 * K + 1 : (bc == Boundary::Dirichlet ? K : K + 1);
  Eigen::Index N = 1;
  for (int d = 0; d < lattice.dim; ++d) N *= per_axis;
  return N * components();
}

bool GalerkinOperator::is_real() const { return H.imag().cwiseAbs().maxCoeff() == 0.0; }

GalerkinOperator assemble(const BasisSpec& basis, const Potential& V, double t, double lambda_shift, int r) {
  basis.validate();
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("assemble: t must lie in (0, 1]");
  r = resolve_resolution(basis, r);
  const Potential W = field_potential(basis, V);
  MomentTable table(W, t, false, r);

  GalerkinOperator op;
  op.basis = basis;
  op.t = t;
  op.lambda_shift = lambda_shift;
  op.assembly_resolution = r;
  op.H = potential_block(basis, table);
  const auto modes = basis.modes();
  const Eigen::Index N = static_cast<Eigen::Index>(modes.size());
  op.laplace_diagonal.resize(op.H.rows());
  // Row index -> mode: blocks of size m (complex) or components (separated),
  // realified theta repeats the mode list for the psi half.
  const Eigen::Index block = basis.bc == Boundary::Theta ? basis.m : basis.components();
  for (Eigen::Index row = 0; row < op.H.rows(); ++row) {
    const Eigen::Index mode = (row / block) % N;
    op.laplace_diagonal(row) = basis.laplace_scale * basis.free_eigenvalue(modes[mode]);
  }
  op.H.diagonal().array() += (op.laplace_diagonal.array() - lambda_shift).cast<cd>();
  // Remove rounding asymmetry so the solver sees an exactly Hermitian matrix.
  op.H = (0.5 * (op.H + op.H.adjoint())).eval();
  return op;
}

Eigen::MatrixXcd assemble_radial(const BasisSpec& basis, const Potential& V, double t, int r) {
  basis.validate();
  r = resolve_resolution(basis, r);
  const Potential W = field_potential(basis, V);
  if (!W.has_gradient()) throw NoGradient("radial Galerkin matrix needs gradients");
  MomentTable table(W, t, true, r);
  Eigen::MatrixXcd H = potential_block(basis, table);
  return 0.5 * (H + H.adjoint());
}

double default_eps_ker(const Eigen::VectorXd& ev) {
  const double rho = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * std::max(1.0, rho);
}

namespace {
void fix_phases(Eigen::MatrixXcd& vecs) {
  for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
    auto col = vecs.col(j);
    const double big = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i)
      if (std::abs(col(i)) > 1e-8 * big) {
        col *= std::conj(col(i)) / std::abs(col(i));
        col(i) = std::abs(col(i));
        break;
      }
  }
}

struct Counts {
  int morse = 0;
  int kernel = 0;
  bool ambiguous = false;
};

Counts classify(const Eigen::VectorXd& ev, double eps) {
  Counts c;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -eps) ++c.morse;
    if (std::abs(ev(i)) <= eps) ++c.kernel;
    if (std::abs(ev(i) + eps) < eps / 10) c.ambiguous = true;
  }
  return c;
}
}  // namespace

SpectralResult eigendecompose(const Eigen::MatrixXcd& H, std::optional<double> eps_ker) {
  SpectralResult r;
  const bool real = H.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.real());
    if (es.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");
    r.eigenvalues = es.eigenvalues();
    r.eigenvectors = es.eigenvectors().cast<cd>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) throw ConvergenceFailure("Hermitian eigensolver did not converge");
    r.eigenvalues = es.eigenvalues();
    r.eigenvectors = es.eigenvectors();
  }
  fix_phases(r.eigenvectors);
  r.eps_ker = eps_ker.value_or(default_eps_ker(r.eigenvalues));
  const Counts c = classify(r.eigenvalues, r.eps_ker);
  r.morse_index = c.morse;
  r.kernel_dim = c.kernel;
  return r;
}

SpectralResult eigendecompose(const GalerkinOperator& op, std::optional<double> eps_ker) {
  return eigendecompose(op.H, eps_ker);
}

int morse_index(const SpectralResult& r) {
  const Counts c = classify(r.eigenvalues, r.eps_ker);
  if (c.ambiguous) {
    std::ostringstream os;
    os << "an eigenvalue lies within eps_ker/10 of -eps_ker (eps_ker = " << r.eps_ker << ")";
    throw BoundaryAmbiguity(os.str());
  }
  return c.morse;
}

int kernel_dim(const SpectralResult& r) {
  morse_index(r);
  return classify(r.eigenvalues, r.eps_ker).kernel;
}

int morse_count(const BasisSpec& basis, const Potential& V, double t, std::optional<double> eps_ker) {
  return morse_index(eigendecompose(assemble(basis, V, t), eps_ker));
}

int crossing_candidates(const BasisSpec& basis, const Potential& V) {
  // The j-th eigenvalue is at least the j-th free eigenvalue minus sup ||V_t||.
  const double cutoff = 2.0 * V.sup_norm_bound() + 1.0;
  int count = 0;
  for (const auto& k : basis.modes())
    if (basis.laplace_scale * basis.free_eigenvalue(k) <= cutoff) ++count;
  const int per_mode = static_cast<int>(basis.size() / static_cast<Eigen::Index>(basis.modes().size()));
  return std::max(1, count * per_mode);
}

namespace {

struct FlowPoint {
  double t;
  SpectralResult res;
};

// Matches the tracked curves of `prev` (values, vectors) to the eigenpairs of
// `next`.  Returns the new tracked vectors and values plus the worst overlap.
struct MatchResult {
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd values;
  double quality = 1.0;
  bool ambiguous = false;
};

MatchResult match_step(const Eigen::MatrixXcd& prev, const SpectralResult& next, int tracked, double cluster_tol) {
  const Eigen::VectorXd& ev = next.eigenvalues;
  const Eigen::Index total = ev.size();
  const double tol = cluster_tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  // Candidate pool: the tracked count plus two spare eigenpairs, extended to
  // finish the last cluster.
  Eigen::Index pool = std::min<Eigen::Index>(total, tracked + 2);
  while (pool < total && ev(pool) - ev(pool - 1) <= tol) ++pool;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;  // [begin, end)
  for (Eigen::Index i = 0; i < pool;) {
    Eigen::Index j = i + 1;
    while (j < pool && ev(j) - ev(j - 1) <= tol) ++j;
    clusters.emplace_back(i, j);
    i = j;
  }
  const Eigen::MatrixXcd proj = next.eigenvectors.leftCols(pool).adjoint() * prev;  // pool x tracked
  const auto nc = clusters.size();
  Eigen::MatrixXd ov(tracked, static_cast<Eigen::Index>(nc));
  for (int j = 0; j < tracked; ++j)
    for (std::size_t c = 0; c < nc; ++c) {
      const auto [b, e] = clusters[c];
      ov(j, static_cast<Eigen::Index>(c)) = proj.block(b, j, e - b, 1).squaredNorm();
    }

  std::vector<std::tuple<double, int, std::size_t>> order;
  for (int j = 0; j < tracked; ++j)
    for (std::size_t c = 0; c < nc; ++c) order.emplace_back(ov(j, static_cast<Eigen::Index>(c)), j, c);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  std::vector<int> assign(static_cast<std::size_t>(tracked), -1);
  std::vector<Eigen::Index> capacity(nc);
  for (std::size_t c = 0; c < nc; ++c) capacity[c] = clusters[c].second - clusters[c].first;
  for (const auto& [o, j, c] : order) {
    if (assign[static_cast<std::size_t>(j)] >= 0 || capacity[c] == 0) continue;
    assign[static_cast<std::size_t>(j)] = static_cast<int>(c);
    --capacity[c];
  }

  MatchResult out;
  out.vectors.resize(prev.rows(), tracked);
  out.values.resize(tracked);
  for (int j = 0; j < tracked; ++j) {
    if (assign[static_cast<std::size_t>(j)] < 0) throw MatchFailure("no eigenpair left for a tracked curve");
    const Eigen::Index c = assign[static_cast<std::size_t>(j)];
    out.quality = std::min(out.quality, std::sqrt(ov(j, c)));
    // Ambiguity: the runner-up cluster captures almost as much of the vector.
    double second = 0.0;
    for (Eigen::Index c2 = 0; c2 < static_cast<Eigen::Index>(nc); ++c2)
      if (c2 != c) second = std::max(second, ov(j, c2));
    if (ov(j, c) - second < 0.1) out.ambiguous = true;
  }
  // Within each cluster, rotate its eigenbasis towards the incoming vectors
  // (closest orthonormal set, via SVD) so degenerate curves keep their identity.
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<int> members;
    for (int j = 0; j < tracked; ++j)
      if (assign[static_cast<std::size_t>(j)] == static_cast<int>(c)) members.push_back(j);
    if (members.empty()) continue;
    const auto [b, e] = clusters[c];
    const Eigen::MatrixXcd Wc = next.eigenvectors.middleCols(b, e - b);
    Eigen::MatrixXcd X(e - b, static_cast<Eigen::Index>(members.size()));
    for (std::size_t q = 0; q < members.size(); ++q) X.col(static_cast<Eigen::Index>(q)) = proj.block(b, members[q], e - b, 1);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXcd R = svd.matrixU() * svd.matrixV().adjoint();
    const Eigen::MatrixXcd Qv = Wc * R;
    for (std::size_t q = 0; q < members.size(); ++q) {
      const Eigen::VectorXcd col = Qv.col(static_cast<Eigen::Index>(q));
      out.vectors.col(members[q]) = col;
      // Rayleigh quotient of the rotated vector inside the cluster.
      out.values(members[q]) = (R.col(static_cast<Eigen::Index>(q)).cwiseAbs2().transpose() *
                                ev.segment(b, e - b))(0);
    }
  }
  return out;
}

}  // namespace

EigenFlow eigen_flow(const BasisSpec& basis, const Potential& V, const std::vector<double>& t_grid,
                     const FlowOptions& opts) {
  if (t_grid.size() < 2) throw std::invalid_argument("eigen_flow needs at least two grid points");
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
    if (!(t_grid[i] < t_grid[i + 1])) throw std::invalid_argument("t grid must be ascending");
  const int tracked = std::min<int>(static_cast<int>(basis.size()),
                                    opts.tracked > 0 ? opts.tracked : crossing_candidates(basis, V));

  std::vector<SpectralResult> base(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) { base[i] = eigendecompose(assemble(basis, V, t_grid[i])); });

  EigenFlow flow;
  std::vector<Eigen::VectorXd> rows;
  Eigen::MatrixXcd vecs = base[0].eigenvectors.leftCols(tracked);
  flow.t.push_back(t_grid[0]);
  rows.push_back(base[0].eigenvalues.head(tracked));

  // Advances from (t_a, vecs) to t_b, bisecting when the overlap is poor.
  std::function<void(double, double, const SpectralResult&, int)> advance =
      [&](double ta, double tb, const SpectralResult& rb, int depth) {
        MatchResult mr = match_step(vecs, rb, tracked, opts.cluster_tol);
        if (mr.quality < opts.min_overlap && depth < opts.refine_cap) {
          const double tm = 0.5 * (ta + tb);
          const SpectralResult rm = eigendecompose(assemble(basis, V, tm));
          advance(ta, tm, rm, depth + 1);
          advance(tm, tb, rb, depth + 1);
          return;
        }
        if (mr.quality < opts.min_overlap && mr.ambiguous) {
          std::ostringstream os;
          os << "ambiguous eigenvector matching on [" << ta << ", " << tb << "] after refinement";
          throw MatchFailure(os.str());
        }
        flow.overlap_quality.push_back(mr.quality);
        flow.flagged.push_back(mr.quality < opts.min_overlap);
        vecs = mr.vectors;
        flow.t.push_back(tb);
        rows.push_back(mr.values);
      };
  for (std::size_t i = 1; i < t_grid.size(); ++i) advance(t_grid[i - 1], t_grid[i], base[i], 0);

  flow.curves.resize(static_cast<Eigen::Index>(rows.size()), tracked);
  for (std::size_t i = 0; i < rows.size(); ++i) flow.curves.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return flow;
}

namespace {

Eigen::VectorXd eigenvalues_of(const Eigen::MatrixXcd& H) {
  if (H.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.real(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");
    return es.eigenvalues();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("Hermitian eigensolver did not converge");
  return es.eigenvalues();
}

}  // namespace

ZeroCrossing kernel_at(const BasisSpec& basis, const Potential& V, double t, const CrossingSearchOptions& opts) {
  const SpectralResult r = eigendecompose(assemble(basis, V, t), opts.eps_ker);
  ZeroCrossing z;
  z.t = t;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
    if (std::abs(r.eigenvalues(i)) <= r.eps_ker) idx.push_back(i);
  z.dim = static_cast<int>(idx.size());
  z.kernel.resize(r.eigenvectors.rows(), z.dim);
  z.kernel_eigenvalues.resize(z.dim);
  for (int q = 0; q < z.dim; ++q) {
    z.kernel.col(q) = r.eigenvectors.col(idx[static_cast<std::size_t>(q)]);
    z.kernel_eigenvalues(q) = r.eigenvalues(idx[static_cast<std::size_t>(q)]);
  }
  if (z.dim == 0) return z;

  // Branch slopes: eigenvalues of dH/dt compressed to the kernel.  Sorting
  // eigenvalues at t +- h instead mixes slopes with the offsets of roots that
  // are closer than eps_ker can resolve.
  const double h = opts.slope_step;
  auto H_at = [&](double s) { return assemble(basis, V, s).H; };
  const Eigen::MatrixXcd dH = t + h <= 1.0 ? Eigen::MatrixXcd((H_at(t + h) - H_at(t - h)) / (2 * h))
                                           : Eigen::MatrixXcd((3 * H_at(t) - 4 * H_at(t - h) + H_at(t - 2 * h)) / (2 * h));
  Eigen::MatrixXcd C = z.kernel.adjoint() * dH * z.kernel;
  C = (0.5 * (C + C.adjoint())).eval();
  z.slopes = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(C, Eigen::EigenvaluesOnly).eigenvalues();
  return z;
}

std::vector<ZeroCrossing> find_zero_crossings(const BasisSpec& basis, const Potential& V, double t0, double t1,
                                              const CrossingSearchOptions& opts, EigenFlow* flow_out) {
  if (!(t0 > 0.0 && t0 < t1 && t1 <= 1.0)) throw std::invalid_argument("crossing search needs 0 < t0 < t1 <= 1");
  const int npts = opts.grid_points > 0 ? opts.grid_points : 65;
  std::vector<double> grid(static_cast<std::size_t>(npts));
  for (int i = 0; i < npts; ++i) grid[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / (npts - 1);
  grid.back() = t1;
  const EigenFlow flow = eigen_flow(basis, V, grid);
  if (flow_out) *flow_out = flow;

  auto sorted_eig = [&](double t) { return eigenvalues_of(assemble(basis, V, t).H); };
  std::vector<double> roots;

  // Walks flow intervals; a mixed interval (curves crossing zero in both
  // directions) is split until the count of negative eigenvalues brackets
  // every root.
  std::function<void(double, double, int)> solve_interval = [&](double a, double b, int depth) {
    const Eigen::VectorXd ra = sorted_eig(a), rb = sorted_eig(b);
    auto negatives = [](const Eigen::VectorXd& ev) { return static_cast<int>((ev.array() < 0.0).count()); };
    const int na = negatives(ra), nb = negatives(rb);
    if (na == nb) return;
    const int lo = std::min(na, nb), hi = std::max(na, nb);
    for (int rank = lo; rank < hi; ++rank) {
      auto f = [&](double t) { return sorted_eig(t)(rank); };
      double fa = ra(rank), fb = rb(rank);
      if (fa == 0.0) {
        roots.push_back(a);
        continue;
      }
      if (fb == 0.0) {
        roots.push_back(b);
        continue;
      }
      if ((fa < 0) == (fb < 0)) {
        if (depth > 8) throw ConvergenceFailure("could not bracket an eigenvalue zero");
        const double mid = 0.5 * (a + b);
        solve_interval(a, mid, depth + 1);
        solve_interval(mid, b, depth + 1);
        return;
      }
      std::uintmax_t iters = 200;
      auto tol = [&](double x, double y) { return std::abs(x - y) <= opts.t_tol; };
      const auto br = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
      roots.push_back(0.5 * (br.first + br.second));
    }
  };

  for (Eigen::Index i = 0; i + 1 < flow.curves.rows(); ++i) {
    const double a = flow.t[static_cast<std::size_t>(i)], b = flow.t[static_cast<std::size_t>(i + 1)];
    int down = 0, up = 0;
    for (Eigen::Index j = 0; j < flow.curves.cols(); ++j) {
      const double ya = flow.curves(i, j), yb = flow.curves(i + 1, j);
      if (ya >= 0 && yb < 0) ++down;
      if (ya < 0 && yb >= 0) ++up;
    }
    if (down == 0 && up == 0) continue;
    if (down > 0 && up > 0) {
      // Split the interval so each half carries one direction.
      const int parts = 8;
      for (int p = 0; p < parts; ++p) solve_interval(a + (b - a) * p / parts, a + (b - a) * (p + 1) / parts, 0);
    } else {
      solve_interval(a, b, 0);
    }
  }

  // Kernels at the ends count as crossings as well.
  for (double te : {t0, t1})
    if (kernel_at(basis, V, te, opts).dim > 0) roots.push_back(te);
  std::sort(roots.begin(), roots.end());

  // Roots closer than cluster_window cannot be told apart by the kernel
  // threshold; each cluster becomes one crossing at its mean (or at an end
  // point it contains).
  std::vector<std::vector<double>> clusters;
  for (double r : roots)
    if (clusters.empty() || r - clusters.back().back() > std::max(opts.cluster_window, 10 * opts.t_tol))
      clusters.push_back({r});
    else
      clusters.back().push_back(r);

  std::vector<ZeroCrossing> out;
  for (const auto& c : clusters) {
    double t = 0.0;
    for (double r : c) t += r / static_cast<double>(c.size());
    for (double r : c)
      if (r == t0 || r == t1) t = r;
    ZeroCrossing z = kernel_at(basis, V, t, opts);
    if (z.dim > 0) out.push_back(std::move(z));
  }
  return out;
}

FieldSample reconstruct(const BasisSpec& b, const Eigen::VectorXcd& coeffs, const Eigen::VectorXd& x) {
  if (coeffs.size() != b.size()) throw std::invalid_argument("coefficient vector has wrong length");
  const int n = b.lattice.dim;
  const auto modes = b.modes();
  const auto N = static_cast<Eigen::Index>(modes.size());
  FieldSample fs;
  const Eigen::Index c = b.components();
  fs.value = Eigen::VectorXcd::Zero(c);
  fs.gradient = Eigen::MatrixXcd::Zero(c, n);
  if (b.bc == Boundary::Theta) {
    const double norm = 1.0 / std::sqrt(b.lattice.cell_volume);
    const Eigen::Index m = b.m;
    for (Eigen::Index i = 0; i < N; ++i) {
      const Eigen::VectorXd w = b.lattice.A.transpose() * (b.theta - modes[i].cast<double>());
      const double ph = w.dot(x);
      if (b.field == Field::Complex) {
        const cd z = norm * std::exp(kI * ph);
        for (Eigen::Index a = 0; a < m; ++a) {
          const cd u = coeffs(i * m + a) * z;
          fs.value(a) += u;
          for (int d = 0; d < n; ++d) fs.gradient(a, d) += kI * w(d) * u;
        }
      } else {
        const double cv = norm * std::cos(ph), sv = norm * std::sin(ph);
        for (Eigen::Index a = 0; a < m; ++a) {
          const cd p = coeffs(i * m + a), q = coeffs(N * m + i * m + a);
          fs.value(2 * a) += p * cv - q * sv;
          fs.value(2 * a + 1) += p * sv + q * cv;
          for (int d = 0; d < n; ++d) {
            fs.gradient(2 * a, d) += w(d) * (-p * sv - q * cv);
            fs.gradient(2 * a + 1, d) += w(d) * (p * cv - q * sv);
          }
        }
      }
    }
    return fs;
  }
  const Eigen::VectorXd L = b.lattice.side_lengths();
  for (Eigen::Index i = 0; i < N; ++i) {
    double val = 1.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Ones(n);
    for (int d = 0; d < n; ++d) {
      const double k = kPi * modes[i](d) / L(d);
      const double nrm = separated_norm(b.bc, modes[i](d), L(d));
      const double f = b.bc == Boundary::Dirichlet ? std::sin(k * x(d)) : std::cos(k * x(d));
      const double df = b.bc == Boundary::Dirichlet ? k * std::cos(k * x(d)) : -k * std::sin(k * x(d));
      for (int e = 0; e < n; ++e) grad(e) *= nrm * (e == d ? df : f);
      val *= nrm * f;
    }
    for (Eigen::Index a = 0; a < c; ++a) {
      fs.value(a) += coeffs(i * c + a) * val;
      for (int d = 0; d < n; ++d) fs.gradient(a, d) += coeffs(i * c + a) * grad(d);
    }
  }
  return fs;
}

Eigen::VectorXcd complexify_coefficients(const BasisSpec& b, const Eigen::VectorXcd& coeffs) {
  if (b.field != Field::Realified) return coeffs;
  const Eigen::Index half = coeffs.size() / 2;
  Eigen::VectorXcd out(half);
  if (b.bc == Boundary::Theta) {
    for (Eigen::Index i = 0; i < half; ++i) out(i) = coeffs(i) + kI * coeffs(half + i);
  } else {
    for (Eigen::Index i = 0; i < half; ++i) out(i) = coeffs(2 * i) + kI * coeffs(2 * i + 1);
  }
  return out;
}

}  // namespace maslov
