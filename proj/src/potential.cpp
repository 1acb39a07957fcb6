#include "maslov/potential.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>

#include "maslov/errors.hpp"
#include "maslov/linalg.hpp"

namespace maslov {

namespace {
using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr cd kI(0.0, 1.0);

// f(a) = int_0^1 e^{i a s} ds and its derivative f'(a) = i int_0^1 s e^{i a s} ds.
// Power series near zero avoid the cancellation in the closed forms.
cd box_transform(double a) {
  if (std::abs(a) < 0.5) {
    cd sum = 0, term = 1;  // term = (i a)^n / n!
    for (int n = 0; n < 20; ++n) {
      sum += term / static_cast<double>(n + 1);
      term *= kI * a / static_cast<double>(n + 1);
    }
    return sum;
  }
  return (std::exp(kI * a) - 1.0) / (kI * a);
}

cd box_transform_derivative(double a) {
  if (std::abs(a) < 0.5) {
    cd sum = 0, term = 1;
    for (int n = 0; n < 20; ++n) {
      sum += term / static_cast<double>(n + 2);
      term *= kI * a / static_cast<double>(n + 1);
    }
    return kI * sum;
  }
  const cd e = std::exp(kI * a);
  return (a * e + kI * (e - 1.0)) / (a * a);
}

struct IntVecLess {
  bool operator()(const Eigen::VectorXi& a, const Eigen::VectorXi& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

double spectral_norm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues()(0);
}

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}
}  // namespace

Potential Potential::constant(const Lattice& lat, const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols() || S.rows() < 1) throw InvalidPotential("constant potential must be square");
  if ((S - S.transpose()).norm() > 1e-12 * std::max(1.0, S.norm()))
    throw InvalidPotential("constant potential is not symmetric");
  Potential p;
  p.kind_ = Kind::Constant;
  p.m_ = static_cast<int>(S.rows());
  p.lattice_ = lat;
  p.terms_.push_back({Eigen::VectorXi::Zero(lat.dim), symmetrize(S).cast<cd>()});
  return p;
}

Potential Potential::fourier(const Lattice& lat, int m, std::vector<FourierTerm> terms) {
  if (m < 1) throw InvalidPotential("block size must be >= 1");
  std::map<Eigen::VectorXi, Eigen::MatrixXcd, IntVecLess> merged;
  double scale = 0.0;
  for (auto& t : terms) {
    if (t.q.size() != lat.dim) throw InvalidPotential("frequency vector has wrong length");
    if (t.coeff.rows() != m || t.coeff.cols() != m) throw InvalidPotential("coefficient has wrong size");
    auto it = merged.find(t.q);
    if (it == merged.end())
      merged.emplace(t.q, t.coeff);
    else
      it->second += t.coeff;
  }
  for (auto& [q, c] : merged) scale = std::max(scale, c.norm());
  const double tol = 1e-12 * std::max(1.0, scale);
  for (auto& [q, c] : merged) {
    if ((c - c.transpose()).norm() > tol) {
      std::ostringstream os;
      os << "coefficient at q = (" << q.transpose() << ") is not symmetric";
      throw InvalidPotential(os.str());
    }
    Eigen::VectorXi mq = -q;
    auto it = merged.find(mq);
    const double mismatch = it == merged.end() ? c.norm() : (it->second - c.conjugate()).norm();
    if (mismatch > tol) {
      std::ostringstream os;
      os << "coefficient at q = (" << q.transpose() << ") lacks the conjugate partner at -q";
      throw InvalidPotential(os.str());
    }
  }
  Potential p;
  p.kind_ = Kind::FourierPolynomial;
  p.m_ = m;
  p.lattice_ = lat;
  for (auto& [q, c] : merged)
    if (c.norm() > 0.0) p.terms_.push_back({q, c});
  if (p.terms_.empty()) p.terms_.push_back({Eigen::VectorXi::Zero(lat.dim), Eigen::MatrixXcd::Zero(m, m)});
  return p;
}

Potential Potential::grid_sampled(const Lattice& lat, CellGrid grid, std::vector<Eigen::MatrixXd> values,
                                  std::optional<std::vector<std::vector<Eigen::MatrixXd>>> gradients) {
  if (static_cast<Eigen::Index>(values.size()) != grid.size() || values.empty())
    throw InvalidPotential("one value per grid node required");
  const auto m = values.front().rows();
  for (auto& v : values) {
    if (v.rows() != m || v.cols() != m) throw InvalidPotential("inconsistent value sizes");
    if ((v - v.transpose()).norm() > 1e-12 * std::max(1.0, v.norm()))
      throw InvalidPotential("sampled value is not symmetric");
    v = symmetrize(v);
  }
  Potential p;
  p.kind_ = Kind::GridSampled;
  p.m_ = static_cast<int>(m);
  p.lattice_ = lat;
  p.grid_ = std::move(grid);
  p.values_ = std::move(values);
  if (gradients) {
    if (gradients->size() != p.values_.size()) throw InvalidPotential("one gradient per grid node required");
    for (auto& g : *gradients)
      if (static_cast<int>(g.size()) != lat.dim) throw InvalidPotential("gradient needs n components");
    p.gradients_ = std::move(*gradients);
  }
  return p;
}

bool Potential::has_gradient() const { return kind_ != Kind::GridSampled || !gradients_.empty(); }

void Potential::check_in_cell(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd s = lattice_.to_lattice(y);
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (s(j) < -1e-12 || s(j) > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "point (" << y.transpose() << ") lies outside the cell";
      throw OutOfCell(os.str());
    }
}

Eigen::Index Potential::nearest_node(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd s = lattice_.to_lattice(y);
  Eigen::Index flat = 0;
  for (int d = 0; d < lattice_.dim; ++d) {
    const int r = grid_.resolution[d];
    const int i = std::clamp(static_cast<int>(std::floor(s(d) * r)), 0, r - 1);
    flat = flat * r + i;
  }
  return flat;
}

Eigen::MatrixXd Potential::eval(const Eigen::VectorXd& x) const {
  if (x.size() != lattice_.dim) throw std::invalid_argument("eval: point has wrong dimension");
  if (kind_ == Kind::GridSampled) {
    check_in_cell(x);
    const Eigen::Index i = nearest_node(x);
    Eigen::MatrixXd v = values_[i];
    if (!gradients_.empty()) {
      const Eigen::VectorXd dx = x - grid_.nodes.col(i);
      for (int j = 0; j < lattice_.dim; ++j) v += dx(j) * gradients_[i][j];
    }
    return v;
  }
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_, m_);
  for (const auto& t : terms_) {
    const double phase = (lattice_.A.transpose() * t.q.cast<double>()).dot(x);
    acc += t.coeff * std::exp(kI * phase);
  }
  return symmetrize(acc.real());
}

Eigen::MatrixXd Potential::eval_scaled(double t, const Eigen::VectorXd& x) const {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("eval_scaled: t must lie in (0, 1]");
  if (kind_ == Kind::GridSampled) check_in_cell(t * x);
  return t * t * eval(t * x);
}

std::vector<Eigen::MatrixXd> Potential::gradient(const Eigen::VectorXd& x) const {
  const int n = lattice_.dim;
  std::vector<Eigen::MatrixXd> g(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(m_, m_));
  if (kind_ == Kind::GridSampled) {
    if (gradients_.empty()) throw NoGradient("grid-sampled potential carries no gradients");
    check_in_cell(x);
    return gradients_[nearest_node(x)];
  }
  for (const auto& t : terms_) {
    const Eigen::VectorXd w = lattice_.A.transpose() * t.q.cast<double>();
    const cd e = std::exp(kI * w.dot(x));
    for (int j = 0; j < n; ++j) g[j] += symmetrize((t.coeff * (kI * w(j) * e)).real());
  }
  return g;
}

Eigen::MatrixXd Potential::radial_derivative_at(double t, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd y = t * x;
  Eigen::MatrixXd d = 2.0 * t * eval(y);
  const auto g = gradient(y);
  for (int j = 0; j < lattice_.dim; ++j) d += t * t * x(j) * g[j];
  return symmetrize(d);
}

double Potential::sup_norm_bound() const {
  if (kind_ != Kind::GridSampled) {
    double s = 0.0;
    for (const auto& t : terms_) s += spectral_norm(t.coeff);
    return s;
  }
  // Reconstruction moves at most half a grid cell away from a node.
  Eigen::VectorXd reach = Eigen::VectorXd::Zero(lattice_.dim);
  for (int j = 0; j < lattice_.dim; ++j)
    for (int k = 0; k < lattice_.dim; ++k)
      reach(j) += std::abs(lattice_.basis(j, k)) / (2.0 * grid_.resolution[k]);
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double v = spectral_norm(values_[i]);
    if (!gradients_.empty())
      for (int j = 0; j < lattice_.dim; ++j) v += reach(j) * spectral_norm(gradients_[i][j]);
    s = std::max(s, v);
  }
  return s;
}

Potential Potential::realify() const {
  Potential p = *this;
  p.m_ = 2 * m_;
  for (auto& t : p.terms_) t.coeff = kron_identity(t.coeff, 2);
  for (auto& v : p.values_) v = kron_identity(v, 2);
  for (auto& g : p.gradients_)
    for (auto& gj : g) gj = kron_identity(gj, 2);
  return p;
}

Eigen::MatrixXcd Potential::moment(double t, const Eigen::VectorXd& kappa, int r) const {
  if (kind_ == Kind::GridSampled) return quadrature_moment(t, kappa, r, false);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_, m_);
  for (const auto& term : terms_) {
    cd f = 1.0;
    for (int j = 0; j < lattice_.dim; ++j) f *= box_transform(kTwoPi * (t * term.q(j) + kappa(j)));
    acc += term.coeff * f;
  }
  return t * t * acc;
}

Eigen::MatrixXcd Potential::radial_moment(double t, const Eigen::VectorXd& kappa, int r) const {
  if (kind_ == Kind::GridSampled) return quadrature_moment(t, kappa, r, true);
  // d/dt of t^2 sum_p V̂(p) prod_j f(2 pi (t p_j + kappa_j)).
  const int n = lattice_.dim;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_, m_);
  std::vector<cd> f(static_cast<std::size_t>(n)), df(static_cast<std::size_t>(n));
  for (const auto& term : terms_) {
    cd prod = 1.0;
    for (int j = 0; j < n; ++j) {
      const double a = kTwoPi * (t * term.q(j) + kappa(j));
      f[j] = box_transform(a);
      df[j] = box_transform_derivative(a);
      prod *= f[j];
    }
    cd dprod = 0.0;
    for (int j = 0; j < n; ++j) {
      if (term.q(j) == 0) continue;
      cd p = kTwoPi * term.q(j) * df[j];
      for (int i = 0; i < n; ++i)
        if (i != j) p *= f[i];
      dprod += p;
    }
    acc += term.coeff * (2.0 * t * prod + t * t * dprod);
  }
  return acc;
}

Eigen::MatrixXcd Potential::quadrature_moment(double t, const Eigen::VectorXd& kappa, int r, bool radial) const {
  if (r <= 0) r = std::max(64, 4 * *std::max_element(grid_.resolution.begin(), grid_.resolution.end()));
  const CellGrid q = cell_grid(lattice_, r);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_, m_);
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const Eigen::VectorXd x = q.nodes.col(i);
    const Eigen::MatrixXd w = radial ? radial_derivative_at(t, x) : eval_scaled(t, x);
    acc += (q.weights(i) * std::exp(kI * (kTwoPi * kappa.dot(q.lattice_coords.col(i))))) * w.cast<cd>();
  }
  return acc / lattice_.cell_volume;
}

Eigen::MatrixXcd fourier_coeff(const Potential& V, double t, const Eigen::VectorXi& q, int quad_resolution) {
  return V.moment(t, -q.cast<double>(), quad_resolution);
}

RadialDerivative radial_derivative(const Potential& V, double t, const CellGrid& grid) {
  if (!V.has_gradient()) throw NoGradient("radial derivative needs gradients");
  RadialDerivative rd;
  rd.t = t;
  rd.min_eigenvalue = std::numeric_limits<double>::infinity();
  rd.max_eigenvalue = -std::numeric_limits<double>::infinity();
  rd.values.reserve(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    rd.values.push_back(V.radial_derivative_at(t, grid.nodes.col(i)));
    auto [lo, hi] = eig_range(rd.values.back());
    rd.min_eigenvalue = std::min(rd.min_eigenvalue, lo);
    rd.max_eigenvalue = std::max(rd.max_eigenvalue, hi);
  }
  return rd;
}

namespace {
HypothesisResult classify(double lo, double hi) {
  HypothesisResult h;
  h.min_eigenvalue = lo;
  h.max_eigenvalue = hi;
  if (lo > 0.0) {
    h.which = Hypothesis::PositiveDerivative;
    h.margin = lo;
  } else if (hi < 0.0) {
    h.which = Hypothesis::NegativeDerivative;
    h.margin = hi;
  } else {
    h.which = Hypothesis::Neither;
    h.margin = std::min(-lo, hi);
  }
  return h;
}
}  // namespace

HypothesisResult hypothesis_check(const Potential& V, const std::vector<double>& t_samples, const CellGrid& grid) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double t : t_samples) {
    RadialDerivative rd = radial_derivative(V, t, grid);
    lo = std::min(lo, rd.min_eigenvalue);
    hi = std::max(hi, rd.max_eigenvalue);
  }
  return classify(lo, hi);
}

HypothesisResult hypothesis_check_points(const Potential& V,
                                         const std::vector<std::pair<double, Eigen::VectorXd>>& pts) {
  if (!V.has_gradient()) throw NoGradient("hypothesis check needs gradients");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [t, x] : pts) {
    auto [a, b] = eig_range(V.radial_derivative_at(t, x));
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  return classify(lo, hi);
}

const char* to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::PositiveDerivative: return "iii";
    case Hypothesis::NegativeDerivative: return "iv";
    default: return "neither";
  }
}

}  // namespace maslov
