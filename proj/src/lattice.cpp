#include "maslov/lattice.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "maslov/errors.hpp"

namespace maslov {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Visits every multi-index of a tensor grid in row-major order (last axis fastest).
template <typename F>
void for_each_multi_index(const std::vector<int>& extent, F&& f) {
  const std::size_t n = extent.size();
  std::vector<int> idx(n, 0);
  long total = 1;
  for (int e : extent) total *= e;
  for (long flat = 0; flat < total; ++flat) {
    f(flat, idx);
    for (std::size_t d = n; d-- > 0;) {
      if (++idx[d] < extent[d]) break;
      idx[d] = 0;
    }
  }
}
}  // namespace

Eigen::VectorXd Lattice::to_cartesian(const Eigen::VectorXd& s) const { return basis * s; }

Eigen::VectorXd Lattice::to_lattice(const Eigen::VectorXd& x) const {
  return A * x / kTwoPi;
}

bool Lattice::is_rectangular(double tol) const {
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i)
      if (i != j && std::abs(basis(i, j)) > tol * basis.col(j).norm()) return false;
  return true;
}

Eigen::VectorXd Lattice::side_lengths() const {
  Eigen::VectorXd l(dim);
  for (int j = 0; j < dim; ++j) l(j) = basis.col(j).norm();
  return l;
}

Lattice build_lattice(const Eigen::MatrixXd& cols) {
  if (cols.rows() != cols.cols() || cols.rows() < 1)
    throw SingularBasis("basis must be n vectors in R^n with n >= 1");
  const int n = static_cast<int>(cols.rows());
  double max_norm = 0.0;
  for (int j = 0; j < n; ++j) max_norm = std::max(max_norm, cols.col(j).norm());
  const double det = cols.determinant();
  if (!(std::abs(det) >= 1e-12 * std::pow(max_norm, n)) || max_norm == 0.0) {
    std::ostringstream os;
    os << "|det| = " << std::abs(det) << " below 1e-12 * (max column norm)^n";
    throw SingularBasis(os.str());
  }
  Lattice lat;
  lat.dim = n;
  lat.basis = cols;
  // A a_j = 2 pi e_j  <=>  A * basis = 2 pi I.
  lat.A = kTwoPi * cols.fullPivLu().inverse();
  lat.dual = lat.A.transpose();
  lat.cell_volume = std::abs(det);
  return lat;
}

Lattice build_lattice(const std::vector<Eigen::VectorXd>& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  if (n == 0) throw SingularBasis("empty basis");
  Eigen::MatrixXd cols(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (basis[j].size() != n) throw SingularBasis("basis vectors must have length n");
    cols.col(j) = basis[j];
  }
  return build_lattice(cols);
}

Lattice rectangular_lattice(const std::vector<double>& sides) {
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sides.size()),
                                               static_cast<Eigen::Index>(sides.size()));
  for (std::size_t j = 0; j < sides.size(); ++j) cols(j, j) = sides[j];
  return build_lattice(cols);
}

double laplace_eigenvalue(const Lattice& lat, const Eigen::VectorXd& theta,
                          const Eigen::VectorXi& k) {
  const Eigen::VectorXd w = lat.A.transpose() * (theta - k.cast<double>());
  return w.squaredNorm();
}

CellGrid cell_grid(const Lattice& lat, const std::vector<int>& resolution) {
  if (static_cast<int>(resolution.size()) != lat.dim)
    throw std::invalid_argument("cell_grid: one resolution per axis required");
  long total = 1;
  for (int r : resolution) {
    if (r < 2) throw std::invalid_argument("cell_grid: resolution must be >= 2");
    total *= r;
  }
  CellGrid g;
  g.resolution = resolution;
  g.lattice_coords.resize(lat.dim, total);
  g.weights = Eigen::VectorXd::Constant(total, lat.cell_volume / static_cast<double>(total));
  for_each_multi_index(resolution, [&](long flat, const std::vector<int>& idx) {
    for (int d = 0; d < lat.dim; ++d)
      g.lattice_coords(d, flat) = (idx[d] + 0.5) / resolution[d];
  });
  g.nodes = lat.basis * g.lattice_coords;
  return g;
}

CellGrid cell_grid(const Lattice& lat, int r) {
  return cell_grid(lat, std::vector<int>(static_cast<std::size_t>(lat.dim), r));
}

FaceGrid face_grid(const Lattice& lat, int axis, int side, int r) {
  if (axis < 0 || axis >= lat.dim || (side != 0 && side != 1))
    throw std::invalid_argument("face_grid: bad face index");
  if (r < 2 && lat.dim > 1) throw std::invalid_argument("face_grid: resolution must be >= 2");
  FaceGrid f;
  f.axis = axis;
  f.side = side;
  const Eigen::VectorXd b = lat.dual.col(axis);
  f.normal = (side == 1 ? 1.0 : -1.0) * b / b.norm();
  // |Q| = area_j * height_j with height_j = a_j . b_j / |b_j| = 2 pi / |b_j|.
  f.area = lat.dim == 1 ? 1.0 : lat.cell_volume * b.norm() / kTwoPi;

  std::vector<int> extent;
  for (int d = 0; d < lat.dim; ++d)
    if (d != axis) extent.push_back(r);
  long total = 1;
  for (int e : extent) total *= e;
  Eigen::MatrixXd s(lat.dim, total);
  for_each_multi_index(extent, [&](long flat, const std::vector<int>& idx) {
    int c = 0;
    for (int d = 0; d < lat.dim; ++d)
      s(d, flat) = d == axis ? static_cast<double>(side) : (idx[c++] + 0.5) / r;
  });
  f.nodes = lat.basis * s;
  f.weights = Eigen::VectorXd::Constant(total, f.area / static_cast<double>(total));
  f.x_dot_normal = f.nodes.transpose() * f.normal;
  if (side == 0) f.x_dot_normal.setZero();  // exact: the face contains the origin
  return f;
}

std::vector<FaceGrid> boundary_grids(const Lattice& lat, int r) {
  std::vector<FaceGrid> out;
  for (int j = 0; j < lat.dim; ++j)
    for (int s = 0; s < 2; ++s) out.push_back(face_grid(lat, j, s, r));
  return out;
}

}  // namespace maslov
