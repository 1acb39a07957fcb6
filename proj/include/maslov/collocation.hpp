#pragma once

#include <Eigen/Dense>
#include <functional>

#include "maslov/potential.hpp"
#include "maslov/spectral.hpp"

namespace maslov {

/// Value and gradient of a field at a point.
using FieldSampler = std::function<FieldSample(const Eigen::VectorXd&)>;

/// Kernel of -Delta_bc + t^2 V(t x) resolved on a Chebyshev-Lobatto tensor
/// grid, used where boundary values and gradients must be accurate.
struct RefinedKernel {
  double t = 0.0;
  /// Nodal values, one column per kernel vector (complex m-vectors, node
  /// index fastest within each component block).  L2-orthonormal.
  Eigen::MatrixXcd values;
  Eigen::VectorXcd eigenvalues;  // collocation eigenvalues of the kernel vectors
  int dim() const { return static_cast<int>(values.cols()); }
};

/// Chebyshev collocation of the boundary value problem on an axis-aligned
/// box, n <= 2.  Boundary rows replace the differential equation at the
/// boundary nodes; corners take the conditions of the first axis.
class ChebyshevCollocation {
public:
  /// Takes bc, theta, lattice and m from `basis`; N + 1 nodes per axis.
  ChebyshevCollocation(const BasisSpec& basis, int N);

  int nodes_per_axis() const { return N_ + 1; }
  Eigen::Index node_count() const { return P_; }

  /// Schur complement of the collocation matrix on the interior unknowns.
  Eigen::MatrixXcd reduced_operator(const Potential& V, double t) const;

  /// Locates the nearby t where `dim` collocation eigenvalues vanish
  /// (secant on the real part of the eigenvalue nearest zero, starting from
  /// `t_guess`) and returns the L2-orthonormal kernel there.
  RefinedKernel refine(const Potential& V, double t_guess, int dim, double t_tol = 1e-13) const;

  /// Barycentric interpolation of nodal data (value and gradient).
  FieldSample sample(const Eigen::VectorXcd& nodal, const Eigen::VectorXd& x) const;
  FieldSampler sampler(const Eigen::VectorXcd& nodal) const;

  /// Physical coordinates of node p.
  Eigen::VectorXd node(Eigen::Index p) const;

private:
  Eigen::MatrixXcd full_matrix(const Potential& V, double t) const;
  Eigen::VectorXcd lift(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& interior) const;
  void ritz(const Eigen::MatrixXcd& L, int k, Eigen::VectorXcd& mu, Eigen::MatrixXcd& vecs) const;

  BasisSpec basis_;
  int N_ = 0, n_ = 0, m_ = 1;
  Eigen::Index P_ = 0;
  std::vector<Eigen::VectorXd> x_;  // nodes per axis
  std::vector<Eigen::MatrixXd> D_;  // first-derivative matrices on the full grid, per axis
  std::vector<Eigen::VectorXd> w_;  // Clenshaw-Curtis weights per axis
  Eigen::VectorXd bary_;            // barycentric weights
  // Row `row` becomes f(hi) - e f(lo) = 0 with f = u or d_axis u, where e is
  // the Bloch phase of the axis (0 for Dirichlet / Neumann, lo = hi there).
  struct BoundaryRow {
    Eigen::Index row = 0, lo = 0, hi = 0;
    int axis = 0;
    bool derivative = false;
  };
  std::vector<BoundaryRow> rows_;
  std::vector<Eigen::Index> interior_, boundary_;  // scalar node indices
};

/// Hermitian matrix [int_Q (u_a, D_t u_b) dx] with D_t = d/dt (t^2 V(t x)),
/// by tensor Gauss-Legendre quadrature (`panels` panels of 30 points per axis).
Eigen::MatrixXcd volume_form(const std::vector<FieldSampler>& u, const Potential& V, double t, int panels = 2);

/// Polarized boundary expression for the same form on a rectangular cell:
/// t Re int (x,nu)(u, V(t x) u) + t^-1 int (x,nu)|grad u|^2
///   - 2 t^-1 Re int (grad u x, grad u nu), summed over the faces.
/// Throws UnsupportedLattice for non-rectangular cells.
Eigen::MatrixXcd boundary_form(const std::vector<FieldSampler>& u, const Potential& V, double t, int panels = 2);

/// Diagonal of boundary_form for one field.
double boundary_form_value(const FieldSampler& u, const Potential& V, double t, int panels = 2);

}  // namespace maslov
