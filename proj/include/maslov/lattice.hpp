#pragma once

#include <Eigen/Dense>
#include <vector>

namespace maslov {

/// Lattice generated by the columns a_j of `basis`, with the matrix A fixed by
/// A a_j = 2*pi e_j and dual vectors b_j = A^T e_j.  The unit cell
/// Q = { sum t_j a_j : 0 <= t_j <= 1 } is anchored at the origin.
struct Lattice {
  int dim = 0;
  Eigen::MatrixXd basis;  // column j is a_j
  Eigen::MatrixXd A;
  Eigen::MatrixXd dual;   // column j is b_j
  double cell_volume = 0.0;

  /// x = sum_j s_j a_j.
  Eigen::VectorXd to_cartesian(const Eigen::VectorXd& lattice_coords) const;
  Eigen::VectorXd to_lattice(const Eigen::VectorXd& x) const;

  /// True when every a_j is parallel to e_j, i.e. Q is an axis-aligned box.
  bool is_rectangular(double tol = 1e-12) const;
  /// Side lengths |a_j|; only meaningful for rectangular cells.
  Eigen::VectorXd side_lengths() const;
};

Lattice build_lattice(const std::vector<Eigen::VectorXd>& basis);
Lattice build_lattice(const Eigen::MatrixXd& basis_columns);
/// Axis-aligned box with the given side lengths.
Lattice rectangular_lattice(const std::vector<double>& sides);

/// ||A^T (theta - k)||^2, the eigenvalue of the theta-periodic Laplacian on Q
/// belonging to the plane wave with integer label k.
double laplace_eigenvalue(const Lattice& lat, const Eigen::VectorXd& theta,
                          const Eigen::VectorXi& k);

/// Midpoint-rule tensor grid over Q in lattice coordinates.
struct CellGrid {
  std::vector<int> resolution;
  Eigen::MatrixXd lattice_coords;  // n x N
  Eigen::MatrixXd nodes;           // n x N, cartesian
  Eigen::VectorXd weights;         // sum = |Q|
  Eigen::Index size() const { return weights.size(); }
};

/// Midpoint grid on the face dQ_j^s = { t_j = s }.
struct FaceGrid {
  int axis = 0;  // j, zero based
  int side = 0;  // s in {0, 1}
  Eigen::MatrixXd nodes;       // n x N
  Eigen::VectorXd weights;     // sum = face area
  Eigen::VectorXd normal;      // outward unit normal
  Eigen::VectorXd x_dot_normal;  // (x, nu) per node
  double area = 0.0;
  Eigen::Index size() const { return weights.size(); }
};

CellGrid cell_grid(const Lattice& lat, const std::vector<int>& resolution);
CellGrid cell_grid(const Lattice& lat, int resolution_per_axis);
FaceGrid face_grid(const Lattice& lat, int axis, int side, int resolution_per_axis);
/// All 2n faces, ordered (j=0,s=0), (j=0,s=1), (j=1,s=0), ...
std::vector<FaceGrid> boundary_grids(const Lattice& lat, int resolution_per_axis);

}  // namespace maslov
