#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "maslov/lattice.hpp"
#include "maslov/potential.hpp"

namespace maslov {

enum class Boundary { Theta, Dirichlet, Neumann };
enum class Field { Complex, Realified };

const char* to_string(Boundary b);
const char* to_string(Field f);

/// Truncated eigenbasis of the boundary-value Laplacian.
///
/// Theta: plane waves |Q|^{-1/2} e^{i A^T(theta-k).x}, |k_j| <= K.
/// Dirichlet / Neumann: sine / cosine products on an axis-aligned box,
/// 1 <= k_j <= K and 0 <= k_j <= K respectively.
/// For the realified field every complex mode k, block l yields the real
/// pair (phi_{k,l}, psi_{k,l}); all phi come first, then all psi.
struct BasisSpec {
  Boundary bc = Boundary::Theta;
  Eigen::VectorXd theta;  // used for Theta only
  int K = 0;
  Lattice lattice;
  int m = 1;
  Field field = Field::Complex;
  /// Scale alpha in alpha(-Delta) + V; 1 for the operators of the theory.
  double laplace_scale = 1.0;

  void validate() const;
  /// Scalar mode labels in assembly order.
  std::vector<Eigen::VectorXi> modes() const;
  /// Eigenvalue of -Delta (without laplace_scale) belonging to a mode label.
  double free_eigenvalue(const Eigen::VectorXi& k) const;
  /// Matrix dimension: modes * m, doubled for the realified field.
  Eigen::Index size() const;
  /// Number of real components of a field value: m, or 2m when realified.
  int components() const { return field == Field::Realified ? 2 * m : m; }
  /// Minimal quadrature resolution per axis for grid-sampled potentials.
  int min_resolution() const { return 2 * (2 * K + 1); }
};

struct GalerkinOperator {
  BasisSpec basis;
  double t = 1.0;
  double lambda_shift = 0.0;
  int assembly_resolution = 0;
  Eigen::MatrixXcd H;
  Eigen::VectorXd laplace_diagonal;  // alpha * free eigenvalue per row
  bool is_real() const;
};

/// Galerkin matrix of alpha(-Delta_bc) + t^2 V(t x) - lambda_shift.
/// `assembly_resolution` is the quadrature resolution used for grid-sampled
/// potentials (0 picks 2 * min_resolution()).
GalerkinOperator assemble(const BasisSpec& basis, const Potential& V, double t, double lambda_shift = 0.0,
                          int assembly_resolution = 0);
/// Galerkin matrix of D_t = d/dt (t^2 V(t x)) in the same basis.
Eigen::MatrixXcd assemble_radial(const BasisSpec& basis, const Potential& V, double t, int assembly_resolution = 0);

struct SpectralResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors;  // columns, orthonormal
  double eps_ker = 0.0;
  int morse_index = 0;
  int kernel_dim = 0;
};

/// Default kernel tolerance 1e-8 * max(1, spectral radius).
double default_eps_ker(const Eigen::VectorXd& eigenvalues);

/// Dense Hermitian eigendecomposition with deterministic phases: the first
/// component of each eigenvector above 1e-8 of its largest entry is made
/// real and positive.  Throws BoundaryAmbiguity when an eigenvalue sits
/// within eps_ker / 10 of -eps_ker.
SpectralResult eigendecompose(const GalerkinOperator& op, std::optional<double> eps_ker = {});
SpectralResult eigendecompose(const Eigen::MatrixXcd& H, std::optional<double> eps_ker = {});

int morse_index(const SpectralResult& r);
int kernel_dim(const SpectralResult& r);

/// Morse index of the complex (or realified) operator at (t, lambda = 0).
int morse_count(const BasisSpec& basis, const Potential& V, double t, std::optional<double> eps_ker = {});

struct FlowOptions {
  /// Number of tracked curves; 0 tracks every eigenvalue that can reach zero.
  int tracked = 0;
  double min_overlap = 0.7;
  int refine_cap = 6;
  /// Relative width used to group nearly equal eigenvalues into clusters.
  double cluster_tol = 1e-7;
};

struct EigenFlow {
  std::vector<double> t;
  /// curves(i, j) = lambda_j(t_i) with curves matched by eigenvector overlap.
  Eigen::MatrixXd curves;
  /// Best overlap of the worst matched curve on step i -> i+1.
  std::vector<double> overlap_quality;
  std::vector<bool> flagged;
};

EigenFlow eigen_flow(const BasisSpec& basis, const Potential& V, const std::vector<double>& t_grid,
                     const FlowOptions& opts = {});

/// Number of eigenvalues that can possibly cross zero for t in (0, 1].
int crossing_candidates(const BasisSpec& basis, const Potential& V);

/// A zero of the lowest eigenvalues located in t.
struct ZeroCrossing {
  double t = 0.0;
  int dim = 0;                     // kernel dimension at t
  Eigen::MatrixXcd kernel;          // orthonormal kernel basis (coefficients)
  Eigen::VectorXd kernel_eigenvalues;
  Eigen::VectorXd slopes;           // d lambda / dt of the kernel branches, ascending
};

struct CrossingSearchOptions {
  double t_tol = 1e-10;
  int grid_points = 0;  // 0 selects a grid from the eigenvalue speed bound
  std::optional<double> eps_ker;
  double slope_step = 1e-5;
  /// Roots closer than this are reported as one crossing.
  double cluster_window = 1e-6;
};

/// Zeros of eigenvalue curves on [t0, t1], located by flow tracking and
/// bracketed root finding.  Crossings found at the ends are included.  The
/// tracked curves are copied to `flow_out` when given.
std::vector<ZeroCrossing> find_zero_crossings(const BasisSpec& basis, const Potential& V, double t0, double t1,
                                              const CrossingSearchOptions& opts = {}, EigenFlow* flow_out = nullptr);

/// Kernel data at a given t (dimension counted with eps_ker).
ZeroCrossing kernel_at(const BasisSpec& basis, const Potential& V, double t, const CrossingSearchOptions& opts = {});

/// Value and gradient of the field with the given basis coefficients.
struct FieldSample {
  Eigen::VectorXcd value;     // components()
  Eigen::MatrixXcd gradient;  // components() x n
};
FieldSample reconstruct(const BasisSpec& basis, const Eigen::VectorXcd& coeffs, const Eigen::VectorXd& x);

/// Converts realified coefficients back to complex ones (phi + i psi pairing).
Eigen::VectorXcd complexify_coefficients(const BasisSpec& realified, const Eigen::VectorXcd& coeffs);

}  // namespace maslov
