#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace maslov {

/// Real symplectic space R^{2N} with omega(u, v) = (J u, v).
struct SymplecticSpace {
  int N = 0;
  Eigen::MatrixXd J;

  /// J = [[0, -I], [I, 0]].
  static SymplecticSpace canonical(int N);
  /// Validates J^2 = -I and J^T = -J to 1e-12.
  static SymplecticSpace from_J(const Eigen::MatrixXd& J);

  int real_dim() const { return 2 * N; }
  double omega(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return (J * u).dot(v); }
};

/// 2N x N frame with orthonormal columns spanning a Lagrangian subspace.
struct LagrangianFrame {
  Eigen::MatrixXd X;
  Eigen::Index N() const { return X.cols(); }
};

/// Orthonormalizes the columns of `span` (QR) and checks that the result is
/// Lagrangian; throws NotLagrangian otherwise.
LagrangianFrame make_frame(const SymplecticSpace& S, const Eigen::MatrixXd& span, double tol = 1e-10);
bool is_lagrangian(const SymplecticSpace& S, const Eigen::MatrixXd& X, double tol = 1e-10);

/// Identification R^{2N} ~ C^N attached to a Lagrangian X: u -> X^T u + i (JX)^T u.
/// J acts as multiplication by i and the map is an isometry.
struct ComplexStructure {
  Eigen::MatrixXd X, JX;
  Eigen::VectorXcd to_complex(const Eigen::VectorXd& u) const;
  Eigen::VectorXd to_real(const Eigen::VectorXcd& z) const;
  /// Complex coordinates of the columns of a frame.
  Eigen::MatrixXcd coordinates(const Eigen::MatrixXd& Y) const;
};

ComplexStructure complexify(const SymplecticSpace& S, const LagrangianFrame& X);

/// S_X(Y) = (I - 2P_Y)(2P_X - I) as an N x N unitary in the coordinates of
/// complexify(S, X).
Eigen::MatrixXcd souriau(const SymplecticSpace& S, const LagrangianFrame& X, const LagrangianFrame& Y);

/// Eigenphases psi = arg(-lambda) in (-pi, pi] of a unitary, ascending; psi = 0
/// is the eigenvalue -1.
Eigen::VectorXd souriau_phases(const Eigen::MatrixXcd& U);

/// dim (X cap Y) from the singular values of (JX)^T Y.
int intersection_dim(const SymplecticSpace& S, const LagrangianFrame& X, const LagrangianFrame& Y, double tol = 1e-8);

struct UnitaryPath {
  std::vector<double> t;
  std::vector<Eigen::MatrixXcd> u;
  std::vector<Eigen::VectorXd> phases;
};

/// Path of Lagrangian frames on [a, b].
using FramePath = std::function<Eigen::MatrixXd(double)>;

UnitaryPath unitary_path(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y,
                         const std::vector<double>& t_grid);

struct SpectralFlowOptions {
  int initial_segments = 16;
  int refine_cap = 30;
  /// Eigenphases within this distance of -1 count as sitting on it.
  double eta = 1e-9;
};

/// Spectral flow of a precomputed unitary path through -1 (counter-clockwise
/// positive).  Throws NoGapFound when a segment admits no gap phase.
int maslov_spectral_flow(const UnitaryPath& path, const SpectralFlowOptions& opts = {});
/// Adaptive version: the partition is refined until every segment has a gap.
int maslov_spectral_flow(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y, double a, double b,
                         const SpectralFlowOptions& opts = {});

struct CrossingDatum {
  double t = 0.0;
  Eigen::MatrixXd intersection;  // 2N x d orthonormal basis of Y(t) cap X
  Eigen::MatrixXd form;          // d x d symmetric
  int n_plus = 0, n_minus = 0;
  bool regular = true;
  int signature() const { return n_plus - n_minus; }
  int dim() const { return static_cast<int>(form.rows()); }
};

struct CrossingFormOptions {
  double delta = 1e-4;
  double eps_form_rel = 1e-6;
  double intersection_tol = 1e-7;
  /// Parameter domain of the path; differences never leave it.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  /// When false a degenerate form is returned with regular = false instead
  /// of throwing NonRegular.
  bool throw_on_nonregular = true;
};

/// Crossing form Q(u, v) = omega(u, dB/dt v) on Y(t*) cap X, where B_s is the
/// graph operator of Y(s) over Y(t*).  Finite differences with Richardson
/// extrapolation; one-sided at the domain ends.
CrossingDatum crossing_form(const SymplecticSpace& S, const FramePath& Y, double t_star, const LagrangianFrame& X,
                            const CrossingFormOptions& opts = {});

struct CrossingScanOptions {
  int grid_points = 64;
  double t_tol = 1e-10;
  /// Maximum chord movement of the unitary between adjacent scan points.
  double max_step_change = 0.1;
  int refine_cap = 20;
  CrossingFormOptions form;
};

struct CrossingFormsResult {
  int maslov = 0;
  std::vector<CrossingDatum> crossings;
};

/// Locates the crossings of Y on [a, b] and sums their signatures with the
/// endpoint conventions: +n_plus at b, -n_minus at a.
CrossingFormsResult maslov_crossing_forms(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y,
                                          double a, double b, const CrossingScanOptions& opts = {});

/// Locations of crossings on [a, b] (sign changes of the Souriau eigenphase
/// nearest -1, confirmed by the intersection dimension).
std::vector<double> locate_crossings(const SymplecticSpace& S, const LagrangianFrame& X, const FramePath& Y, double a,
                                     double b, const CrossingScanOptions& opts = {});

/// Haar-distributed unitary (QR of a complex Gaussian matrix with phase fix).
Eigen::MatrixXcd haar_unitary(int N, std::mt19937_64& rng);
/// Frame [Re U; Im U] in the canonical space; Lagrangian for unitary U.
Eigen::MatrixXd frame_from_unitary(const Eigen::MatrixXcd& U);

}  // namespace maslov
