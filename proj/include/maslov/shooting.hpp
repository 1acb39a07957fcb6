#pragma once

#include <Eigen/Dense>
#include <vector>

#include "maslov/potential.hpp"
#include "maslov/spectral.hpp"
#include "maslov/symplectic.hpp"

namespace maslov {

// One-dimensional boundary traces.  Real coordinates are ordered
// (u(0), u(a1), u'(0), u'(a1)), each block realified to 2m entries
// (x1, y1, x2, y2, ...).

/// Trace space of real dimension 8m with
/// omega(z, w) = <z_u1, w_p1> - <z_p1, w_u1> - <z_u0, w_p0> + <z_p0, w_u0>.
SymplecticSpace trace_space(int m);

/// Lagrangian plane of the boundary condition in the trace space.
/// Theta: {(a, M a, b, M b)} with M = I_m (x) R(2 pi theta); Dirichlet:
/// {(0, 0, b, c)}; Neumann: {(a, b, 0, 0)}.
LagrangianFrame reference_plane(Boundary bc, double theta, int m);

struct SolutionBundle {
  double t = 0.0, lambda = 0.0;
  int steps = 0;
  /// 8m x 4m traces of the realified fundamental solutions.
  Eigen::MatrixXd traces;
  /// Largest trace change between `steps` and 2 * `steps`.
  double richardson_error = 0.0;
};

/// Fundamental solutions of -u'' + (t^2 V(t x) - lambda) u = 0 on [0, a1]
/// (classical RK4, initial data identity on (u(0), u'(0))), compared with a
/// run at twice the steps.  The finer run is returned.
/// Throws StepTooCoarse if the two runs differ by more than `tol`.
SolutionBundle fundamental_solutions(const Potential& V, double t, double lambda, int steps, double tol = 1e-7);

/// Smallest step count (doubling from `start`, at most `cap`) passing the
/// Richardson check at every t in `t_probe`.
int choose_steps(const Potential& V, const std::vector<double>& t_probe, double lambda = 0.0, int start = 128,
                 int cap = 1 << 16, double tol = 1e-7);

enum class Route { SpectralFlow, CrossingForms };
const char* to_string(Route r);

struct ShootingCrossing {
  double t = 0.0;
  int dim_real = 0;
  int signature = 0;
  bool regular = true;
  Eigen::MatrixXd form;         // finite-difference crossing form
  Eigen::MatrixXd closed_form;  // a1 (t Re(u, V(t a1) u) - |u'(a1)|^2 / t) on the same basis
  /// ||form - closed_form|| / ||closed_form||.
  double relative_gap = 0.0;
};

struct Maslov1dOptions {
  double theta = 0.0;
  int steps = 0;  // 0: choose_steps on the t grid
  double lambda = 0.0;  // spectral shift for t-paths
  CrossingScanOptions scan;
  SpectralFlowOptions flow;
};

struct Maslov1dResult {
  int maslov = 0;
  int steps = 0;
  std::vector<ShootingCrossing> crossings;
};

/// Maslov index of t -> traces of ker(-d^2/dx^2 + V_t - lambda) on [tau, 1] against the
/// reference plane of `bc`, realified.  Requires n = 1.
Maslov1dResult maslov_1d(const Potential& V, Boundary bc, double tau, Route route, const Maslov1dOptions& opts = {});

/// Same along lambda at fixed t: lambda -> traces of ker(-d^2/dx^2 + V_t - lambda)
/// on [lambda0, lambda1].
Maslov1dResult maslov_1d_lambda(const Potential& V, Boundary bc, double t, double lambda0, double lambda1, Route route,
                                const Maslov1dOptions& opts = {});

}  // namespace maslov
