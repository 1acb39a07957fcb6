#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "maslov/config.hpp"
#include "maslov/spectral.hpp"

namespace maslov {

/// One conjugate point t* in [tau, 1].
struct CrossingEntry {
  double t = 0.0;          // Galerkin location
  double t_refined = 0.0;  // collocation location; equals t when not refined
  bool refined = false;    // forms evaluated on the collocation kernel
  int dim_complex = 0;
  int dim_real = 0;        // kernel dimension of the realified operator
  /// Eigenvalues (ascending) of the crossing form on the complex kernel,
  /// from the volume integral and from the boundary expression.  The
  /// boundary column is empty on non-rectangular cells.
  Eigen::VectorXd form_volume;
  Eigen::VectorXd form_boundary;
  Eigen::VectorXd slopes;  // eigenvalue slopes, ascending
  /// ||F_volume - F_boundary|| / ||F_volume|| for the form matrices.
  double formula_gap = 0.0;
  int signature = 0;       // complex signature of the volume form
  bool regular = true;     // no form eigenvalue within eps_form * ||F|| of 0
  bool slopes_agree = true;
  bool at_tau = false, at_one = false;
  int negative() const;
  int positive() const;
};

struct CrossingReport {
  double tau = 0.0;
  double lambda_inf = 0.0;
  std::vector<CrossingEntry> crossings;
  int morse_tau = 0, morse_one = 0;            // complex
  int morse_real_tau = 0, morse_real_one = 0;  // realified
  int morse_origin = 0;                        // negative eigenvalues of V(0)
  /// Realified Maslov index of the t-side: 2 * signature at interior
  /// crossings, -2 n_- at tau and +2 n_+ at 1.
  int maslov = 0;
  EigenFlow flow;

  bool all_regular() const;
  /// Sum of complex kernel dimensions over crossings with t in the range;
  /// `include_tau` / `include_one` decide the ends.
  int dim_sum(bool include_tau, bool include_one) const;
};

/// tau after the automatic reduction (halving, floor 1e-4).  With theta != 0
/// or Dirichlet conditions the target is Mor = 0 at tau; otherwise
/// Mor = Mor(V(0)) at tau and at tau / 2.  Returns cfg.tau when auto_tau is
/// off.  Throws HypothesisViolation if the floor is reached.
double choose_tau(const ExperimentConfig& cfg);

/// Galerkin crossings on [tau, 1], kernel dimensions for both fields, forms
/// and slopes at each crossing.  On axis-aligned cells with n <= 2 the forms
/// are evaluated on a Chebyshev collocation kernel.  Uses choose_tau.
CrossingReport scan_conjugate_points(const ExperimentConfig& cfg);

struct Check {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
  std::string note;
};

struct VerificationReport {
  std::string identity;
  std::vector<Check> checks;
  bool pass = false;
  /// Side-by-side ledger of a rectangle walk (empty otherwise).
  std::vector<std::pair<std::string, int>> ledger;
  CrossingReport scan;
  void add(std::string name, double lhs, double rhs, std::string note = {});
  void finish();
};

/// Maslov indices of the four sides of [lambda_inf, 0] x [tau, 1], traversed
/// lambda up at tau, t up at 0, lambda down at 1, t down at lambda_inf.  For
/// n = 1 every side is shot independently; otherwise the lambda sides come
/// from eigenvalue counts and the t side from the scan.  With `strict` a
/// nonzero total throws SumViolation.
VerificationReport rectangle_walk(const ExperimentConfig& cfg, bool strict = false);

/// Names accepted by verify_identity.
const std::vector<std::string>& identity_names();

/// Checks one index identity with both sides computed independently.
/// Throws HypothesisViolation when the identity's assumptions fail and
/// UnresolvedCrossing when a crossing form is degenerate.
VerificationReport verify_identity(const ExperimentConfig& cfg, const std::string& identity);

}  // namespace maslov
