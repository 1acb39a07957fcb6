#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maslov/potential.hpp"
#include "maslov/spectral.hpp"

namespace maslov {

/// Everything one run needs.  Loaded from an INI file with the sections
/// [lattice], [potential], [bc], [solver], [tolerances] and [output]; see
/// README.md for the keys.
struct ExperimentConfig {
  // [lattice]
  Eigen::MatrixXd lattice_basis;  // columns a_j

  // [potential]
  int m = 1;
  enum class PotentialKind { Constant, Fourier } potential_kind = PotentialKind::Constant;
  Eigen::MatrixXd constant;        // m x m, Constant
  std::vector<FourierTerm> terms;  // Fourier

  // [bc]
  Boundary bc = Boundary::Theta;
  Eigen::VectorXd theta;

  // [solver]
  Field field = Field::Complex;
  int K = 16;
  double tau = 0.05;
  bool auto_tau = true;
  int t_grid = 0;         // 0: default grid of the crossing search
  int collocation_n = 0;  // 0: default nodes per axis for the refined kernel
  std::string identity;   // used by `verify`

  // [tolerances]
  std::optional<double> eps_ker;
  double eps_form = 1e-6;
  double t_tol = 1e-10;

  unsigned seed = 0;

  // [output]
  std::string output_dir = ".";
  std::string prefix = "maslov";

  Lattice lattice() const;
  Potential potential() const;
  /// Basis with the configured field.
  BasisSpec basis() const;
  /// Same basis with the given field.
  BasisSpec basis(Field f) const;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses an INI file; `overrides` are (section.key, value) pairs applied on
/// top of the file.  Throws ConfigError.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace maslov
