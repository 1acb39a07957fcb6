#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "maslov/lattice.hpp"

namespace maslov {

/// One term V̂(q) e^{i A^T q . x} of a trigonometric matrix polynomial.
struct FourierTerm {
  Eigen::VectorXi q;
  Eigen::MatrixXcd coeff;
};

/// Symmetric, real, matrix-valued potential on the cell Q of a lattice.
///
/// Three variants share one interface: a constant matrix, a finite Fourier
/// series, and values (optionally with gradients) sampled on a CellGrid.
/// The scaled family is V_t(x) = t^2 V(t x); because Q is anchored at the
/// origin, t x stays in Q for x in Q and t in (0, 1].
class Potential {
public:
  enum class Kind { Constant, FourierPolynomial, GridSampled };

  static Potential constant(const Lattice& lat, const Eigen::MatrixXd& S);
  static Potential fourier(const Lattice& lat, int m, std::vector<FourierTerm> terms);
  /// values[i] (and gradients[i][j] = d_j V) belong to grid node i.
  static Potential grid_sampled(const Lattice& lat, CellGrid grid,
                                std::vector<Eigen::MatrixXd> values,
                                std::optional<std::vector<std::vector<Eigen::MatrixXd>>> gradients = {});

  Kind kind() const { return kind_; }
  int m() const { return m_; }
  int dim() const { return lattice_.dim; }
  const Lattice& lattice() const { return lattice_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }
  bool has_gradient() const;

  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd eval_scaled(double t, const Eigen::VectorXd& x) const;
  /// Partial derivatives d_j V(x), j = 0..n-1.
  std::vector<Eigen::MatrixXd> gradient(const Eigen::VectorXd& x) const;
  /// D_t(x) = 2 t V(t x) + t^2 (grad V)(t x) . x, the t-derivative of V_t.
  Eigen::MatrixXd radial_derivative_at(double t, const Eigen::VectorXd& x) const;

  /// Upper bound for sup_x ||V(x)||_2 (exact for constants).
  double sup_norm_bound() const;
  /// V at the origin corner.
  Eigen::MatrixXd value_at_origin() const { return eval(Eigen::VectorXd::Zero(dim())); }

  /// V (x) I_2, the realified potential of block size 2m.
  Potential realify() const;

  /// (1/|Q|) int_Q t^2 V(t x) e^{2 pi i kappa . s(x)} dx, where s(x) are the
  /// lattice coordinates of x and kappa is any real frequency vector.
  /// Closed form for Constant and FourierPolynomial; quadrature on a grid
  /// with `quad_resolution` points per axis for GridSampled.
  Eigen::MatrixXcd moment(double t, const Eigen::VectorXd& kappa, int quad_resolution = 0) const;
  /// Same moment for D_t in place of t^2 V(t x).
  Eigen::MatrixXcd radial_moment(double t, const Eigen::VectorXd& kappa, int quad_resolution = 0) const;

private:
  Potential() = default;
  void check_in_cell(const Eigen::VectorXd& y) const;
  Eigen::Index nearest_node(const Eigen::VectorXd& y) const;
  Eigen::MatrixXcd quadrature_moment(double t, const Eigen::VectorXd& kappa, int r, bool radial) const;

  Kind kind_ = Kind::Constant;
  int m_ = 0;
  Lattice lattice_;
  std::vector<FourierTerm> terms_;  // Constant and FourierPolynomial
  CellGrid grid_;                   // GridSampled
  std::vector<Eigen::MatrixXd> values_;
  std::vector<std::vector<Eigen::MatrixXd>> gradients_;
};

/// Ŵ(q) = (1/|Q|) int_Q t^2 V(t x) e^{-i A^T q . x} dx.  `quad_resolution` is
/// used only for GridSampled potentials.
Eigen::MatrixXcd fourier_coeff(const Potential& V, double t, const Eigen::VectorXi& q,
                               int quad_resolution = 0);

struct RadialDerivative {
  double t = 0.0;
  std::vector<Eigen::MatrixXd> values;  // D_t at each grid node
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

RadialDerivative radial_derivative(const Potential& V, double t, const CellGrid& grid);

enum class Hypothesis { PositiveDerivative, NegativeDerivative, Neither };

struct HypothesisResult {
  Hypothesis which = Hypothesis::Neither;
  /// min eig D_t for PositiveDerivative, max eig for NegativeDerivative; for
  /// Neither, the smaller of |min| and |max| with the sign of the violation.
  double margin = 0.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

HypothesisResult hypothesis_check(const Potential& V, const std::vector<double>& t_samples,
                                  const CellGrid& grid);
/// Same test at an explicit list of points (t, x).
HypothesisResult hypothesis_check_points(const Potential& V,
                                         const std::vector<std::pair<double, Eigen::VectorXd>>& pts);

const char* to_string(Hypothesis h);

}  // namespace maslov
