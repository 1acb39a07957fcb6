#pragma once

#include <Eigen/Dense>

namespace maslov {

/// A (x) I_k for real or complex A.
template <typename Derived>
auto kron_identity(const Eigen::MatrixBase<Derived>& a, Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(a.rows() * k, a.cols() * k);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index d = 0; d < k; ++d) out(i * k + d, j * k + d) = a(i, j);
  return out;
}

/// Smallest and largest eigenvalue of a symmetric matrix.
inline std::pair<double, double> eig_range(const Eigen::MatrixXd& s) {
  if (s.rows() == 1) return {s(0, 0), s(0, 0)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(s.rows() - 1)};
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace maslov
