#pragma once

#include <optional>

#include "nhk/types.hpp"

namespace nhk {

/// Eigenpairs of a general complex matrix. `right` holds unit-norm right
/// eigenvectors as columns when requested.
struct EigenDecomposition {
  Eigen::VectorXcd values;
  std::optional<Eigen::MatrixXcd> right;
};

/// LAPACK zgeev. Throws NumericalError if the QR iteration fails to converge.
EigenDecomposition general_eigen(const Eigen::MatrixXcd& A, bool want_vectors);

/// LAPACK dsyevd, eigenvalues only, ascending.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A);

/// Largest absolute entry; 0 for empty matrices.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace nhk
