#include "nhk/linalg.hpp"

#include <string>

#include <lapacke.h>

namespace nhk {

EigenDecomposition general_eigen(const Eigen::MatrixXcd& A, bool want_vectors) {
  if (A.rows() != A.cols()) throw InvalidInput("general_eigen: matrix is not square");
  const lapack_int n = static_cast<lapack_int>(A.rows());
  EigenDecomposition out;
  out.values.resize(n);
  if (n == 0) return out;

  Eigen::MatrixXcd work = A;  // zgeev destroys its input; Eigen storage is column-major
  Eigen::MatrixXcd vr;
  if (want_vectors) vr.resize(n, n);
  lapack_complex_double dummy{};
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n,
      reinterpret_cast<lapack_complex_double*>(work.data()), n,
      reinterpret_cast<lapack_complex_double*>(out.values.data()), &dummy, 1,
      want_vectors ? reinterpret_cast<lapack_complex_double*>(vr.data()) : &dummy,
      want_vectors ? n : 1);
  if (info != 0)
    throw NumericalError("zgeev failed with info=" + std::to_string(info));
  if (want_vectors) out.right = std::move(vr);
  return out;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw InvalidInput("symmetric_eigenvalues: matrix is not square");
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  Eigen::MatrixXd work = A;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, w.data());
  if (info != 0)
    throw NumericalError("dsyevd failed with info=" + std::to_string(info));
  return w;
}

}  // namespace nhk
