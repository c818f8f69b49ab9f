#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nhk {

using Complex = std::complex<double>;

/// Square complex matrix in the full Hilbert space (H, H^dagger, density matrices).
using DenseOperator = Eigen::MatrixXcd;

/// Complex amplitudes over the computational basis. Never implicitly normalized.
using StateVector = Eigen::VectorXcd;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nhk
