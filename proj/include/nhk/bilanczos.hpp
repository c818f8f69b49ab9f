#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhk/types.hpp"

namespace nhk {

struct BiLanczosOptions {
  double residual_tol = 1e-8;
  double breakdown_tol = 1e-12;
  int max_reorth = 10;
  /// Reorthogonalization repeats while min(|p~|/|p|, |q~|/|q|) is below this.
  double reorth_threshold = 0.707;
  /// Stop after this many basis vectors; 0 means the full dimension.
  int max_dim = 0;
  /// Keep P and Q. Only the coefficients are needed for chain dynamics.
  bool keep_basis = true;
};

/// Lanczos coefficients of T = Q^dagger H P:
///   T(n, n) = a_n,  T(n+1, n) = b_{n+1},  T(n, n+1) = c_{n+1}.
/// Vectors are stored 0-based: b[k] and c[k] hold b_{k+1} and c_{k+1}.
struct TridiagonalForm {
  std::vector<Complex> a;
  std::vector<double> b;
  std::vector<Complex> c;

  int K() const { return static_cast<int>(a.size()); }
  /// j_n = |b_n c_n|^{1/2} for n = 1 .. K-1.
  double hopping(int n) const;
  /// theta_n = arg(b_n c_n) for n = 1 .. K-1.
  double theta(int n) const;
  Eigen::MatrixXcd matrix() const;
  /// Applies T to a chain vector: (T phi)_n = b_n phi_{n-1} + a_n phi_n + c_{n+1} phi_{n+1}.
  void apply(const Eigen::VectorXcd& phi, Eigen::VectorXcd& out) const;
};

/// Columns p_n and q_n with q_m^dagger p_n = delta_mn.
struct KrylovBasis {
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd Q;
};

struct Breakdown {
  int step = 0;  ///< index n+1 of the basis vector that could not be formed
  double b = 0.0;
  double c_abs = 0.0;
  std::string reason;
};

struct BiLanczosResult {
  TridiagonalForm form;
  std::optional<KrylovBasis> basis;
  std::optional<Breakdown> breakdown;
  int max_reorth_passes = 0;

  bool truncated_by_breakdown() const { return breakdown.has_value(); }
};

/// Two-sided Lanczos with complete reorthogonalization against all stored
/// vectors. p_n are unit vectors (b_n = |p_n| > 0 before normalization) and
/// q_n are scaled so that q_n^dagger p_n = 1.
///
/// Stops early, with `breakdown` set, when b_{n+1} or |c_{n+1}| falls below
/// `breakdown_tol`. Throws NumericalError if reorthogonalization does not
/// settle within `max_reorth` passes.
BiLanczosResult tridiagonalize(const DenseOperator& H, const StateVector& psi0,
                               const BiLanczosOptions& opts = {});

struct VerificationReport {
  double biorthogonality = 0.0;  ///< max |Q^dagger P - I|
  double q_orthonormality = 0.0; ///< max |Q^dagger Q - I|
  double tridiagonal = 0.0;      ///< max |Q^dagger H P - T|
  double h_norm = 0.0;           ///< max |H_ij|

  bool passes(double tol) const {
    return biorthogonality < tol && tridiagonal < tol * std::max(1.0, h_norm);
  }
};

VerificationReport verify(const TridiagonalForm& form, const KrylovBasis& basis,
                          const DenseOperator& H);

/// {"K":..,"a":[[re,im],..],"b":[..],"c":[[re,im],..]}; b and c start at n=1.
void to_json(nlohmann::json& j, const TridiagonalForm& f);
void from_json(const nlohmann::json& j, TridiagonalForm& f);

}  // namespace nhk
