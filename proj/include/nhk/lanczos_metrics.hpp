#pragma once

#include <span>
#include <vector>

#include "nhk/bilanczos.hpp"

namespace nhk {

/// Realizations sharing (L, W_gamma). K may differ when breakdown occurred.
struct CoefficientEnsemble {
  std::vector<TridiagonalForm> realizations;
  double w_gamma = 0.0;
  int L = 0;

  int min_K() const;
};

struct VarianceOptions {
  /// Only use pairs with 2n <= K/2 instead of the full chain.
  bool truncate_half = false;
};

/// Sample variance (N-1 denominator) of ln(j_{2n-1}/j_{2n}) for
/// n = 1 .. floor((K-1)/2). Needs at least two pairs; throws InvalidInput
/// naming the index of any vanishing hopping.
double krylov_variance(const TridiagonalForm& form, const VarianceOptions& opts = {});
/// Same on an explicit hopping sequence j_1, j_2, ... (0-based storage).
double krylov_variance(std::span<const double> hoppings);

/// R_K^(d) = (1/d) sum_{n=1}^{d} cos theta_n, theta_n = arg(b_n c_n).
double reciprocity(const TridiagonalForm& form, int depth);

/// cos theta_n for n = 1 .. K-1 (entry n-1).
std::vector<double> cos_theta(const TridiagonalForm& form);

/// Disorder average of cos theta_n, truncated to the shortest chain
/// (entry n-1 holds n).
std::vector<double> theta_profile(const CoefficientEnsemble& ensemble);
/// Disorder averages of |b_n| and |c_n|, entry n-1 holds n.
std::vector<double> mean_abs_b(const CoefficientEnsemble& ensemble);
std::vector<double> mean_abs_c(const CoefficientEnsemble& ensemble);

/// Reciprocity of the averaged profile: cos theta_n is averaged over
/// realizations first, then over n <= depth.
double ensemble_reciprocity(const CoefficientEnsemble& ensemble, int depth);

struct TsallisFit {
  double q = 0.0;
  double amplitude_b = 0.0;
  double amplitude_c = 0.0;
  double residual_b = 0.0;  ///< sum of squared residuals
  double residual_c = 0.0;
  int points = 0;

  double residual() const { return residual_b + residual_c; }
};

/// Fits <|b_n|>, <|c_n|> = A sqrt(1 - (n/2^L)^{1-q}) over L < n <= K-1 by
/// linear least squares in A.
TsallisFit tsallis_fit(const CoefficientEnsemble& ensemble, double q);
/// Fit of a single profile (entry n-1 holds n); result in the `_b` fields.
TsallisFit tsallis_fit_profile(std::span<const double> profile, int L, double q);

}  // namespace nhk
