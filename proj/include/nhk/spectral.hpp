#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "nhk/linalg.hpp"
#include "nhk/types.hpp"

namespace nhk {

struct Spectrum {
  std::vector<Complex> eigenvalues;
  std::string source;  ///< "model" or the reference ensemble name
};

/// All eigenvalues of a general complex matrix, with optional right
/// eigenvectors (unit norm, one per column).
EigenDecomposition eigendecompose(const DenseOperator& H, bool want_vectors = false);
Spectrum spectrum_of(const DenseOperator& H, std::string source = "model");

struct CsrOptions {
  /// Eigenvalues closer than this to their nearest neighbour are not used as centres.
  double duplicate_tol = 1e-14;
  /// Fraction of eigenvalues farthest from the spectral centroid that are
  /// skipped as centres (they still serve as neighbours).
  double edge_fraction = 0.0;
};

/// Complex spacing ratios r_j = (z_NN - z_j) / (z_NNN - z_j), neighbours by
/// Euclidean distance with ties broken by index.
struct CsrSample {
  std::vector<Complex> ratios;
  int excluded_duplicates = 0;
  int excluded_edge = 0;
};

CsrSample csr_ratios(const Spectrum& spectrum, const CsrOptions& opts = {});

/// <|r|>.
double mean_radial(const CsrSample& sample);
/// <cos arg r>.
double mean_angular(const CsrSample& sample);

enum class ReferenceEnsemble { GOE, AIdagger, Poisson2D };

ReferenceEnsemble parse_reference_ensemble(const std::string& name);
std::string to_string(ReferenceEnsemble kind);

/// GOE: (A + A^T)/2 with real standard normal entries. AI^dagger: the same
/// with complex normal entries (complex symmetric, not Hermitian).
Eigen::MatrixXcd reference_matrix(ReferenceEnsemble kind, int dim, std::uint64_t seed);

/// `count` spectra; spectrum i uses its own stream derived from `seed`.
/// Poisson2D draws i.i.d. points uniformly in the unit square.
std::vector<Spectrum> sample_reference_ensemble(ReferenceEnsemble kind, int dim, int count,
                                                std::uint64_t seed);

/// <r>(L) = r_inf + delta_r / (1 + exp(-a (L - L0))), reported with a <= 0
/// so that r_inf is the large-L limit.
struct ExtrapolationFit {
  double r_inf = 0.0;
  double delta_r = 0.0;
  double a = 0.0;
  double L0 = 0.0;
  double residual = 0.0;  ///< sum of squared residuals
  bool converged = false;

  double operator()(double L) const;
};

class FitError : public NumericalError {
 public:
  FitError(const std::string& what, ExtrapolationFit best)
      : NumericalError(what), best(best) {}
  ExtrapolationFit best;
};

/// Levenberg-Marquardt fit with several starting points. Needs >= 4 sizes.
ExtrapolationFit extrapolate_r_infinity(const std::map<int, double>& r_by_L);

/// CSV `re,im`.
void write_spectrum_csv(std::ostream& os, const Spectrum& s);

}  // namespace nhk
