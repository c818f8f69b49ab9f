#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "nhk/types.hpp"

namespace nhk {

enum class KeptHalf {
  Left,   ///< keep sites 1 .. L/2, trace out j > L/2
  Right,  ///< keep sites L/2+1 .. L
};

/// Half-chain reduced density matrix of `state` (normalized internally).
/// Throws InvalidInput for odd L or a dimension mismatch.
DenseOperator reduced_density_matrix(const StateVector& state, int L,
                                     KeptHalf keep = KeptHalf::Left);

/// -Tr rho ln rho, with eigenvalues below 1e-14 contributing zero. Throws
/// InvalidInput if the trace differs from one by more than 1e-8.
double von_neumann_entropy(const DenseOperator& rho);

/// Half-chain entanglement entropy of a single state.
double half_chain_entropy(const StateVector& state, int L);

/// (L ln 2 - 1) / 2.
double page_value(int L);

/// Per-eigenstate entropies of one realization, from unit-norm right eigenvectors.
struct EntropySample {
  std::vector<double> entropies;
  std::vector<double> eigenvalue_re;

  double mean() const;
  double max() const;
  double mean_square() const;
  void write_csv(std::ostream& os) const;  ///< `re_E,S`
};

EntropySample eigenstate_entropies(const DenseOperator& H, int L);
/// Same, reusing eigenpairs computed elsewhere (vectors as columns).
EntropySample eigenstate_entropies(const Eigen::VectorXcd& values,
                                   const Eigen::MatrixXcd& right_vectors, int L);

struct EntropyStatistics {
  double mean = 0.0;        ///< S-bar over all eigenstates and realizations
  double sigma = 0.0;       ///< std (N-1) of per-realization mean entropies
  double pooled_std = 0.0;  ///< std over every eigenstate of every realization
  int realizations = 0;
};

/// sigma_S as the spread of realization means; the pooled spread is kept
/// alongside for comparison.
EntropyStatistics entropy_statistics(std::span<const EntropySample> samples);

}  // namespace nhk
