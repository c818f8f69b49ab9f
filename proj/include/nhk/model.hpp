#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "nhk/types.hpp"

namespace nhk {

/// Parameters of the disordered non-Hermitian XY chain (energies in units of J).
struct SpinChainParams {
  int L = 8;
  double J = 1.0;
  double h = 0.5;
  double w_delta = 1.0;
  double w_gamma = 0.0;

  /// Throws InvalidInput unless L >= 1 and both disorder widths are >= 0.
  void validate() const;
  std::size_t dim() const { return std::size_t{1} << L; }
};

/// One draw of the longitudinal fields D_j = delta_j + i gamma_j.
struct DisorderRealization {
  std::vector<double> delta;
  std::vector<double> gamma;
  std::uint64_t seed = 0;

  int L() const { return static_cast<int>(delta.size()); }
  Complex field(int site) const { return {delta[site], gamma[site]}; }
};

/// Dense 2^L x 2^L Hamiltonian with open boundaries:
///   H = sum_{j<L} J (X_j X_{j+1} + Y_j Y_{j+1}) + sum_j (h X_j + D_j Z_j).
/// Basis index bit (L-1-j) holds site j (0-based), so site 0 is the most
/// significant bit; a set bit is spin down.
DenseOperator build_hamiltonian(const SpinChainParams& params,
                                const DisorderRealization& disorder);

/// delta_j ~ U[-w_delta, w_delta], gamma_j ~ U[-w_gamma, w_gamma]; all draws
/// from a single stream keyed by `seed`.
DisorderRealization sample_disorder(const SpinChainParams& params, std::uint64_t seed);

/// |+>^{(x)L}; every amplitude equals 2^{-L/2}.
StateVector initial_plus_state(int L);

void to_json(nlohmann::json& j, const DisorderRealization& d);
void from_json(const nlohmann::json& j, DisorderRealization& d);
void to_json(nlohmann::json& j, const SpinChainParams& p);
void from_json(const nlohmann::json& j, SpinChainParams& p);

}  // namespace nhk
