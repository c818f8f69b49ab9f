#include "nhk/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

#include "nhk/linalg.hpp"

namespace nhk {

DenseOperator reduced_density_matrix(const StateVector& state, int L, KeptHalf keep) {
  if (L < 2 || L % 2 != 0) throw InvalidInput("reduced_density_matrix: L must be even, got " + std::to_string(L));
  const Eigen::Index half = Eigen::Index{1} << (L / 2);
  if (state.size() != half * half) throw InvalidInput("reduced_density_matrix: state dimension mismatch");
  const double norm = state.norm();
  if (!(norm > 0.0)) throw InvalidInput("reduced_density_matrix: zero state");

  // Row-major reshape: index = left * 2^{L/2} + right, since site 1 is the
  // most significant bit. Eigen maps column-major, so this is M^T.
  const Eigen::Map<const Eigen::MatrixXcd> Mt(state.data(), half, half);
  DenseOperator rho = keep == KeptHalf::Left ? DenseOperator(Mt.transpose() * Mt.conjugate())
                                             : DenseOperator(Mt * Mt.adjoint());
  rho /= norm * norm;
  return rho;
}

double von_neumann_entropy(const DenseOperator& rho) {
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-8) throw InvalidInput("von_neumann_entropy: trace deviates from 1");
  Eigen::SelfAdjointEigenSolver<DenseOperator> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()[i];
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

double half_chain_entropy(const StateVector& state, int L) {
  return von_neumann_entropy(reduced_density_matrix(state, L));
}

double page_value(int L) { return (L * std::log(2.0) - 1.0) / 2.0; }

double EntropySample::mean() const {
  if (entropies.empty()) return 0.0;
  double s = 0.0;
  for (double x : entropies) s += x;
  return s / static_cast<double>(entropies.size());
}

double EntropySample::max() const {
  return entropies.empty() ? 0.0 : *std::max_element(entropies.begin(), entropies.end());
}

double EntropySample::mean_square() const {
  if (entropies.empty()) return 0.0;
  double s = 0.0;
  for (double x : entropies) s += x * x;
  return s / static_cast<double>(entropies.size());
}

void EntropySample::write_csv(std::ostream& os) const {
  os << "re_E,S\n" << std::setprecision(12);
  for (std::size_t i = 0; i < entropies.size(); ++i) os << eigenvalue_re[i] << ',' << entropies[i] << '\n';
}

EntropySample eigenstate_entropies(const Eigen::VectorXcd& values,
                                   const Eigen::MatrixXcd& right_vectors, int L) {
  EntropySample out;
  out.entropies.resize(values.size());
  out.eigenvalue_re.resize(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    out.entropies[k] = half_chain_entropy(right_vectors.col(k), L);
    out.eigenvalue_re[k] = values[k].real();
  }
  return out;
}

EntropySample eigenstate_entropies(const DenseOperator& H, int L) {
  if (L % 2 != 0) throw InvalidInput("eigenstate_entropies: L must be even");
  const EigenDecomposition eig = general_eigen(H, true);
  return eigenstate_entropies(eig.values, *eig.right, L);
}

EntropyStatistics entropy_statistics(std::span<const EntropySample> samples) {
  EntropyStatistics st;
  st.realizations = static_cast<int>(samples.size());
  if (samples.empty()) return st;
  std::vector<double> means;
  double total = 0.0, total_sq = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    means.push_back(s.mean());
    for (double x : s.entropies) {
      total += x;
      total_sq += x * x;
    }
    count += s.entropies.size();
  }
  st.mean = total / static_cast<double>(count);
  double mm = 0.0;
  for (double m : means) mm += m;
  mm /= static_cast<double>(means.size());
  double ss = 0.0;
  for (double m : means) ss += (m - mm) * (m - mm);
  st.sigma = means.size() > 1 ? std::sqrt(ss / static_cast<double>(means.size() - 1)) : 0.0;
  const double var = total_sq / count - st.mean * st.mean;
  st.pooled_std = count > 1 ? std::sqrt(std::max(0.0, var * count / (count - 1.0))) : 0.0;
  return st;
}

}  // namespace nhk
