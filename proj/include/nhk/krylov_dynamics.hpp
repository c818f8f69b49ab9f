#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nhk/bilanczos.hpp"
#include "nhk/types.hpp"

namespace nhk {

/// Krylov amplitudes at one time: the unnormalized wave function is
/// phi * exp(log_scale). The scale is split off so that strong gain or loss
/// never overflows.
struct KrylovWaveFunction {
  double t = 0.0;
  Eigen::VectorXcd phi;
  double log_scale = 0.0;

  double raw_log_norm() const { return log_scale + std::log(phi.norm()); }
  double raw_norm() const { return std::exp(raw_log_norm()); }
  /// Unit-norm copy. Throws NumericalError for a zero vector.
  Eigen::VectorXcd normalized() const;
};

enum class EvolutionMethod {
  RungeKutta,  ///< adaptive Dormand-Prince 5(4) on the chain ODE
  Spectral,    ///< exact exponential through the eigendecomposition of T
};

struct EvolveOptions {
  EvolutionMethod method = EvolutionMethod::RungeKutta;
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Rescale the state when its norm leaves [renorm_low, renorm_high].
  double renorm_low = 1e-150;
  double renorm_high = 1e150;
  double min_step = 1e-13;
  long max_steps = 50'000'000;
};

class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double t_reached)
      : NumericalError(what), t_reached(t_reached) {}
  double t_reached;
};

/// Solves i d/dt phi_n = b_n phi_{n-1} + a_n phi_n + c_{n+1} phi_{n+1} from
/// phi(0) = e_0 and samples it at `times` (strictly increasing, >= 0).
std::vector<KrylovWaveFunction> evolve_krylov_chain(const TridiagonalForm& form,
                                                    std::span<const double> times,
                                                    const EvolveOptions& opts = {});

/// psi(t) = exp(-iHt) psi0 through H = V diag(z) V^{-1}, precomputed once.
class DirectEvolution {
 public:
  DirectEvolution(const DenseOperator& H, const StateVector& psi0);

  /// Returns psi(t) scaled by exp(-log_scale); log_scale is written out.
  StateVector state(double t, double& log_scale) const;
  /// phi_n = q_n^dagger psi(t).
  KrylovWaveFunction project(const Eigen::MatrixXcd& Q, double t) const;

  /// Reciprocal condition estimate of V.
  double rcond() const { return rcond_; }
  /// Set when V is close to singular (near an exceptional point).
  const std::optional<std::string>& warning() const { return warning_; }

 private:
  Eigen::VectorXcd z_;
  Eigen::MatrixXcd V_;
  Eigen::VectorXcd coeff_;
  double rcond_ = 0.0;
  std::optional<std::string> warning_;
};

/// Single-time convenience wrapper around DirectEvolution.
KrylovWaveFunction direct_evolution_oracle(const DenseOperator& H, const StateVector& psi0,
                                           const KrylovBasis& basis, double t);

/// C_K = sum_n n |phi_n|^2 on the normalized wave function.
double complexity(const KrylovWaveFunction& wf);
/// I_K = sum_n |phi_n|^4 on the normalized wave function.
double ipr(const KrylovWaveFunction& wf);

struct DiagnosticTrace {
  std::vector<double> times;
  std::vector<double> c_k;
  std::vector<double> i_k;
  std::vector<double> raw_log_norm;

  static DiagnosticTrace from(std::span<const KrylovWaveFunction> wfs);
  /// CSV with header `t,c_k,i_k,raw_log_norm`.
  void write_csv(std::ostream& os) const;
};

/// Least-squares a in C_K(t) = a t^2 over samples with t < t_max.
/// Throws InvalidInput with fewer than 5 such samples.
double early_time_coefficient(const DiagnosticTrace& trace, double t_max = 0.01);

/// Default sampling: 20 linear points in [0, 0.01) merged with 200
/// log-spaced points in [1e-3, 1e4].
std::vector<double> default_time_grid();
/// `count` log-spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace nhk
