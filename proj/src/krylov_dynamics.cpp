#include "nhk/krylov_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nhk/linalg.hpp"

namespace nhk {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

void check_times(std::span<const double> times) {
  if (times.empty()) return;
  if (!(times[0] >= 0.0)) throw InvalidInput("evolution times must be >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidInput("evolution times must be strictly increasing");
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

class ChainIntegrator {
 public:
  ChainIntegrator(const TridiagonalForm& form, const EvolveOptions& opts)
      : form_(form), opts_(opts) {
    const int k = form.K();
    y_ = Eigen::VectorXcd::Zero(k);
    y_[0] = 1.0;
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_, &err_})
      v->resize(k);
    rhs(y_, k1_);
    double norm_t = 0.0;
    for (int n = 0; n < k; ++n) {
      double row = std::abs(form.a[n]);
      if (n > 0) row += std::abs(form.b[n - 1]);
      if (n + 1 < k) row += std::abs(form.c[n]);
      norm_t = std::max(norm_t, row);
    }
    h_ = norm_t > 0.0 ? 0.01 / norm_t : 1.0;
  }

  void advance_to(double target) {
    long steps = 0;
    while (t_ < target) {
      if (++steps > opts_.max_steps) fail("step budget exhausted");
      double h = std::min(h_, target - t_);
      const bool last = (h == target - t_);
      if (h < opts_.min_step && !last) fail("step size underflow");
      const double err = attempt(h);
      if (err <= 1.0) {
        t_ = last ? target : t_ + h;
        y_.swap(ynew_);
        k1_.swap(k7_);  // FSAL
        rescale_if_needed();
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (!last || fac < 1.0) h_ = h * fac;
      } else {
        h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
  }

  KrylovWaveFunction snapshot() const { return {t_, y_, log_scale_}; }

 private:
  void rhs(const Eigen::VectorXcd& y, Eigen::VectorXcd& out) {
    form_.apply(y, out);
    out *= kMinusI;
  }

  double attempt(double h) {
    tmp_ = y_ + h * a21 * k1_;
    rhs(tmp_, k2_);
    tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
    rhs(tmp_, k3_);
    tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs(tmp_, k4_);
    tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs(tmp_, k5_);
    tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs(tmp_, k6_);
    ynew_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs(ynew_, k7_);
    err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

    // The flow is linear, so the absolute tolerance is taken relative to the
    // current amplitude scale.
    const double scale = y_.cwiseAbs().maxCoeff();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      const double sc =
          opts_.atol * scale + opts_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      const double r = std::abs(err_[i]) / sc;
      acc += r * r;
    }
    const double err = std::sqrt(acc / static_cast<double>(y_.size()));
    return std::isfinite(err) ? err : 1e10;
  }

  void rescale_if_needed() {
    const double nrm = y_.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) fail("non-finite state");
    if (nrm < opts_.renorm_low || nrm > opts_.renorm_high) {
      y_ /= nrm;
      k1_ /= nrm;
      log_scale_ += std::log(nrm);
    }
  }

  [[noreturn]] void fail(const std::string& why) const {
    std::ostringstream msg;
    msg << "Krylov chain integration failed (" << why << ") at t=" << std::setprecision(10) << t_;
    throw IntegrationError(msg.str(), t_);
  }

  const TridiagonalForm& form_;
  const EvolveOptions& opts_;
  Eigen::VectorXcd y_, ynew_, err_, tmp_, k1_, k2_, k3_, k4_, k5_, k6_, k7_;
  double t_ = 0.0;
  double h_ = 1e-3;
  double log_scale_ = 0.0;
};

// Shared by the chain-spectral path and the Hilbert-space oracle:
// v(t) = V diag(exp(-i z t)) coeff, with the largest growth factored out.
Eigen::VectorXcd propagate_modes(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& V,
                                 const Eigen::VectorXcd& coeff, double t, double& log_scale) {
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < z.size(); ++m)
    if (coeff[m] != Complex(0.0)) shift = std::max(shift, z[m].imag() * t);
  if (!std::isfinite(shift)) shift = 0.0;
  Eigen::VectorXcd w(z.size());
  for (Eigen::Index m = 0; m < z.size(); ++m)
    w[m] = coeff[m] * std::exp(kMinusI * z[m] * t - shift);
  log_scale = shift;
  return V * w;
}

std::vector<KrylovWaveFunction> evolve_spectral(const TridiagonalForm& form,
                                                std::span<const double> times) {
  const EigenDecomposition eig = general_eigen(form.matrix(), true);
  const Eigen::MatrixXcd& V = *eig.right;
  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(form.K());
  e0[0] = 1.0;
  const Eigen::VectorXcd coeff = V.partialPivLu().solve(e0);
  std::vector<KrylovWaveFunction> out;
  out.reserve(times.size());
  for (double t : times) {
    KrylovWaveFunction wf;
    wf.t = t;
    if (t == 0.0) {
      wf.phi = e0;
    } else {
      wf.phi = propagate_modes(eig.values, V, coeff, t, wf.log_scale);
    }
    out.push_back(std::move(wf));
  }
  return out;
}

}  // namespace

Eigen::VectorXcd KrylovWaveFunction::normalized() const {
  const double n = phi.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw NumericalError("cannot normalize a zero or non-finite Krylov wave function");
  return phi / n;
}

std::vector<KrylovWaveFunction> evolve_krylov_chain(const TridiagonalForm& form,
                                                    std::span<const double> times,
                                                    const EvolveOptions& opts) {
  if (form.K() < 1) throw InvalidInput("evolve_krylov_chain: empty tridiagonal form");
  check_times(times);
  if (opts.method == EvolutionMethod::Spectral) return evolve_spectral(form, times);

  ChainIntegrator integrator(form, opts);
  std::vector<KrylovWaveFunction> out;
  out.reserve(times.size());
  for (double t : times) {
    integrator.advance_to(t);
    out.push_back(integrator.snapshot());
  }
  return out;
}

DirectEvolution::DirectEvolution(const DenseOperator& H, const StateVector& psi0) {
  if (H.rows() != H.cols() || H.rows() != psi0.size())
    throw InvalidInput("DirectEvolution: dimension mismatch");
  EigenDecomposition eig = general_eigen(H, true);
  z_ = std::move(eig.values);
  V_ = std::move(*eig.right);
  const auto lu = V_.partialPivLu();
  rcond_ = lu.rcond();
  coeff_ = lu.solve(psi0);
  if (!(rcond_ > 1e-12)) {
    std::ostringstream msg;
    msg << "eigenvector matrix nearly singular (rcond=" << rcond_
        << "); close to an exceptional point";
    warning_ = msg.str();
  }
}

StateVector DirectEvolution::state(double t, double& log_scale) const {
  if (t == 0.0) {
    log_scale = 0.0;
    return V_ * coeff_;
  }
  return propagate_modes(z_, V_, coeff_, t, log_scale);
}

KrylovWaveFunction DirectEvolution::project(const Eigen::MatrixXcd& Q, double t) const {
  KrylovWaveFunction wf;
  wf.t = t;
  const StateVector psi = state(t, wf.log_scale);
  wf.phi = Q.adjoint() * psi;
  return wf;
}

KrylovWaveFunction direct_evolution_oracle(const DenseOperator& H, const StateVector& psi0,
                                           const KrylovBasis& basis, double t) {
  DirectEvolution evo(H, psi0);
  if (t == 0.0) {
    // Exact initial condition: q_n^dagger psi0 = delta_n0 by bi-orthogonality.
    KrylovWaveFunction wf;
    wf.phi = Eigen::VectorXcd::Zero(basis.Q.cols());
    wf.phi[0] = 1.0;
    return wf;
  }
  return evo.project(basis.Q, t);
}

double complexity(const KrylovWaveFunction& wf) {
  const Eigen::VectorXcd phi = wf.normalized();
  double c = 0.0;
  for (Eigen::Index n = 1; n < phi.size(); ++n) c += static_cast<double>(n) * std::norm(phi[n]);
  return c;
}

double ipr(const KrylovWaveFunction& wf) {
  const Eigen::VectorXcd phi = wf.normalized();
  double s = 0.0;
  for (Eigen::Index n = 0; n < phi.size(); ++n) {
    const double p = std::norm(phi[n]);
    s += p * p;
  }
  return s;
}

DiagnosticTrace DiagnosticTrace::from(std::span<const KrylovWaveFunction> wfs) {
  DiagnosticTrace tr;
  for (const auto& wf : wfs) {
    tr.times.push_back(wf.t);
    tr.c_k.push_back(complexity(wf));
    tr.i_k.push_back(ipr(wf));
    tr.raw_log_norm.push_back(wf.raw_log_norm());
  }
  return tr;
}

void DiagnosticTrace::write_csv(std::ostream& os) const {
  os << "t,c_k,i_k,raw_log_norm\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < times.size(); ++i)
    os << times[i] << ',' << c_k[i] << ',' << i_k[i] << ',' << raw_log_norm[i] << '\n';
}

double early_time_coefficient(const DiagnosticTrace& trace, double t_max) {
  double num = 0.0, den = 0.0;
  int samples = 0;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double t = trace.times[i];
    if (t < 0.0 || t >= t_max) continue;
    ++samples;
    const double t2 = t * t;
    num += trace.c_k[i] * t2;
    den += t2 * t2;
  }
  if (samples < 5 || den == 0.0)
    throw InvalidInput("early_time_coefficient: need >= 5 samples with t < " +
                       std::to_string(t_max) + ", got " + std::to_string(samples));
  return num / den;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw InvalidInput("log_grid: bad range");
  std::vector<double> g(count);
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < count; ++i) g[i] = std::pow(10.0, llo + (lhi - llo) * i / (count - 1));
  return g;
}

std::vector<double> default_time_grid() {
  std::vector<double> g = log_grid(1e-3, 1e4, 200);
  for (int k = 0; k < 20; ++k) g.push_back(0.01 * k / 20.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [](double x, double y) { return std::abs(x - y) < 1e-15; }),
          g.end());
  return g;
}

}  // namespace nhk
