#include "nhk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/NonLinearOptimization>

#include "nhk/rng.hpp"

namespace nhk {

EigenDecomposition eigendecompose(const DenseOperator& H, bool want_vectors) {
  return general_eigen(H, want_vectors);
}

Spectrum spectrum_of(const DenseOperator& H, std::string source) {
  const EigenDecomposition eig = general_eigen(H, false);
  Spectrum s;
  s.source = std::move(source);
  s.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
  return s;
}

CsrSample csr_ratios(const Spectrum& spectrum, const CsrOptions& opts) {
  const auto& z = spectrum.eigenvalues;
  const std::size_t d = z.size();
  if (d < 3) throw InvalidInput("csr_ratios: need at least 3 eigenvalues");

  std::vector<bool> centre(d, true);
  CsrSample out;
  if (opts.edge_fraction > 0.0) {
    Complex mean = std::accumulate(z.begin(), z.end(), Complex(0.0)) / static_cast<double>(d);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      return std::abs(z[i] - mean) > std::abs(z[j] - mean);
    });
    const auto drop = static_cast<std::size_t>(std::floor(opts.edge_fraction * d));
    for (std::size_t k = 0; k < drop && k < d; ++k) centre[order[k]] = false;
    out.excluded_edge = static_cast<int>(std::min(drop, d));
  }

  out.ratios.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (!centre[j]) continue;
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    std::size_t nn = 0, nnn = 0;
    for (std::size_t k = 0; k < d; ++k) {
      if (k == j) continue;
      const double dist = std::abs(z[k] - z[j]);
      if (dist < d1) {
        d2 = d1;
        nnn = nn;
        d1 = dist;
        nn = k;
      } else if (dist < d2) {
        d2 = dist;
        nnn = k;
      }
    }
    if (d1 < opts.duplicate_tol) {
      ++out.excluded_duplicates;
      continue;
    }
    out.ratios.push_back((z[nn] - z[j]) / (z[nnn] - z[j]));
  }
  return out;
}

double mean_radial(const CsrSample& sample) {
  if (sample.ratios.empty()) throw InvalidInput("mean_radial: empty sample");
  double s = 0.0;
  for (const auto& r : sample.ratios) s += std::abs(r);
  return s / static_cast<double>(sample.ratios.size());
}

double mean_angular(const CsrSample& sample) {
  if (sample.ratios.empty()) throw InvalidInput("mean_angular: empty sample");
  double s = 0.0;
  for (const auto& r : sample.ratios) s += std::cos(std::arg(r));
  return s / static_cast<double>(sample.ratios.size());
}

ReferenceEnsemble parse_reference_ensemble(const std::string& name) {
  if (name == "GOE") return ReferenceEnsemble::GOE;
  if (name == "AIdagger" || name == "AI+") return ReferenceEnsemble::AIdagger;
  if (name == "Poisson2D") return ReferenceEnsemble::Poisson2D;
  throw InvalidInput("unknown reference ensemble '" + name + "'");
}

std::string to_string(ReferenceEnsemble kind) {
  switch (kind) {
    case ReferenceEnsemble::GOE: return "GOE";
    case ReferenceEnsemble::AIdagger: return "AIdagger";
    case ReferenceEnsemble::Poisson2D: return "Poisson2D";
  }
  return "?";
}

Eigen::MatrixXcd reference_matrix(ReferenceEnsemble kind, int dim, std::uint64_t seed) {
  if (kind == ReferenceEnsemble::Poisson2D)
    throw InvalidInput("reference_matrix: Poisson2D has no matrix representation");
  Rng rng(seed);
  Eigen::MatrixXcd A(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double re = rng.normal();
      const double im = kind == ReferenceEnsemble::AIdagger ? rng.normal() : 0.0;
      A(i, j) = Complex(re, im);
    }
  return 0.5 * (A + A.transpose());
}

std::vector<Spectrum> sample_reference_ensemble(ReferenceEnsemble kind, int dim, int count,
                                                std::uint64_t seed) {
  if (dim < 3) throw InvalidInput("sample_reference_ensemble: dim must be >= 3");
  std::vector<Spectrum> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, dim, static_cast<int>(kind), i);
    Spectrum spec;
    spec.source = to_string(kind);
    switch (kind) {
      case ReferenceEnsemble::GOE: {
        const Eigen::MatrixXd M = reference_matrix(kind, dim, s).real();
        const Eigen::VectorXd w = symmetric_eigenvalues(M);
        for (Eigen::Index k = 0; k < w.size(); ++k) spec.eigenvalues.emplace_back(w[k], 0.0);
        break;
      }
      case ReferenceEnsemble::AIdagger: {
        spec = spectrum_of(reference_matrix(kind, dim, s), to_string(kind));
        break;
      }
      case ReferenceEnsemble::Poisson2D: {
        Rng rng(s);
        for (int k = 0; k < dim; ++k) {
          const double re = rng.uniform();
          spec.eigenvalues.emplace_back(re, rng.uniform());
        }
        break;
      }
    }
    out.push_back(std::move(spec));
  }
  return out;
}

double ExtrapolationFit::operator()(double L) const {
  return r_inf + delta_r / (1.0 + std::exp(-a * (L - L0)));
}

namespace {

struct LogisticResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::vector<double> L, r;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(L.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < L.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-x[2] * (L[i] - x[3])));
      f[i] = x[0] + x[1] * s - r[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& J) const {
    for (std::size_t i = 0; i < L.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-x[2] * (L[i] - x[3])));
      const double ds = s * (1.0 - s);
      J(i, 0) = 1.0;
      J(i, 1) = s;
      J(i, 2) = x[1] * ds * (L[i] - x[3]);
      J(i, 3) = -x[1] * ds * x[2];
    }
    return 0;
  }
};

}  // namespace

ExtrapolationFit extrapolate_r_infinity(const std::map<int, double>& r_by_L) {
  if (r_by_L.size() < 4) throw InvalidInput("extrapolate_r_infinity: need >= 4 system sizes");
  LogisticResidual fn;
  for (const auto& [L, r] : r_by_L) {
    fn.L.push_back(L);
    fn.r.push_back(r);
  }
  const double rmin = *std::min_element(fn.r.begin(), fn.r.end());
  const double rmax = *std::max_element(fn.r.begin(), fn.r.end());
  const double Lmin = fn.L.front(), Lmax = fn.L.back();
  const double span = std::max(rmax - rmin, 1e-6);

  ExtrapolationFit best;
  best.residual = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  Eigen::VectorXd f(fn.values());
  for (double a0 : {-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0}) {
    for (double L0 : {Lmin, 0.5 * (Lmin + Lmax), Lmax}) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd x(4);
        x << (sign > 0 ? rmin : rmax), sign * span, a0, L0;
        Eigen::LevenbergMarquardt<LogisticResidual> lm(fn);
        lm.parameters.xtol = 1e-14;
        lm.parameters.ftol = 1e-14;
        lm.parameters.maxfev = 4000;
        const auto status = lm.minimize(x);
        if (!x.allFinite()) continue;
        fn(x, f);
        const double sse = f.squaredNorm();
        const bool ok = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                        status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                        status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                        status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                        status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                        status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                        status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
        if (sse < best.residual) {
          best = {x[0], x[1], x[2], x[3], sse, ok};
        }
        any_converged = any_converged || ok;
      }
    }
  }
  if (best.a > 0.0) {
    // Same curve with the logistic reflected: r_inf becomes the large-L limit.
    best.r_inf += best.delta_r;
    best.delta_r = -best.delta_r;
    best.a = -best.a;
  }
  if (!any_converged || !best.converged)
    throw FitError("extrapolate_r_infinity: Levenberg-Marquardt did not converge", best);
  return best;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "re,im\n" << std::setprecision(15);
  for (const auto& z : s.eigenvalues) os << z.real() << ',' << z.imag() << '\n';
}

}  // namespace nhk
