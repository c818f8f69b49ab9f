#include "nhk/lanczos_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nhk {

int CoefficientEnsemble::min_K() const {
  if (realizations.empty()) throw InvalidInput("empty coefficient ensemble");
  int k = std::numeric_limits<int>::max();
  for (const auto& f : realizations) k = std::min(k, f.K());
  return k;
}

double krylov_variance(std::span<const double> hoppings) {
  const std::size_t pairs = hoppings.size() / 2;
  if (pairs < 2) throw InvalidInput("krylov_variance: need at least two (odd, even) pairs");
  std::vector<double> logs;
  logs.reserve(pairs);
  for (std::size_t n = 0; n < pairs; ++n) {
    const double odd = hoppings[2 * n];
    const double even = hoppings[2 * n + 1];
    if (!(odd > 0.0)) throw InvalidInput("krylov_variance: j_" + std::to_string(2 * n + 1) + " = 0");
    if (!(even > 0.0)) throw InvalidInput("krylov_variance: j_" + std::to_string(2 * n + 2) + " = 0");
    logs.push_back(std::log(odd / even));
  }
  double mean = 0.0;
  for (double x : logs) mean += x;
  mean /= static_cast<double>(logs.size());
  double ss = 0.0;
  for (double x : logs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(logs.size() - 1);
}

double krylov_variance(const TridiagonalForm& form, const VarianceOptions& opts) {
  int last = form.K() - 1;  // highest hopping index
  if (opts.truncate_half) last = std::min(last, form.K() / 2);
  std::vector<double> j;
  j.reserve(std::max(last, 0));
  for (int n = 1; n <= last; ++n) j.push_back(form.hopping(n));
  return krylov_variance(j);
}

double reciprocity(const TridiagonalForm& form, int depth) {
  if (depth < 1 || depth > form.K() - 1)
    throw InvalidInput("reciprocity: depth " + std::to_string(depth) + " outside [1, " +
                       std::to_string(form.K() - 1) + "]");
  double s = 0.0;
  for (int n = 1; n <= depth; ++n) s += std::cos(form.theta(n));
  return s / depth;
}

std::vector<double> cos_theta(const TridiagonalForm& form) {
  std::vector<double> out;
  out.reserve(std::max(form.K() - 1, 0));
  for (int n = 1; n < form.K(); ++n) out.push_back(std::cos(form.theta(n)));
  return out;
}

namespace {

template <typename F>
std::vector<double> average_profile(const CoefficientEnsemble& ens, F&& value) {
  const int len = ens.min_K() - 1;
  std::vector<double> mean(std::max(len, 0), 0.0);
  for (const auto& f : ens.realizations)
    for (int n = 1; n <= len; ++n) mean[n - 1] += value(f, n);
  for (double& x : mean) x /= static_cast<double>(ens.realizations.size());
  return mean;
}

}  // namespace

std::vector<double> theta_profile(const CoefficientEnsemble& ensemble) {
  return average_profile(ensemble, [](const TridiagonalForm& f, int n) { return std::cos(f.theta(n)); });
}

std::vector<double> mean_abs_b(const CoefficientEnsemble& ensemble) {
  return average_profile(ensemble, [](const TridiagonalForm& f, int n) { return std::abs(f.b[n - 1]); });
}

std::vector<double> mean_abs_c(const CoefficientEnsemble& ensemble) {
  return average_profile(ensemble, [](const TridiagonalForm& f, int n) { return std::abs(f.c[n - 1]); });
}

double ensemble_reciprocity(const CoefficientEnsemble& ensemble, int depth) {
  const std::vector<double> prof = theta_profile(ensemble);
  if (depth < 1 || depth > static_cast<int>(prof.size()))
    throw InvalidInput("ensemble_reciprocity: depth out of range");
  double s = 0.0;
  for (int n = 0; n < depth; ++n) s += prof[n];
  return s / depth;
}

TsallisFit tsallis_fit_profile(std::span<const double> profile, int L, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw InvalidInput("tsallis_fit: q must lie in [0, 1)");
  const double dim = std::ldexp(1.0, L);
  auto model = [&](int n) { return std::sqrt(std::max(0.0, 1.0 - std::pow(n / dim, 1.0 - q))); };
  const int last = static_cast<int>(profile.size());
  double fy = 0.0, ff = 0.0;
  for (int n = L + 1; n <= last; ++n) {
    fy += model(n) * profile[n - 1];
    ff += model(n) * model(n);
  }
  if (last <= L || ff == 0.0) throw InvalidInput("tsallis_fit: empty fit window n > L");
  TsallisFit fit;
  fit.q = q;
  fit.points = last - L;
  fit.amplitude_b = fy / ff;
  for (int n = L + 1; n <= last; ++n) {
    const double r = profile[n - 1] - fit.amplitude_b * model(n);
    fit.residual_b += r * r;
  }
  return fit;
}

TsallisFit tsallis_fit(const CoefficientEnsemble& ensemble, double q) {
  const std::vector<double> b = mean_abs_b(ensemble);
  const std::vector<double> c = mean_abs_c(ensemble);
  TsallisFit fb = tsallis_fit_profile(b, ensemble.L, q);
  const TsallisFit fc = tsallis_fit_profile(c, ensemble.L, q);
  fb.amplitude_c = fc.amplitude_b;
  fb.residual_c = fc.residual_b;
  return fb;
}

}  // namespace nhk
