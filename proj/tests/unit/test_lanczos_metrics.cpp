#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nhk/bilanczos.hpp"
#include "nhk/lanczos_metrics.hpp"
#include "nhk/model.hpp"
#include "nhk/rng.hpp"

using namespace nhk;

namespace {

// Form with prescribed hoppings j_n (b_n = j_n, c_n = j_n e^{i theta_n}).
TridiagonalForm form_from(const std::vector<double>& j, const std::vector<double>& theta = {}) {
  TridiagonalForm f;
  f.a.assign(j.size() + 1, 0.0);
  for (std::size_t n = 0; n < j.size(); ++n) {
    f.b.push_back(j[n]);
    f.c.push_back(std::polar(j[n], theta.empty() ? 0.0 : theta[n]));
  }
  return f;
}

double textbook_variance(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double s = std::accumulate(x.begin(), x.end(), 0.0);
  const double ss = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  return (ss - s * s / n) / (n - 1);
}

TridiagonalForm model_form(int L, double w, std::uint64_t seed, int max_dim = 0) {
  SpinChainParams p;
  p.L = L;
  p.w_gamma = w;
  BiLanczosOptions o;
  o.keep_basis = false;
  o.max_dim = max_dim;
  return tridiagonalize(build_hamiltonian(p, sample_disorder(p, seed)), initial_plus_state(L), o).form;
}

}  // namespace

TEST_SUITE("lanczos_metrics") {
  TEST_CASE("variance of constant sequences vanishes") {
    CHECK(krylov_variance(form_from(std::vector<double>(12, 1.7))) == 0.0);
    std::vector<double> alt;
    for (int n = 0; n < 20; ++n) alt.push_back(n % 2 ? 1.0 : 2.0);
    CHECK(krylov_variance(form_from(alt)) == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("variance matches a direct statistics oracle") {
    // ten pairs with ratio 2, ten with ratio 4
    std::vector<double> j, logs;
    for (int n = 0; n < 20; ++n) {
      const double ratio = n < 10 ? 2.0 : 4.0;
      j.push_back(ratio * 1.3);
      j.push_back(1.3);
      logs.push_back(std::log(ratio));
    }
    const double expect = textbook_variance(logs);
    CHECK(expect == doctest::Approx(std::pow(std::log(2.0), 2) * 20.0 / 19.0 / 4.0).epsilon(1e-14));
    CHECK(krylov_variance(form_from(j)) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(krylov_variance(std::span<const double>(j)) == doctest::Approx(expect).epsilon(1e-13));

    // an odd trailing hopping is not part of any pair
    j.push_back(1e6);
    CHECK(krylov_variance(std::span<const double>(j)) == doctest::Approx(expect).epsilon(1e-13));
  }

  TEST_CASE("variance errors and truncation") {
    CHECK_THROWS_AS(krylov_variance(form_from({1.0, 2.0, 3.0})), InvalidInput);
    auto f = form_from({1.0, 2.0, 1.0, 0.0, 1.0, 1.0});
    try {
      krylov_variance(f);
      FAIL("expected an error");
    } catch (const InvalidInput& e) {
      CHECK(std::string(e.what()).find("j_4") != std::string::npos);
    }
    Rng rng(1);
    std::vector<double> j;
    for (int n = 0; n < 40; ++n) j.push_back(0.5 + rng.uniform());
    VarianceOptions half;
    half.truncate_half = true;
    const auto form = form_from(j);  // K = 41, keep j_1..j_20
    const std::vector<double> head(j.begin(), j.begin() + 20);
    CHECK(krylov_variance(form, half) == doctest::Approx(krylov_variance(std::span<const double>(head))));
  }

  TEST_CASE("variance is non-negative on model chains") {
    for (double w : {0.0, 0.05, 1.0})
      for (int r = 0; r < 3; ++r) CHECK(krylov_variance(model_form(6, w, 10 + r)) >= 0.0);
  }

  TEST_CASE("reciprocity") {
    const auto herm = model_form(6, 0.0, 4);
    for (int d = 1; d < herm.K(); d += 7) CHECK(reciprocity(herm, d) == doctest::Approx(1.0).epsilon(1e-12));
    const auto neg = form_from({1, 2, 3, 4}, {M_PI, M_PI, M_PI, M_PI});
    CHECK(reciprocity(neg, 4) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(reciprocity(neg, 5), InvalidInput);
    CHECK_THROWS_AS(reciprocity(neg, 0), InvalidInput);

    Rng rng(3);
    std::vector<double> th;
    for (int n = 0; n < 10; ++n) th.push_back(rng.uniform(-3, 3));
    const auto f = form_from(std::vector<double>(10, 1.0), th);
    const auto ct = cos_theta(f);
    for (int d = 1; d <= 10; ++d) {
      double m = 0.0, mx = 0.0;
      for (int n = 0; n < d; ++n) {
        m += std::cos(th[n]) / d;
        mx = std::max(mx, std::abs(ct[n]));
      }
      CHECK(reciprocity(f, d) == doctest::Approx(m).epsilon(1e-14));
      CHECK(std::abs(reciprocity(f, d)) <= mx + 1e-15);
    }
  }

  TEST_CASE("ensemble averaging order does not matter") {
    CoefficientEnsemble ens;
    ens.L = 6;
    ens.w_gamma = 1.5;
    for (int r = 0; r < 6; ++r) ens.realizations.push_back(model_form(6, 1.5, 100 + r, 10 + r));
    CHECK(ens.min_K() == 10);
    CHECK(theta_profile(ens).size() == 9);
    for (int d : {4, 5, 6}) {
      double direct = 0.0;
      for (const auto& f : ens.realizations) direct += reciprocity(f, d);
      direct /= ens.realizations.size();
      CHECK(ensemble_reciprocity(ens, d) == doctest::Approx(direct).epsilon(1e-13));
    }
    CHECK_THROWS_AS(ensemble_reciprocity(ens, 10), InvalidInput);
  }

  TEST_CASE("Hermitian ensemble profile is flat one") {
    CoefficientEnsemble ens;
    ens.L = 5;
    for (int r = 0; r < 3; ++r) ens.realizations.push_back(model_form(5, 0.0, r));
    for (double x : theta_profile(ens)) CHECK(x == doctest::Approx(1.0).epsilon(1e-10));
    const auto b = mean_abs_b(ens), c = mean_abs_c(ens);
    for (std::size_t n = 0; n < b.size(); ++n) CHECK(b[n] == doctest::Approx(c[n]).epsilon(1e-10));
  }

  TEST_CASE("Tsallis fit recovers its generator") {
    const int L = 6;
    const double dim = 64.0;
    std::vector<double> prof;
    for (int n = 1; n <= 63; ++n) prof.push_back(2.0 * std::sqrt(1.0 - std::pow(n / dim, 0.25)));
    const auto fit = tsallis_fit_profile(prof, L, 0.75);
    CHECK(fit.amplitude_b == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.residual_b < 1e-20);
    CHECK(fit.points == 63 - L);
    const auto other = tsallis_fit_profile(prof, L, 0.0);
    CHECK(other.residual_b > fit.residual_b);
    CHECK_THROWS_AS(tsallis_fit_profile(std::vector<double>(L, 1.0), L, 0.5), InvalidInput);
    CHECK_THROWS_AS(tsallis_fit_profile(prof, L, 1.0), InvalidInput);
  }

  TEST_CASE("Tsallis amplitudes are positive on model ensembles") {
    CoefficientEnsemble ens;
    ens.L = 6;
    for (int r = 0; r < 3; ++r) ens.realizations.push_back(model_form(6, 0.2, 50 + r));
    for (double q : {0.0, 0.75}) {
      const auto fit = tsallis_fit(ens, q);
      CHECK(fit.amplitude_b > 0.0);
      CHECK(fit.amplitude_c > 0.0);
    }
  }
}
