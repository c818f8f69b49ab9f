#include <doctest.h>

#include <cmath>
#include <random>

#include "nhk/bilanczos.hpp"
#include "nhk/linalg.hpp"
#include "nhk/model.hpp"
#include "nhk/rng.hpp"

using namespace nhk;

namespace {

DenseOperator model_h(int L, double w_gamma, std::uint64_t seed) {
  SpinChainParams p;
  p.L = L;
  p.w_gamma = w_gamma;
  return build_hamiltonian(p, sample_disorder(p, seed));
}

StateVector random_state(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  StateVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

// Plain Hermitian Lanczos with full Gram-Schmidt, as an independent oracle.
void hermitian_lanczos(const DenseOperator& H, const StateVector& v0, std::vector<double>& alpha,
                       std::vector<double>& beta) {
  const Eigen::Index d = H.rows();
  Eigen::MatrixXcd V(d, d);
  V.col(0) = v0;
  for (Eigen::Index n = 0; n < d; ++n) {
    Eigen::VectorXcd w = H * V.col(n);
    alpha.push_back(V.col(n).dot(w).real());
    for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(n + 1) * (V.leftCols(n + 1).adjoint() * w);
    if (n + 1 == d) break;
    beta.push_back(w.norm());
    V.col(n + 1) = w / w.norm();
  }
}

}  // namespace

TEST_SUITE("bilanczos") {
  TEST_CASE("2x2 Hermitian by hand") {
    DenseOperator H(2, 2);
    H << 0, 1, 1, 0;
    StateVector psi(2);
    psi << 1, 0;
    const auto r = tridiagonalize(H, psi);
    REQUIRE(r.form.K() == 2);
    CHECK(std::abs(r.form.a[0]) < 1e-15);
    CHECK(std::abs(r.form.a[1]) < 1e-15);
    CHECK(r.form.b[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(r.form.c[0] - 1.0) < 1e-15);
    const auto rep = verify(r.form, *r.basis, H);
    CHECK(rep.biorthogonality < 1e-14);
    CHECK(rep.q_orthonormality < 1e-14);
    CHECK(rep.tridiagonal < 1e-14);
  }

  TEST_CASE("2x2 non-Hermitian by hand") {
    DenseOperator H(2, 2);
    H << 0, 1, 2, 0;
    StateVector psi(2);
    psi << 1, 0;
    const auto r = tridiagonalize(H, psi);
    REQUIRE(r.form.K() == 2);
    CHECK(std::abs(r.form.a[0]) < 1e-15);
    CHECK(std::abs(r.form.a[1]) < 1e-15);
    CHECK(r.form.b[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(r.form.c[0] - 1.0) < 1e-15);
    CHECK(max_abs(r.form.matrix() - H) < 1e-14);
    const auto rep = verify(r.form, *r.basis, H);
    CHECK(rep.biorthogonality < 1e-14);
    CHECK(rep.tridiagonal < 1e-14);
  }

  TEST_CASE("Hermitian limit: c equals b and matches one-sided Lanczos") {
    for (int L = 2; L <= 6; ++L) {
      const auto H = model_h(L, 0.0, 40 + L);
      const auto psi = initial_plus_state(L);
      const auto r = tridiagonalize(H, psi);
      std::vector<double> alpha, beta;
      hermitian_lanczos(H, psi, alpha, beta);
      const int k = std::min<int>(r.form.K(), static_cast<int>(alpha.size()));
      REQUIRE(k >= 2);
      for (int n = 0; n + 1 < r.form.K(); ++n) {
        CHECK(std::abs(r.form.c[n].imag()) < 1e-10);
        CHECK(std::abs(r.form.c[n] - r.form.b[n]) < 1e-10);
      }
      // compare on the part of the chain before either side loses orthogonality to roundoff
      for (int n = 0; n < std::min(k, 12); ++n) CHECK(std::abs(r.form.a[n] - alpha[n]) < 1e-9);
      for (int n = 0; n + 1 < std::min(k, 12); ++n) CHECK(std::abs(r.form.b[n] - beta[n]) < 1e-9);
      const auto rep = verify(r.form, *r.basis, H);
      CHECK(rep.q_orthonormality < 1e-10);
    }
  }

  TEST_CASE("random Hermitian state and 64x64 residuals") {
    const auto H = model_h(6, 0.0, 5);
    const auto r = tridiagonalize(H, random_state(64, 9));
    const auto rep = verify(r.form, *r.basis, H);
    CHECK(rep.biorthogonality < 1e-10);
    CHECK(rep.tridiagonal < 1e-10);
    for (int n = 0; n + 1 < r.form.K(); ++n) CHECK(std::abs(r.form.c[n] - r.form.b[n]) < 1e-10);
  }

  TEST_CASE("non-Hermitian residuals and three-term recurrence") {
    for (double w : {0.1, 1.0, 3.0}) {
      const auto H = model_h(6, w, 77);
      const auto r = tridiagonalize(H, initial_plus_state(6));
      CHECK(!r.breakdown);
      CHECK(r.form.K() == 64);
      const auto rep = verify(r.form, *r.basis, H);
      CHECK(rep.passes(1e-8));
      const auto& P = r.basis->P;
      const Eigen::MatrixXcd recon = P * r.form.matrix();
      CHECK(max_abs(H * P - recon) < 1e-8 * std::max(1.0, rep.h_norm));
      for (double bn : r.form.b) CHECK(bn >= 0.0);
      for (int n = 0; n < r.form.K(); ++n) CHECK(std::abs(P.col(n).norm() - 1.0) < 1e-12);
    }
  }

  TEST_CASE("hopping is gauge invariant") {
    const auto r = tridiagonalize(model_h(5, 1.0, 3), initial_plus_state(5));
    const auto T = r.form.matrix();
    for (int n = 1; n < r.form.K(); ++n) {
      CHECK(r.form.hopping(n) == doctest::Approx(std::sqrt(std::abs(T(n, n - 1) * T(n - 1, n)))).epsilon(1e-14));
      // moving a phase from c into b leaves j_n untouched
      const Complex phase = std::polar(1.0, 0.37 * n);
      CHECK(std::sqrt(std::abs((r.form.b[n - 1] * phase) * (r.form.c[n - 1] / phase))) ==
            doctest::Approx(r.form.hopping(n)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(r.form.hopping(0), InvalidInput);
    CHECK_THROWS_AS(r.form.hopping(r.form.K()), InvalidInput);
  }

  TEST_CASE("breakdown truncates and reports") {
    DenseOperator H = DenseOperator::Zero(3, 3);
    H.diagonal() << 1.0, 2.0, 3.0;
    StateVector psi(3);
    psi << 1, 0, 0;
    const auto r = tridiagonalize(H, psi);
    REQUIRE(r.breakdown);
    CHECK(r.breakdown->step == 1);
    CHECK(r.form.K() == 1);
    CHECK(r.form.b.empty());
    CHECK(r.basis->P.cols() == 1);
  }

  TEST_CASE("max_dim gives a prefix of the full chain") {
    const auto H = model_h(6, 1.0, 21);
    const auto psi = initial_plus_state(6);
    const auto full = tridiagonalize(H, psi);
    BiLanczosOptions opts;
    opts.max_dim = 8;
    opts.keep_basis = false;
    const auto part = tridiagonalize(H, psi, opts);
    CHECK(!part.basis);
    REQUIRE(part.form.K() == 8);
    for (int n = 0; n < 7; ++n) {
      CHECK(std::abs(part.form.a[n] - full.form.a[n]) < 1e-12);
      CHECK(std::abs(part.form.b[n] - full.form.b[n]) < 1e-12);
      CHECK(std::abs(part.form.c[n] - full.form.c[n]) < 1e-12);
    }
  }

  TEST_CASE("input validation") {
    const auto H = model_h(3, 0.0, 1);
    StateVector psi = initial_plus_state(3) * 2.0;
    CHECK_THROWS_AS(tridiagonalize(H, psi), InvalidInput);
    CHECK_THROWS_AS(tridiagonalize(H, initial_plus_state(2)), InvalidInput);
    BiLanczosOptions opts;
    opts.max_reorth = 0;
    CHECK_THROWS_AS(tridiagonalize(H, initial_plus_state(3), opts), NumericalError);
  }

  TEST_CASE("JSON round trip") {
    const auto r = tridiagonalize(model_h(4, 0.5, 2), initial_plus_state(4));
    const nlohmann::json j = r.form;
    CHECK(j.at("K") == r.form.K());
    CHECK(j.at("a").at(0).size() == 2);
    const auto back = j.get<TridiagonalForm>();
    CHECK(back.a == r.form.a);
    CHECK(back.b == r.form.b);
    CHECK(back.c == r.form.c);
  }
}
