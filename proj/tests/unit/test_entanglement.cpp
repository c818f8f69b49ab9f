#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nhk/entanglement.hpp"
#include "nhk/linalg.hpp"
#include "nhk/model.hpp"
#include "nhk/rng.hpp"

using namespace nhk;

namespace {

StateVector random_state(int L, std::uint64_t seed) {
  Rng rng(seed);
  StateVector v(1 << L);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

// Schmidt values through an explicit SVD of the (left, right) matrix.
double schmidt_entropy(const StateVector& s, int L) {
  const int half = 1 << (L / 2);
  Eigen::MatrixXcd M(half, half);
  for (int l = 0; l < half; ++l)
    for (int r = 0; r < half; ++r) M(l, r) = s[l * half + r];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M / s.norm());
  double e = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()[i] * svd.singularValues()[i];
    if (p > 1e-14) e -= p * std::log(p);
  }
  return e;
}

}  // namespace

TEST_SUITE("entanglement") {
  TEST_CASE("product state gives a rank-one projector") {
    StateVector up = StateVector::Zero(16);
    up[0] = 1.0;
    const auto rho = reduced_density_matrix(up, 4);
    CHECK(rho.rows() == 4);
    CHECK(max_abs(rho * rho - rho) < 1e-15);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-15);
    CHECK(von_neumann_entropy(rho) == 0.0);
  }

  TEST_CASE("Bell pair is maximally mixed") {
    StateVector bell = StateVector::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const auto rho = reduced_density_matrix(bell, 2);
    CHECK(max_abs(rho - 0.5 * Eigen::MatrixXcd::Identity(2, 2)) < 1e-15);
    CHECK(von_neumann_entropy(rho) == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("density matrix axioms on random states") {
    for (int L : {2, 4, 6}) {
      const auto s = random_state(L, L);
      const auto rho = reduced_density_matrix(s * 3.0, L);  // unnormalized input is normalized
      CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
      CHECK(max_abs(rho - rho.adjoint()) < 1e-14);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
      CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
  }

  TEST_CASE("entropy agrees with Schmidt decomposition and is cut-symmetric") {
    for (int L : {2, 4, 6, 8}) {
      const auto s = random_state(L, 100 + L);
      const double left = von_neumann_entropy(reduced_density_matrix(s, L, KeptHalf::Left));
      const double right = von_neumann_entropy(reduced_density_matrix(s, L, KeptHalf::Right));
      CHECK(std::abs(left - right) < 1e-10);
      CHECK(left == doctest::Approx(schmidt_entropy(s, L)).epsilon(1e-10));
      CHECK(left <= L / 2 * std::log(2.0) + 1e-12);
    }
  }

  TEST_CASE("left half is sites 1..L/2") {
    // |up>_1 (x) Bell(2,3) (x) |up>_4: the cut between 2 and 3 splits the Bell pair
    StateVector s = StateVector::Zero(16);
    s[0b0000] = s[0b0110] = 1.0 / std::sqrt(2.0);
    CHECK(half_chain_entropy(s, 4) == doctest::Approx(std::log(2.0)));
    // Bell pair on sites 1,2 lies inside the left half
    StateVector t = StateVector::Zero(16);
    t[0b0000] = t[0b1100] = 1.0 / std::sqrt(2.0);
    CHECK(half_chain_entropy(t, 4) == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("maximally mixed six qubits and trace check") {
    const auto rho = Eigen::MatrixXcd::Identity(64, 64) / 64.0;
    CHECK(von_neumann_entropy(rho) == doctest::Approx(6 * std::log(2.0)));
    CHECK(von_neumann_entropy(rho) == doctest::Approx(4.159).epsilon(1e-3));
    CHECK_THROWS_AS(von_neumann_entropy(Eigen::MatrixXcd(rho * 1.01)), InvalidInput);
  }

  TEST_CASE("odd L is rejected") {
    CHECK_THROWS_AS(reduced_density_matrix(random_state(3, 1), 3), InvalidInput);
    SpinChainParams p;
    p.L = 3;
    CHECK_THROWS_AS(eigenstate_entropies(build_hamiltonian(p, sample_disorder(p, 1)), 3), InvalidInput);
  }

  TEST_CASE("Page value") {
    CHECK(page_value(12) == doctest::Approx(3.6589).epsilon(1e-4));
    CHECK(page_value(2) == doctest::Approx(0.1931).epsilon(1e-3));
    CHECK(page_value(4) == doctest::Approx(0.8863).epsilon(1e-4));
  }

  TEST_CASE("diagonal Hamiltonian has product eigenstates") {
    SpinChainParams p;
    p.L = 6;
    p.J = 0.0;
    p.h = 0.0;
    p.w_gamma = 1.0;
    const auto s = eigenstate_entropies(build_hamiltonian(p, sample_disorder(p, 3)), 6);
    CHECK(s.entropies.size() == 64);
    CHECK(s.max() < 1e-12);
  }

  TEST_CASE("chaotic Hermitian eigenstates approach the Page value") {
    SpinChainParams p;
    p.L = 8;
    p.w_delta = 0.3;
    const auto s = eigenstate_entropies(build_hamiltonian(p, sample_disorder(p, 6)), 8);
    CHECK(s.max() < 4 * std::log(2.0));
    CHECK(s.max() > 0.8 * page_value(8));
    for (double e : s.entropies) CHECK(e >= 0.0);
  }

  TEST_CASE("statistics conventions") {
    EntropySample a{{1.0, 3.0}, {0, 0}}, b{{2.0, 2.0, 5.0, 7.0}, {0, 0, 0, 0}};
    const std::vector<EntropySample> v{a, b};
    const auto st = entropy_statistics(v);
    CHECK(st.realizations == 2);
    CHECK(st.mean == doctest::Approx(20.0 / 6.0));
    // realization means 2 and 4
    CHECK(st.sigma == doctest::Approx(std::sqrt(2.0)));
    std::vector<double> all{1, 3, 2, 2, 5, 7};
    double m = 20.0 / 6.0, ss = 0.0;
    for (double x : all) ss += (x - m) * (x - m);
    CHECK(st.pooled_std == doctest::Approx(std::sqrt(ss / 5.0)));
    CHECK(a.mean() == 2.0);
    CHECK(b.max() == 7.0);
    CHECK(b.mean_square() == doctest::Approx((4 + 4 + 25 + 49) / 4.0));

    std::ostringstream os;
    a.write_csv(os);
    CHECK(os.str().rfind("re_E,S\n", 0) == 0);
  }
}
