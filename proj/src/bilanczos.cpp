#include "nhk/bilanczos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nhk/linalg.hpp"

namespace nhk {

double TridiagonalForm::hopping(int n) const {
  if (n < 1 || n >= K()) throw InvalidInput("hopping index out of range: " + std::to_string(n));
  return std::sqrt(std::abs(b[n - 1] * c[n - 1]));
}

double TridiagonalForm::theta(int n) const {
  if (n < 1 || n >= K()) throw InvalidInput("theta index out of range: " + std::to_string(n));
  return std::arg(b[n - 1] * c[n - 1]);
}

Eigen::MatrixXcd TridiagonalForm::matrix() const {
  const int k = K();
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(k, k);
  for (int n = 0; n < k; ++n) T(n, n) = a[n];
  for (int n = 0; n + 1 < k; ++n) {
    T(n + 1, n) = b[n];
    T(n, n + 1) = c[n];
  }
  return T;
}

void TridiagonalForm::apply(const Eigen::VectorXcd& phi, Eigen::VectorXcd& out) const {
  const int k = K();
  out.resize(k);
  for (int n = 0; n < k; ++n) {
    Complex v = a[n] * phi[n];
    if (n > 0) v += b[n - 1] * phi[n - 1];
    if (n + 1 < k) v += c[n] * phi[n + 1];
    out[n] = v;
  }
}

BiLanczosResult tridiagonalize(const DenseOperator& H, const StateVector& psi0,
                               const BiLanczosOptions& opts) {
  const Eigen::Index d = H.rows();
  if (H.cols() != d) throw InvalidInput("tridiagonalize: H is not square");
  if (psi0.size() != d)
    throw InvalidInput("tridiagonalize: state dimension " + std::to_string(psi0.size()) +
                       " does not match operator dimension " + std::to_string(d));
  if (std::abs(psi0.norm() - 1.0) > 1e-10)
    throw InvalidInput("tridiagonalize: initial state must have unit norm");

  const Eigen::Index kmax = opts.max_dim > 0 ? std::min<Eigen::Index>(opts.max_dim, d) : d;
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(d, kmax);
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(d, kmax);
  P.col(0) = psi0;
  Q.col(0) = psi0;

  BiLanczosResult result;
  TridiagonalForm& form = result.form;
  form.a.reserve(kmax);
  form.b.reserve(kmax);
  form.c.reserve(kmax);

  Eigen::VectorXcd p(d), q(d), pt(d), qt(d), coef;
  double b_n = 0.0;
  Complex c_n = 0.0;
  Eigen::Index kept = kmax;

  for (Eigen::Index n = 0; n + 1 < kmax; ++n) {
    p.noalias() = H * P.col(n);
    q.noalias() = H.adjoint() * Q.col(n);
    const Complex a_n = Q.col(n).dot(p);
    form.a.push_back(a_n);

    p -= a_n * P.col(n);
    q -= std::conj(a_n) * Q.col(n);
    if (n > 0) {
      p -= c_n * P.col(n - 1);
      q -= b_n * Q.col(n - 1);
    }

    auto stop = [&](double b, double c_abs, std::string why) {
      result.breakdown = Breakdown{static_cast<int>(n + 1), b, c_abs, std::move(why)};
      kept = n + 1;
    };

    if (p.norm() < opts.breakdown_tol || q.norm() < opts.breakdown_tol) {
      stop(p.norm(), q.norm(), "residual vector vanished before reorthogonalization");
      break;
    }

    const auto Pn = P.leftCols(n + 1);
    const auto Qn = Q.leftCols(n + 1);
    double res = 0.0;
    int passes = 0;
    while (res < opts.reorth_threshold) {
      if (passes == opts.max_reorth)
        throw NumericalError("bi-Lanczos: reorthogonalization did not settle after " +
                             std::to_string(passes) + " passes at step " +
                             std::to_string(n + 1));
      coef.noalias() = Qn.adjoint() * p;
      pt = p;
      pt.noalias() -= Pn * coef;
      coef.noalias() = Pn.adjoint() * q;
      qt = q;
      qt.noalias() -= Qn * coef;
      res = std::min(pt.norm() / p.norm(), qt.norm() / q.norm());
      p.swap(pt);
      q.swap(qt);
      ++passes;
      if (!(p.norm() >= opts.breakdown_tol && q.norm() >= opts.breakdown_tol)) break;
    }
    result.max_reorth_passes = std::max(result.max_reorth_passes, passes);

    const double b_next = p.norm();
    if (!(b_next >= opts.breakdown_tol)) {
      stop(b_next, 0.0, "b below breakdown tolerance");
      break;
    }
    const Complex c_next = q.dot(p) / b_next;
    if (!(std::abs(c_next) >= opts.breakdown_tol)) {
      stop(b_next, std::abs(c_next), "|c| below breakdown tolerance");
      break;
    }
    P.col(n + 1) = p / b_next;
    Q.col(n + 1) = q / std::conj(c_next);
    form.b.push_back(b_next);
    form.c.push_back(c_next);
    b_n = b_next;
    c_n = c_next;
  }

  if (!result.breakdown) {
    const Eigen::Index last = kmax - 1;
    const Complex a_last = Q.col(last).dot(H * P.col(last));
    form.a.push_back(a_last);
  }

  if (opts.keep_basis) {
    result.basis = KrylovBasis{P.leftCols(kept), Q.leftCols(kept)};
  }
  return result;
}

VerificationReport verify(const TridiagonalForm& form, const KrylovBasis& basis,
                          const DenseOperator& H) {
  const Eigen::Index k = form.K();
  if (basis.P.cols() != k || basis.Q.cols() != k || basis.P.rows() != H.rows() ||
      basis.Q.rows() != H.rows())
    throw InvalidInput("verify: inconsistent dimensions");
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(k, k);
  VerificationReport r;
  r.biorthogonality = max_abs(basis.Q.adjoint() * basis.P - I);
  r.q_orthonormality = max_abs(basis.Q.adjoint() * basis.Q - I);
  const Eigen::MatrixXcd HP = H * basis.P;
  r.tridiagonal = max_abs(basis.Q.adjoint() * HP - form.matrix());
  r.h_norm = max_abs(H);
  return r;
}

void to_json(nlohmann::json& j, const TridiagonalForm& f) {
  auto pairs = [](const std::vector<Complex>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& z : v) arr.push_back({z.real(), z.imag()});
    return arr;
  };
  j = nlohmann::json{{"K", f.K()}, {"a", pairs(f.a)}, {"b", f.b}, {"c", pairs(f.c)}};
}

void from_json(const nlohmann::json& j, TridiagonalForm& f) {
  auto unpairs = [](const nlohmann::json& arr) {
    std::vector<Complex> v;
    for (const auto& e : arr) v.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    return v;
  };
  f.a = unpairs(j.at("a"));
  f.b = j.at("b").get<std::vector<double>>();
  f.c = unpairs(j.at("c"));
  const int k = j.at("K").get<int>();
  if (static_cast<int>(f.a.size()) != k || static_cast<int>(f.b.size()) != k - 1 ||
      static_cast<int>(f.c.size()) != k - 1)
    throw InvalidInput("TridiagonalForm JSON: inconsistent lengths");
}

}  // namespace nhk
