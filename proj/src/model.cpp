#include "nhk/model.hpp"

#include <cmath>
#include <string>

#include "nhk/rng.hpp"

namespace nhk {

void SpinChainParams::validate() const {
  if (L < 1) throw InvalidInput("L must be >= 1, got " + std::to_string(L));
  if (L > 14) throw InvalidInput("L > 14 exceeds dense storage limits");
  if (w_delta < 0.0 || w_gamma < 0.0)
    throw InvalidInput("disorder widths must be non-negative");
}

DenseOperator build_hamiltonian(const SpinChainParams& params,
                                const DisorderRealization& disorder) {
  params.validate();
  const int L = params.L;
  if (static_cast<int>(disorder.delta.size()) != L ||
      static_cast<int>(disorder.gamma.size()) != L) {
    throw InvalidInput("disorder length " + std::to_string(disorder.delta.size()) +
                       "/" + std::to_string(disorder.gamma.size()) +
                       " does not match L=" + std::to_string(L));
  }
  const std::size_t d = params.dim();
  DenseOperator H = DenseOperator::Zero(d, d);
  auto bit = [L](int site) { return std::size_t{1} << (L - 1 - site); };

  for (std::size_t s = 0; s < d; ++s) {
    Complex diag = 0.0;
    for (int j = 0; j < L; ++j) {
      const double z = (s & bit(j)) ? -1.0 : 1.0;
      diag += disorder.field(j) * z;
      H(s ^ bit(j), s) += params.h;
    }
    H(s, s) += diag;
    // XX + YY = 2 (S+S- + S-S+): flips antiparallel neighbours with amplitude 2J.
    for (int j = 0; j + 1 < L; ++j) {
      const bool a = s & bit(j);
      const bool b = s & bit(j + 1);
      if (a != b) H(s ^ bit(j) ^ bit(j + 1), s) += 2.0 * params.J;
    }
  }
  return H;
}

DisorderRealization sample_disorder(const SpinChainParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  DisorderRealization d;
  d.seed = seed;
  d.delta.resize(params.L);
  d.gamma.resize(params.L);
  for (int j = 0; j < params.L; ++j) d.delta[j] = rng.uniform(-params.w_delta, params.w_delta);
  for (int j = 0; j < params.L; ++j) d.gamma[j] = rng.uniform(-params.w_gamma, params.w_gamma);
  return d;
}

StateVector initial_plus_state(int L) {
  if (L < 1) throw InvalidInput("L must be >= 1");
  const std::size_t d = std::size_t{1} << L;
  return StateVector::Constant(d, Complex(std::pow(2.0, -0.5 * L), 0.0));
}

void to_json(nlohmann::json& j, const DisorderRealization& d) {
  j = nlohmann::json{{"L", d.L()}, {"seed", d.seed}, {"delta", d.delta}, {"gamma", d.gamma}};
}

void from_json(const nlohmann::json& j, DisorderRealization& d) {
  d.seed = j.at("seed").get<std::uint64_t>();
  d.delta = j.at("delta").get<std::vector<double>>();
  d.gamma = j.at("gamma").get<std::vector<double>>();
  const int L = j.at("L").get<int>();
  if (static_cast<int>(d.delta.size()) != L || static_cast<int>(d.gamma.size()) != L)
    throw InvalidInput("disorder JSON: vector length does not match L");
}

void to_json(nlohmann::json& j, const SpinChainParams& p) {
  j = nlohmann::json{{"L", p.L}, {"J", p.J}, {"h", p.h}, {"W_delta", p.w_delta},
                     {"W_gamma", p.w_gamma}};
}

void from_json(const nlohmann::json& j, SpinChainParams& p) {
  p.L = j.value("L", p.L);
  p.J = j.value("J", p.J);
  p.h = j.value("h", p.h);
  p.w_delta = j.value("W_delta", p.w_delta);
  p.w_gamma = j.value("W_gamma", p.w_gamma);
}

}  // namespace nhk
