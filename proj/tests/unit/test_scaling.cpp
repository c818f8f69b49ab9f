#include <doctest.h>

#include <cmath>

#include "nhk/rng.hpp"
#include "nhk/scaling.hpp"

using namespace nhk;

namespace {

ScalingDataset synthetic(double w_c, double alpha, double y_power, double noise, std::uint64_t seed,
                         double scale = 1.0) {
  ScalingDataset d;
  d.observable = "synthetic";
  Rng rng(seed);
  for (int L : {6, 8, 10, 12}) {
    for (int i = 0; i <= 24; ++i) {
      const double w = 0.4 + 1.2 * i / 24.0;
      double y = scale * std::pow(L, y_power) * std::tanh((w - w_c) * std::pow(L, alpha));
      y *= 1.0 + noise * rng.normal();
      d.curves[L].push_back({w, y, 0.0});
    }
  }
  return d;
}

}  // namespace

TEST_SUITE("scaling") {
  TEST_CASE("Nelder-Mead on a parabola") {
    const auto r = nelder_mead([](const std::vector<double>& x) { return (x[0] - 3) * (x[0] - 3); }, {0.0});
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-5));
  }

  TEST_CASE("Nelder-Mead on Rosenbrock") {
    NelderMeadOptions o;
    o.xtol = 1e-9;
    o.ftol = 1e-16;
    o.max_iter = 5000;
    const auto r = nelder_mead(
        [](const std::vector<double>& x) {
          return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
        },
        {-1.2, 1.0}, o);
    CHECK(r.converged);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-3);
    CHECK(std::abs(r.x[1] - 1.0) < 1e-3);
  }

  TEST_CASE("Nelder-Mead on a constant returns the start") {
    const auto r = nelder_mead([](const std::vector<double>&) { return 4.0; }, {0.3, -2.0});
    CHECK(r.converged);
    CHECK(r.x == std::vector<double>{0.3, -2.0});
  }

  TEST_CASE("Nelder-Mead flags exhausted budgets and bad starts") {
    NelderMeadOptions o;
    o.max_iter = 3;
    o.ftol = 0.0;
    o.xtol = 0.0;
    const auto r = nelder_mead([](const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1]; }, {5.0, 5.0}, o);
    CHECK(!r.converged);
    CHECK_THROWS_AS(nelder_mead([](const std::vector<double>&) { return std::nan(""); }, {1.0}), InvalidInput);
  }

  TEST_CASE("noise-free collapse recovers the generator") {
    // y = L^{0.5} f((W - 1) L^{0.8}); with y' = y L^{-beta} this is beta = +0.5
    const auto d = synthetic(1.0, 0.8, 0.5, 0.0, 1);
    CollapseOptions o;
    o.rescale_y = true;
    o.w_c_lo = 0.6;
    o.w_c_hi = 1.4;
    const auto r = collapse(d, o);
    CHECK(r.converged);
    CHECK(r.w_c == doctest::Approx(1.0).epsilon(0.02));
    CHECK(r.alpha == doctest::Approx(0.8).epsilon(0.02));
    CHECK(r.beta == doctest::Approx(0.5).epsilon(0.02));
    CHECK(r.objective >= 0.0);
    CHECK(r.objective < 1e-4);
  }

  TEST_CASE("beta is zero without y rescaling") {
    const auto d = synthetic(1.0, 0.8, 0.0, 0.0, 2);
    CollapseOptions o;
    o.w_c_lo = 0.6;
    o.w_c_hi = 1.4;
    const auto r = collapse(d, o);
    CHECK(r.beta == 0.0);
    CHECK(r.w_c == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("common y rescaling leaves the argmin unchanged") {
    CollapseOptions o;
    o.rescale_y = true;
    o.w_c_lo = 0.6;
    o.w_c_hi = 1.4;
    const auto a = collapse(synthetic(1.0, 0.8, 0.5, 0.005, 3), o);
    const auto b = collapse(synthetic(1.0, 0.8, 0.5, 0.005, 3, 2.0), o);
    CHECK(std::abs(a.w_c - b.w_c) < 1e-4);
    CHECK(std::abs(a.alpha - b.alpha) < 1e-4);
    CHECK(std::abs(a.beta - b.beta) < 1e-4);
  }

  TEST_CASE("objective does not depend on how curves were inserted") {
    const auto d = synthetic(1.0, 0.8, 0.5, 0.01, 4);
    ScalingDataset r;
    for (auto it = d.curves.rbegin(); it != d.curves.rend(); ++it) {
      auto pts = it->second;
      std::reverse(pts.begin(), pts.end());
      r.curves[it->first] = pts;
    }
    for (double wc : {0.8, 1.0, 1.1})
      CHECK(collapse_objective(d, wc, 0.7) == doctest::Approx(collapse_objective(r, wc, 0.7)).epsilon(1e-14));
  }

  TEST_CASE("empty overlap is penalized") {
    ScalingDataset d = synthetic(1.0, 0.8, 0.0, 0.0, 5);
    CollapseOptions o;
    CHECK(collapse_objective(d, 1.0, 0.8, o) < 1e-3);
    CHECK(collapse_objective(d, 1.0, 40.0, o) >= o.penalty);
  }

  TEST_CASE("dataset validation") {
    ScalingDataset d;
    d.curves[6] = {{0, 1, 0}, {1, 2, 0}, {2, 3, 0}, {3, 4, 0}, {4, 5, 0}};
    d.curves[8] = d.curves[6];
    CHECK_THROWS_AS(d.validate(), InvalidInput);
    d.curves[10] = {{0, 1, 0}};
    CHECK_THROWS_AS(d.validate(), InvalidInput);
  }

  TEST_CASE("crossing points") {
    ScalingDataset d;
    for (int L : {6, 8, 10})
      for (int i = 0; i < 7; ++i) d.curves[L].push_back({0.5 * i + 0.3, 0.5 * i + 0.3 - 2.0, 0.0});
    const auto c = crossing_point(d);
    CHECK(c.mean == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.per_L.size() == 3);

    ScalingDataset pos;
    for (int i = 0; i < 6; ++i) pos.curves[6].push_back({double(i), 1.0 + i, 0.0});
    CHECK_THROWS_AS(crossing_point(pos), InvalidInput);
    pos.curves[8] = d.curves[8];
    const auto partial = crossing_point(pos);
    CHECK(partial.errors.count(6) == 1);
    CHECK(partial.per_L.count(8) == 1);
  }

  TEST_CASE("provenance JSON") {
    const auto d = synthetic(1.0, 0.8, 0.0, 0.0, 6);
    CHECK(dataset_hash(d) == dataset_hash(d));
    CHECK(dataset_hash(d).size() == 16);
    auto e = d;
    e.curves[6][0].y += 1e-9;
    CHECK(dataset_hash(d) != dataset_hash(e));
    const nlohmann::json j = CollapseResult{1.0, 0.8, 0.1, 1e-5, 10, true};
    CHECK(j.at("W_c") == 1.0);
    const nlohmann::json o = CollapseOptions{};
    CHECK(o.at("grid_points") == 200);
  }
}
