#include "nhk/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace nhk {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> init,
                             const NelderMeadOptions& opts) {
  const std::size_t n = init.size();
  if (n == 0) throw InvalidInput("nelder_mead: empty parameter vector");
  const double f0 = f(init);
  if (!std::isfinite(f0)) throw InvalidInput("nelder_mead: objective not finite at the initial point");

  std::vector<std::vector<double>> simplex(n + 1, init);
  std::vector<double> fv(n + 1, f0);
  for (std::size_t i = 0; i < n; ++i) {
    double step = i < opts.steps.size() ? opts.steps[i]
                  : init[i] != 0.0 ? opts.initial_step * init[i]
                                   : 0.00025;
    simplex[i + 1][i] += step;
    fv[i + 1] = f(simplex[i + 1]);
  }

  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  auto along = [&](const std::vector<double>& c, const std::vector<double>& towards, double t) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = c[k] + t * (towards[k] - c[k]);
    return x;
  };

  NelderMeadResult res;
  std::vector<std::size_t> order(n + 1);
  for (int it = 0;; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (std::size_t i : order) {
        s2.push_back(simplex[i]);
        f2.push_back(fv[i]);
      }
      simplex.swap(s2);
      fv.swap(f2);
    }
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[0][k]));
    const double spread = fv[n] - fv[0];
    res.iterations = it;
    if (diameter < opts.xtol && spread < opts.ftol) {
      res.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

    const std::vector<double> xr = along(centroid, simplex[n], -1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const std::vector<double> xe = along(centroid, simplex[n], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
      continue;
    }
    if (fr < fv[n]) {
      const std::vector<double> xc = along(centroid, xr, 0.5);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[n] = xc;
        fv[n] = fc;
        continue;
      }
    } else {
      const std::vector<double> xc = along(centroid, simplex[n], 0.5);
      const double fc = eval(xc);
      if (fc < fv[n]) {
        simplex[n] = xc;
        fv[n] = fc;
        continue;
      }
    }
    for (std::size_t i = 1; i <= n; ++i) {
      simplex[i] = along(simplex[0], simplex[i], 0.5);
      fv[i] = eval(simplex[i]);
    }
  }
  res.x = simplex[0];
  res.value = fv[0];
  return res;
}

void ScalingDataset::validate() const {
  if (curves.size() < 3) throw InvalidInput("scaling dataset needs >= 3 system sizes");
  for (const auto& [L, pts] : curves)
    if (pts.size() < 5)
      throw InvalidInput("scaling curve for L=" + std::to_string(L) + " has fewer than 5 points");
}

namespace {

struct Curve {
  double logL;
  std::vector<double> x, y;
};

// Rescaled curves sorted by x, or empty when a coordinate is not finite.
std::vector<Curve> rescale(const ScalingDataset& data, double w_c, double alpha) {
  std::vector<Curve> out;
  for (const auto& [L, pts] : data.curves) {
    std::vector<ScalingPoint> sorted = pts;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.w < b.w; });
    const double scale = std::pow(static_cast<double>(L), alpha);
    if (!std::isfinite(scale) || scale <= 0.0) return {};
    Curve c{std::log(static_cast<double>(L)), {}, {}};
    for (const auto& p : sorted) {
      c.x.push_back((p.w - w_c) * scale);
      c.y.push_back(p.y);
    }
    out.push_back(std::move(c));
  }
  return out;
}

// Slope at node i from the parabola through its neighbours (one-sided at the ends).
double node_slope(const Curve& c, std::size_t i) {
  const std::size_t n = c.x.size();
  if (n < 3) return (c.y[n - 1] - c.y[0]) / (c.x[n - 1] - c.x[0]);
  const std::size_t k = std::clamp<std::size_t>(i, 1, n - 2);
  const double h0 = c.x[k] - c.x[k - 1], h1 = c.x[k + 1] - c.x[k];
  const double d0 = (c.y[k] - c.y[k - 1]) / h0, d1 = (c.y[k + 1] - c.y[k]) / h1;
  if (i == k) return (h1 * d0 + h0 * d1) / (h0 + h1);
  if (i == 0) return d0 - h0 * (d1 - d0) / (h0 + h1);
  return d1 + h1 * (d1 - d0) / (h0 + h1);
}

// Cubic Hermite interpolation. Sparse curves (large L at large alpha) would
// otherwise bias the fit through the O(h^2) error of linear interpolation.
double interpolate(const Curve& c, double x) {
  auto it = std::lower_bound(c.x.begin(), c.x.end(), x);
  if (it == c.x.begin()) return c.y.front();
  if (it == c.x.end()) return c.y.back();
  const std::size_t i = static_cast<std::size_t>(it - c.x.begin());
  const double x0 = c.x[i - 1], x1 = c.x[i];
  if (x1 == x0) return c.y[i];
  const double h = x1 - x0, t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * c.y[i - 1] + (t3 - 2 * t2 + t) * h * node_slope(c, i - 1) +
         (-2 * t3 + 3 * t2) * c.y[i] + (t3 - t2) * h * node_slope(c, i);
}

struct Window {
  double lo = 0.0, hi = 0.0;
  double shortfall = 0.0;  ///< missing raw points summed over curves; 0 when usable
};

Window shared_window(const std::vector<Curve>& curves, int min_points) {
  Window w;
  w.lo = -std::numeric_limits<double>::infinity();
  w.hi = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    w.lo = std::max(w.lo, c.x.front());
    w.hi = std::min(w.hi, c.x.back());
  }
  if (!(w.hi > w.lo)) {
    w.shortfall = static_cast<double>(min_points * curves.size());
    return w;
  }
  for (const auto& c : curves) {
    const auto inside = std::count_if(c.x.begin(), c.x.end(), [&](double x) { return x >= w.lo && x <= w.hi; });
    w.shortfall += std::max<double>(0.0, min_points - static_cast<double>(inside));
  }
  return w;
}

std::vector<std::vector<double>> sample_on_grid(const std::vector<Curve>& curves, const Window& w,
                                                int points) {
  std::vector<std::vector<double>> out;
  for (const auto& c : curves) {
    std::vector<double> ys(points);
    for (int g = 0; g < points; ++g) ys[g] = interpolate(c, w.lo + (w.hi - w.lo) * g / (points - 1));
    out.push_back(std::move(ys));
  }
  return out;
}

}  // namespace

double collapse_objective(const ScalingDataset& data, double w_c, double alpha,
                          const CollapseOptions& opts) {
  const std::vector<Curve> curves = rescale(data, w_c, alpha);
  if (curves.size() < 2) return opts.penalty + 1.0;
  const Window w = shared_window(curves, opts.min_points_in_overlap);
  if (w.shortfall > 0.0) return opts.penalty + 0.1 * w.shortfall;
  const auto ys = sample_on_grid(curves, w, opts.grid_points);

  double total = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = i + 1; j < ys.size(); ++j) {
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (int g = 0; g < opts.grid_points; ++g) {
        dot += ys[i][g] * ys[j][g];
        ni += ys[i][g] * ys[i][g];
        nj += ys[j][g] * ys[j][g];
      }
      if (ni == 0.0 || nj == 0.0) return opts.penalty;
      total += 1.0 - dot / std::sqrt(ni * nj);
      ++pairs;
    }
  return total / pairs;
}

double fit_beta(const ScalingDataset& data, double w_c, double alpha, const CollapseOptions& opts) {
  const std::vector<Curve> curves = rescale(data, w_c, alpha);
  const Window w = shared_window(curves, 2);
  if (curves.size() < 2 || !(w.hi > w.lo)) throw InvalidInput("fit_beta: no shared window");
  const auto ys = sample_on_grid(curves, w, opts.grid_points);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    double ss = 0.0;
    for (double v : ys[i]) ss += v * v;
    if (!(ss > 0.0)) throw InvalidInput("fit_beta: curve vanishes on the shared window");
    lx.push_back(curves[i].logL);
    ly.push_back(0.5 * std::log(ss / opts.grid_points));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

CollapseResult collapse(const ScalingDataset& data, const CollapseOptions& opts,
                        const CollapseResult* init) {
  data.validate();
  Objective f = [&](const std::vector<double>& x) { return collapse_objective(data, x[0], x[1], opts); };
  NelderMeadOptions nm = opts.nm;
  if (nm.steps.empty())
    nm.steps = {std::max(1e-3, (opts.w_c_hi - opts.w_c_lo) / 8.0),
                std::max(1e-3, (opts.alpha_hi - opts.alpha_lo) / 8.0)};

  std::vector<std::vector<double>> starts;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      starts.push_back({opts.w_c_lo + (opts.w_c_hi - opts.w_c_lo) * i / 3.0,
                        opts.alpha_lo + (opts.alpha_hi - opts.alpha_lo) * k / 3.0});
  if (init) starts.push_back({init->w_c, init->alpha});

  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (const auto& s : starts) {
    const NelderMeadResult r = nelder_mead(f, s, nm);
    total_iterations += r.iterations;
    if (r.value < best.value) best = r;
  }

  CollapseResult out;
  out.w_c = best.x[0];
  out.alpha = best.x[1];
  out.objective = best.value;
  out.iterations = total_iterations;
  out.converged = best.converged && best.value < opts.penalty;
  if (!out.converged) throw CollapseError("collapse: Nelder-Mead did not converge", out);
  if (opts.rescale_y) out.beta = fit_beta(data, out.w_c, out.alpha, opts);
  return out;
}

CrossingResult crossing_point(const ScalingDataset& data) {
  CrossingResult res;
  for (const auto& [L, pts] : data.curves) {
    std::vector<ScalingPoint> s = pts;
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.w < b.w; });
    std::vector<double> roots;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].y == 0.0) {
        roots.push_back(s[i].w);
        continue;
      }
      if (i + 1 < s.size() && s[i + 1].y != 0.0 && (s[i].y < 0.0) != (s[i + 1].y < 0.0)) {
        const double t = s[i].y / (s[i].y - s[i + 1].y);
        roots.push_back(s[i].w + t * (s[i + 1].w - s[i].w));
      }
    }
    if (roots.empty())
      res.errors[L] = "no sign change";
    else if (roots.size() > 1)
      res.errors[L] = std::to_string(roots.size()) + " sign changes";
    else
      res.per_L[L] = roots.front();
  }
  if (res.per_L.empty()) throw InvalidInput("crossing_point: no curve crosses zero exactly once");
  for (const auto& [L, w] : res.per_L) res.mean += w;
  res.mean /= static_cast<double>(res.per_L.size());
  return res;
}

void to_json(nlohmann::json& j, const CollapseResult& r) {
  j = nlohmann::json{{"W_c", r.w_c},           {"alpha", r.alpha},
                     {"beta", r.beta},         {"objective", r.objective},
                     {"iterations", r.iterations}, {"converged", r.converged}};
}

void to_json(nlohmann::json& j, const ScalingDataset& d) {
  j = nlohmann::json::object();
  j["observable"] = d.observable;
  nlohmann::json curves = nlohmann::json::object();
  for (const auto& [L, pts] : d.curves) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pts) arr.push_back({p.w, p.y, p.y_err});
    curves[std::to_string(L)] = arr;
  }
  j["curves"] = curves;
}

void to_json(nlohmann::json& j, const CollapseOptions& o) {
  j = nlohmann::json{{"rescale_y", o.rescale_y},
                     {"grid_points", o.grid_points},
                     {"min_points_in_overlap", o.min_points_in_overlap},
                     {"W_c_range", {o.w_c_lo, o.w_c_hi}},
                     {"alpha_range", {o.alpha_lo, o.alpha_hi}},
                     {"xtol", o.nm.xtol},
                     {"ftol", o.nm.ftol},
                     {"max_iter", o.nm.max_iter}};
}

std::string dataset_hash(const ScalingDataset& d) {
  const std::string text = nlohmann::json(d).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nhk
