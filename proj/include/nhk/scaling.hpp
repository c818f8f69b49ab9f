#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhk/types.hpp"

namespace nhk {

struct NelderMeadOptions {
  double xtol = 1e-6;     ///< simplex diameter (infinity norm)
  double ftol = 1e-10;    ///< spread of vertex values
  int max_iter = 2000;
  double initial_step = 0.1;  ///< relative; absolute 0.00025 for zero coordinates
  std::vector<double> steps;  ///< optional absolute per-coordinate steps
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5. Stops once both the diameter and the value spread are below
/// tolerance: a small spread alone is met by vertices straddling a minimum.
/// Throws InvalidInput if the objective is not finite at `init`.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> init,
                             const NelderMeadOptions& opts = {});

struct ScalingPoint {
  double w = 0.0;
  double y = 0.0;
  double y_err = 0.0;
};

struct ScalingDataset {
  std::map<int, std::vector<ScalingPoint>> curves;  ///< keyed by L
  std::string observable;

  /// Throws InvalidInput unless there are >= 3 sizes with >= 5 points each.
  void validate() const;
};

struct CollapseResult {
  double w_c = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct CollapseOptions {
  bool rescale_y = false;
  int grid_points = 200;
  /// Every curve must have at least this many raw points inside the
  /// shared x window, otherwise the candidate is penalized.
  int min_points_in_overlap = 4;
  double penalty = 10.0;
  /// Starting values are spread over these ranges on a 4x4 lattice.
  double w_c_lo = 0.0, w_c_hi = 1.0;
  double alpha_lo = 0.5, alpha_hi = 2.0;
  NelderMeadOptions nm{};
};

/// Mean over L pairs of (1 - cosine similarity) between the curves y(x)
/// with x = (W - w_c) L^alpha, linearly interpolated onto a shared grid.
/// The raw y values enter; the y rescaling L^{-beta} cancels in a cosine.
double collapse_objective(const ScalingDataset& data, double w_c, double alpha,
                          const CollapseOptions& opts = {});

/// beta minimizing the spread of ln|y_L| - beta ln L on the shared window,
/// i.e. the least-squares slope of log curve norm against log L.
double fit_beta(const ScalingDataset& data, double w_c, double alpha,
                const CollapseOptions& opts = {});

class CollapseError : public NumericalError {
 public:
  CollapseError(const std::string& what, CollapseResult best)
      : NumericalError(what), best(best) {}
  CollapseResult best;
};

/// Multi-start Nelder-Mead over (w_c, alpha); beta is fitted afterwards when
/// opts.rescale_y is set, and is 0 otherwise. `init`, when given, adds one
/// more start.
CollapseResult collapse(const ScalingDataset& data, const CollapseOptions& opts = {},
                        const CollapseResult* init = nullptr);

struct CrossingResult {
  std::map<int, double> per_L;
  std::map<int, std::string> errors;
  double mean = 0.0;
};

/// Zero crossing of each curve by linear interpolation and their mean.
/// Throws InvalidInput if no curve has a crossing.
CrossingResult crossing_point(const ScalingDataset& data);

void to_json(nlohmann::json& j, const CollapseResult& r);
void to_json(nlohmann::json& j, const ScalingDataset& d);
void to_json(nlohmann::json& j, const CollapseOptions& o);

/// FNV-1a hash of the dataset's canonical JSON dump, as 16 hex digits.
std::string dataset_hash(const ScalingDataset& d);

}  // namespace nhk
