#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhk/krylov_dynamics.hpp"
#include "nhk/model.hpp"

namespace nhk {

enum class Metric { Complexity, Lanczos, Csr, Entropy };

Metric parse_metric(const std::string& name);
std::string to_string(Metric m);

struct TimeGridSpec {
  double log_lo = 1e-3;
  double log_hi = 1e4;
  int log_points = 200;
  int linear_points = 20;
  double linear_hi = 0.01;
  /// Times at which C_K and I_K are also reported as scalars.
  std::vector<double> snapshots = {300.0, 1000.0, 1e4};

  /// Sorted union of the log grid, the linear early-time grid and the snapshots.
  std::vector<double> grid() const;
};

struct ExperimentConfig {
  std::vector<int> L_list;
  std::vector<double> w_gamma_grid;
  /// Realizations per (L, W_gamma); 0 selects 200 (L <= 8), 50 (L = 10), 20 (L >= 12).
  int realizations = 0;
  std::map<int, int> realizations_by_L;
  double J = 1.0;
  double h = 0.5;
  double w_delta = 1.0;
  TimeGridSpec time;
  std::set<Metric> metrics = {Metric::Complexity};
  std::uint64_t base_seed = 20240601;
  EvolutionMethod evolution = EvolutionMethod::Spectral;
  /// Cap on the Krylov dimension (0 = full). Chain dynamics beyond the
  /// early-time window need the full chain.
  int lanczos_max_dim = 0;
  std::vector<int> reciprocity_depths = {4, 5, 6};
  int threads = 1;
  bool keep_records = false;

  void validate() const;
  int realizations_for(int L) const;
  SpinChainParams params(int L, double w_gamma) const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Metrics of one disorder realization.
struct RealizationRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> profiles;
};

/// Computes the requested metrics for a single realization. Never throws for
/// numerical failures; they are returned in `error`.
RealizationRecord run_realization(const ExperimentConfig& config, int L, double w_gamma,
                                  std::uint64_t seed, int index = 0);

struct MetricAggregate {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single record
  double sem = 0.0;
  int count = 0;
  bool sem_defined = false;  ///< false when count == 1
};

struct ProfileAggregate {
  std::vector<double> mean;
  int count = 0;
  int truncated = 0;  ///< records longer than the common length
};

struct PointAggregate {
  int L = 0;
  int w_index = 0;
  double w_gamma = 0.0;
  int attempted = 0;
  int succeeded = 0;
  bool flagged = false;  ///< more than 20% of realizations failed
  std::vector<std::string> failures;
  std::map<std::string, MetricAggregate> scalars;
  std::map<std::string, ProfileAggregate> profiles;
  std::vector<RealizationRecord> records;
};

/// Mean, spread and standard error of every scalar over successful records
/// (in record order) and elementwise means of every profile, truncated to
/// the shortest one. Throws InvalidInput if no record succeeded.
PointAggregate aggregate(std::span<const RealizationRecord> records);

struct ResultStore {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  nlohmann::json config;
  std::vector<double> times;
  std::vector<PointAggregate> points;

  const PointAggregate* find(int L, double w_gamma) const;
};

/// Runs every (L, W_gamma) point. Realization r at grid point (L, i) uses
/// derive_seed(base_seed, L, i, r). With a checkpoint directory, the store
/// is persisted after each point and points already present there (for an
/// identical config) are not recomputed.
ResultStore run_sweep(const ExperimentConfig& config,
                      const std::filesystem::path* checkpoint_dir = nullptr);

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `store.json` plus CSV summaries into `dir`.
void persist(const ResultStore& store, const std::filesystem::path& dir);
/// Reads `store.json` from `path` (a directory or the file itself).
/// Throws StoreError on parse errors or schema mismatch.
ResultStore load(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ResultStore& s);
void from_json(const nlohmann::json& j, ResultStore& s);

}  // namespace nhk
