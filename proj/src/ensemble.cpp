#include "nhk/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "nhk/bilanczos.hpp"
#include "nhk/entanglement.hpp"
#include "nhk/lanczos_metrics.hpp"
#include "nhk/rng.hpp"
#include "nhk/spectral.hpp"

namespace nhk {

Metric parse_metric(const std::string& name) {
  if (name == "complexity") return Metric::Complexity;
  if (name == "lanczos") return Metric::Lanczos;
  if (name == "csr") return Metric::Csr;
  if (name == "entropy") return Metric::Entropy;
  throw InvalidInput("unknown metric '" + name + "' (expected complexity, lanczos, csr, entropy)");
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Complexity: return "complexity";
    case Metric::Lanczos: return "lanczos";
    case Metric::Csr: return "csr";
    case Metric::Entropy: return "entropy";
  }
  return "?";
}

namespace {

std::string time_label(double t) {
  std::ostringstream os;
  if (t == std::floor(t) && t < 1e15)
    os << static_cast<long long>(t);
  else
    os << t;
  return os.str();
}

}  // namespace

std::vector<double> TimeGridSpec::grid() const {
  std::vector<double> g;
  if (log_points >= 2) g = log_grid(log_lo, log_hi, log_points);
  for (int k = 0; k < linear_points; ++k) g.push_back(linear_hi * k / linear_points);
  for (double t : snapshots) g.push_back(t);
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double t : g)
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  return out;
}

void ExperimentConfig::validate() const {
  if (L_list.empty()) throw InvalidInput("config: L_list is empty");
  if (w_gamma_grid.empty()) throw InvalidInput("config: W_gamma grid is empty");
  if (realizations < 0) throw InvalidInput("config: realizations must be >= 1");
  for (const auto& [L, n] : realizations_by_L)
    if (n < 1) throw InvalidInput("config: realizations must be >= 1");
  if (metrics.empty()) throw InvalidInput("config: no metrics selected");
  if (threads < 1) throw InvalidInput("config: threads must be >= 1");
  for (int L : L_list) params(L, 0.0).validate();
  for (double w : w_gamma_grid)
    if (!(w >= 0.0)) throw InvalidInput("config: W_gamma must be >= 0");
  if (metrics.count(Metric::Entropy))
    for (int L : L_list)
      if (L % 2) throw InvalidInput("config: entropy needs even L");
}

int ExperimentConfig::realizations_for(int L) const {
  if (auto it = realizations_by_L.find(L); it != realizations_by_L.end()) return it->second;
  if (realizations > 0) return realizations;
  return L <= 8 ? 200 : L <= 10 ? 50 : 20;
}

SpinChainParams ExperimentConfig::params(int L, double w_gamma) const {
  SpinChainParams p;
  p.L = L;
  p.J = J;
  p.h = h;
  p.w_delta = w_delta;
  p.w_gamma = w_gamma;
  return p;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> metrics;
  for (Metric m : c.metrics) metrics.push_back(to_string(m));
  nlohmann::json by_L = nlohmann::json::object();
  for (const auto& [L, n] : c.realizations_by_L) by_L[std::to_string(L)] = n;
  j = nlohmann::json{
      {"L_list", c.L_list},
      {"W_gamma_grid", c.w_gamma_grid},
      {"realizations", c.realizations},
      {"realizations_by_L", by_L},
      {"J", c.J},
      {"h", c.h},
      {"W_delta", c.w_delta},
      {"time_grid",
       {{"log_lo", c.time.log_lo},
        {"log_hi", c.time.log_hi},
        {"log_points", c.time.log_points},
        {"linear_points", c.time.linear_points},
        {"linear_hi", c.time.linear_hi},
        {"snapshots", c.time.snapshots}}},
      {"metrics", metrics},
      {"base_seed", c.base_seed},
      {"evolution", c.evolution == EvolutionMethod::Spectral ? "spectral" : "rk45"},
      {"lanczos_max_dim", c.lanczos_max_dim},
      {"reciprocity_depths", c.reciprocity_depths},
      {"threads", c.threads},
      {"keep_records", c.keep_records}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c.L_list = j.at("L_list").get<std::vector<int>>();
  if (j.at("W_gamma_grid").is_object()) {
    const auto& g = j.at("W_gamma_grid");
    const double lo = g.at("lo").get<double>(), hi = g.at("hi").get<double>();
    const int n = g.at("count").get<int>();
    const std::string spacing = g.value("spacing", "log");
    if (n < 1) throw InvalidInput("config: W_gamma_grid.count must be >= 1");
    c.w_gamma_grid.clear();
    if (n == 1) {
      c.w_gamma_grid.push_back(lo);
    } else if (spacing == "log") {
      c.w_gamma_grid = log_grid(lo, hi, n);
    } else if (spacing == "linear") {
      for (int i = 0; i < n; ++i) c.w_gamma_grid.push_back(lo + (hi - lo) * i / (n - 1));
    } else {
      throw InvalidInput("config: W_gamma_grid.spacing must be log or linear");
    }
  } else {
    c.w_gamma_grid = j.at("W_gamma_grid").get<std::vector<double>>();
  }
  c.realizations = j.value("realizations", c.realizations);
  c.realizations_by_L.clear();
  if (j.contains("realizations_by_L"))
    for (const auto& [k, v] : j.at("realizations_by_L").items()) c.realizations_by_L[std::stoi(k)] = v.get<int>();
  c.J = j.value("J", c.J);
  c.h = j.value("h", c.h);
  c.w_delta = j.value("W_delta", c.w_delta);
  if (j.contains("time_grid")) {
    const auto& t = j.at("time_grid");
    c.time.log_lo = t.value("log_lo", c.time.log_lo);
    c.time.log_hi = t.value("log_hi", c.time.log_hi);
    c.time.log_points = t.value("log_points", c.time.log_points);
    c.time.linear_points = t.value("linear_points", c.time.linear_points);
    c.time.linear_hi = t.value("linear_hi", c.time.linear_hi);
    if (t.contains("snapshots")) c.time.snapshots = t.at("snapshots").get<std::vector<double>>();
  }
  if (j.contains("metrics")) {
    c.metrics.clear();
    for (const auto& m : j.at("metrics")) c.metrics.insert(parse_metric(m.get<std::string>()));
  }
  c.base_seed = j.value("base_seed", c.base_seed);
  const std::string evo = j.value("evolution", std::string("spectral"));
  if (evo == "spectral")
    c.evolution = EvolutionMethod::Spectral;
  else if (evo == "rk45")
    c.evolution = EvolutionMethod::RungeKutta;
  else
    throw InvalidInput("config: evolution must be spectral or rk45");
  c.lanczos_max_dim = j.value("lanczos_max_dim", c.lanczos_max_dim);
  if (j.contains("reciprocity_depths")) c.reciprocity_depths = j.at("reciprocity_depths").get<std::vector<int>>();
  c.threads = j.value("threads", c.threads);
  c.keep_records = j.value("keep_records", c.keep_records);
}

RealizationRecord run_realization(const ExperimentConfig& config, int L, double w_gamma,
                                  std::uint64_t seed, int index) {
  RealizationRecord rec;
  rec.index = index;
  rec.seed = seed;
  try {
    const SpinChainParams params = config.params(L, w_gamma);
    const DisorderRealization disorder = sample_disorder(params, seed);
    const DenseOperator H = build_hamiltonian(params, disorder);
    const auto& m = config.metrics;

    if (m.count(Metric::Complexity) || m.count(Metric::Lanczos)) {
      BiLanczosOptions opts;
      opts.max_dim = config.lanczos_max_dim;
      opts.keep_basis = false;
      const BiLanczosResult chain = tridiagonalize(H, initial_plus_state(L), opts);
      const TridiagonalForm& form = chain.form;
      rec.scalars["K"] = form.K();
      rec.scalars["breakdown"] = chain.breakdown ? 1.0 : 0.0;

      if (m.count(Metric::Lanczos)) {
        if (form.K() >= 5) rec.scalars["sigma_K2"] = krylov_variance(form);
        for (int d : config.reciprocity_depths)
          if (d <= form.K() - 1) rec.scalars["R_K_" + std::to_string(d)] = reciprocity(form, d);
        std::vector<double> ab, ac;
        for (int n = 1; n < form.K(); ++n) {
          ab.push_back(std::abs(form.b[n - 1]));
          ac.push_back(std::abs(form.c[n - 1]));
        }
        rec.profiles["abs_b"] = std::move(ab);
        rec.profiles["abs_c"] = std::move(ac);
        rec.profiles["cos_theta"] = cos_theta(form);
      }
      if (m.count(Metric::Complexity)) {
        EvolveOptions eo;
        eo.method = config.evolution;
        const std::vector<double> times = config.time.grid();
        const auto wfs = evolve_krylov_chain(form, times, eo);
        const DiagnosticTrace trace = DiagnosticTrace::from(wfs);
        rec.profiles["C_K"] = trace.c_k;
        rec.profiles["I_K"] = trace.i_k;
        rec.profiles["raw_log_norm"] = trace.raw_log_norm;
        for (double ts : config.time.snapshots) {
          const auto it = std::find(times.begin(), times.end(), ts);
          if (it == times.end()) continue;
          const auto k = static_cast<std::size_t>(it - times.begin());
          rec.scalars["C_K_t" + time_label(ts)] = trace.c_k[k];
          rec.scalars["I_K_t" + time_label(ts)] = trace.i_k[k];
        }
        try {
          rec.scalars["early_a"] = early_time_coefficient(trace);
        } catch (const InvalidInput&) {
          // time grid without an early window
        }
      }
    }

    if (m.count(Metric::Csr) || m.count(Metric::Entropy)) {
      const bool vectors = m.count(Metric::Entropy) > 0;
      const EigenDecomposition eig = eigendecompose(H, vectors);
      if (m.count(Metric::Csr)) {
        Spectrum s;
        s.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
        const CsrSample csr = csr_ratios(s);
        rec.scalars["csr_r"] = mean_radial(csr);
        rec.scalars["csr_cos"] = mean_angular(csr);
      }
      if (vectors) {
        const EntropySample es = eigenstate_entropies(eig.values, *eig.right, L);
        rec.scalars["S_mean"] = es.mean();
        rec.scalars["S_max"] = es.max();
        rec.scalars["S_sq_mean"] = es.mean_square();
      }
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.scalars.clear();
    rec.profiles.clear();
  }
  return rec;
}

PointAggregate aggregate(std::span<const RealizationRecord> records) {
  PointAggregate agg;
  agg.attempted = static_cast<int>(records.size());
  std::vector<const RealizationRecord*> good;
  for (const auto& r : records) {
    if (r.ok)
      good.push_back(&r);
    else
      agg.failures.push_back("seed " + std::to_string(r.seed) + ": " + r.error);
  }
  agg.succeeded = static_cast<int>(good.size());
  agg.flagged = agg.attempted > 0 && 5 * (agg.attempted - agg.succeeded) > agg.attempted;
  if (good.empty()) throw InvalidInput("aggregate: no successful realization");

  std::map<std::string, std::vector<double>> values;
  for (const auto* r : good)
    for (const auto& [k, v] : r->scalars) values[k].push_back(v);
  for (const auto& [k, vs] : values) {
    MetricAggregate m;
    m.count = static_cast<int>(vs.size());
    double s = 0.0;
    for (double v : vs) s += v;
    m.mean = s / m.count;
    if (m.count > 1) {
      double ss = 0.0;
      for (double v : vs) ss += (v - m.mean) * (v - m.mean);
      m.std = std::sqrt(ss / (m.count - 1));
      m.sem = m.std / std::sqrt(static_cast<double>(m.count));
      m.sem_defined = true;
    }
    agg.scalars[k] = m;
  }

  std::map<std::string, std::vector<const std::vector<double>*>> profiles;
  for (const auto* r : good)
    for (const auto& [k, v] : r->profiles) profiles[k].push_back(&v);
  for (const auto& [k, list] : profiles) {
    std::size_t len = list.front()->size();
    for (const auto* v : list) len = std::min(len, v->size());
    ProfileAggregate p;
    p.count = static_cast<int>(list.size());
    p.mean.assign(len, 0.0);
    for (const auto* v : list) {
      if (v->size() > len) ++p.truncated;
      for (std::size_t i = 0; i < len; ++i) p.mean[i] += (*v)[i];
    }
    for (double& x : p.mean) x /= p.count;
    agg.profiles[k] = std::move(p);
  }
  return agg;
}

const PointAggregate* ResultStore::find(int L, double w_gamma) const {
  for (const auto& p : points)
    if (p.L == L && std::abs(p.w_gamma - w_gamma) <= 1e-12 * std::max(1.0, std::abs(w_gamma))) return &p;
  return nullptr;
}

namespace {

// Settings that change results; the grids themselves may grow between runs.
nlohmann::json comparable(nlohmann::json config) {
  for (const char* k : {"threads", "keep_records", "L_list", "W_gamma_grid"}) config.erase(k);
  return config;
}

std::vector<RealizationRecord> run_point(const ExperimentConfig& config, int L, int w_index) {
  const double w = config.w_gamma_grid[w_index];
  const int n = config.realizations_for(L);
  std::vector<RealizationRecord> records(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < n; r = next++)
      records[r] = run_realization(config, L, w, derive_seed(config.base_seed, L, w_index, r), r);
  };
  const int threads = std::min(config.threads, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

}  // namespace

ResultStore run_sweep(const ExperimentConfig& config, const std::filesystem::path* checkpoint_dir) {
  config.validate();
  ResultStore store;
  store.config = config;
  store.times = config.metrics.count(Metric::Complexity) ? config.time.grid() : std::vector<double>{};

  ResultStore previous;
  bool resume = false;
  if (checkpoint_dir && std::filesystem::exists(*checkpoint_dir / "store.json")) {
    previous = load(*checkpoint_dir);
    resume = comparable(previous.config) == comparable(store.config);
  }

  for (int L : config.L_list) {
    for (int i = 0; i < static_cast<int>(config.w_gamma_grid.size()); ++i) {
      const double w = config.w_gamma_grid[i];
      if (resume) {
        if (const PointAggregate* done = previous.find(L, w); done && done->w_index == i) {
          store.points.push_back(*done);
          continue;
        }
      }
      const std::vector<RealizationRecord> records = run_point(config, L, i);
      PointAggregate agg;
      try {
        agg = aggregate(records);
      } catch (const InvalidInput&) {
        agg.attempted = static_cast<int>(records.size());
        agg.flagged = true;
        for (const auto& r : records) agg.failures.push_back("seed " + std::to_string(r.seed) + ": " + r.error);
      }
      agg.L = L;
      agg.w_index = i;
      agg.w_gamma = w;
      if (config.keep_records) agg.records = records;
      store.points.push_back(std::move(agg));
      if (checkpoint_dir) persist(store, *checkpoint_dir);
    }
  }
  return store;
}

// ---- serialization -------------------------------------------------------

namespace {

nlohmann::json record_json(const RealizationRecord& r) {
  return {{"index", r.index}, {"seed", r.seed}, {"ok", r.ok}, {"error", r.error},
          {"scalars", r.scalars}, {"profiles", r.profiles}};
}

RealizationRecord record_from(const nlohmann::json& j) {
  RealizationRecord r;
  r.index = j.at("index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.scalars = j.at("scalars").get<std::map<std::string, double>>();
  r.profiles = j.at("profiles").get<std::map<std::string, std::vector<double>>>();
  return r;
}

nlohmann::json point_json(const PointAggregate& p) {
  nlohmann::json scalars = nlohmann::json::object();
  for (const auto& [k, m] : p.scalars)
    scalars[k] = {{"mean", m.mean}, {"std", m.std}, {"sem", m.sem}, {"count", m.count},
                  {"sem_defined", m.sem_defined}};
  nlohmann::json profiles = nlohmann::json::object();
  for (const auto& [k, pr] : p.profiles)
    profiles[k] = {{"mean", pr.mean}, {"count", pr.count}, {"truncated", pr.truncated}};
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : p.records) records.push_back(record_json(r));
  return {{"L", p.L},           {"w_index", p.w_index},     {"W_gamma", p.w_gamma},
          {"attempted", p.attempted}, {"succeeded", p.succeeded}, {"flagged", p.flagged},
          {"failures", p.failures},   {"scalars", scalars},       {"profiles", profiles},
          {"records", records}};
}

PointAggregate point_from(const nlohmann::json& j) {
  PointAggregate p;
  p.L = j.at("L").get<int>();
  p.w_index = j.at("w_index").get<int>();
  p.w_gamma = j.at("W_gamma").get<double>();
  p.attempted = j.at("attempted").get<int>();
  p.succeeded = j.at("succeeded").get<int>();
  p.flagged = j.at("flagged").get<bool>();
  p.failures = j.at("failures").get<std::vector<std::string>>();
  for (const auto& [k, v] : j.at("scalars").items()) {
    MetricAggregate m;
    m.mean = v.at("mean").get<double>();
    m.std = v.at("std").get<double>();
    m.sem = v.at("sem").get<double>();
    m.count = v.at("count").get<int>();
    m.sem_defined = v.at("sem_defined").get<bool>();
    p.scalars[k] = m;
  }
  for (const auto& [k, v] : j.at("profiles").items()) {
    ProfileAggregate pr;
    pr.mean = v.at("mean").get<std::vector<double>>();
    pr.count = v.at("count").get<int>();
    pr.truncated = v.at("truncated").get<int>();
    p.profiles[k] = std::move(pr);
  }
  for (const auto& r : j.at("records")) p.records.push_back(record_from(r));
  return p;
}

double mean_or_nan(const PointAggregate& p, const std::string& key) {
  const auto it = p.scalars.find(key);
  return it == p.scalars.end() ? std::nan("") : it->second.mean;
}

double sem_or_nan(const PointAggregate& p, const std::string& key) {
  const auto it = p.scalars.find(key);
  return it == p.scalars.end() ? std::nan("") : it->second.sem;
}

double std_or_nan(const PointAggregate& p, const std::string& key) {
  const auto it = p.scalars.find(key);
  return it == p.scalars.end() ? std::nan("") : it->second.std;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw StoreError("cannot write " + tmp.string());
    os << text;
    if (!os) throw StoreError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void to_json(nlohmann::json& j, const ResultStore& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : s.points) points.push_back(point_json(p));
  j = {{"schema_version", s.schema_version}, {"config", s.config}, {"times", s.times}, {"points", points}};
}

void from_json(const nlohmann::json& j, ResultStore& s) {
  s.schema_version = j.at("schema_version").get<int>();
  s.config = j.at("config");
  s.times = j.at("times").get<std::vector<double>>();
  s.points.clear();
  for (const auto& p : j.at("points")) s.points.push_back(point_from(p));
}

void persist(const ResultStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "store.json", nlohmann::json(store).dump(1));

  std::ostringstream lz, csr, ent, cx;
  lz << std::setprecision(12);
  csr << std::setprecision(12);
  ent << std::setprecision(12);
  cx << std::setprecision(12);
  lz << "L,W_gamma,sigma_K2_mean,sigma_K2_sem,R_K_4,R_K_5,R_K_6\n";
  csr << "L,W_gamma,r_mean,r_sem,cos_theta_mean,cos_theta_sem,n_realizations\n";
  ent << "L,W_gamma,S_mean,sigma_S\n";
  cx << "L,W_gamma,C_K_t300,C_K_t1000,C_K_t10000,I_K_t300,I_K_t1000,I_K_t10000,early_a\n";
  bool has_lz = false, has_csr = false, has_ent = false, has_cx = false;
  for (const auto& p : store.points) {
    if (p.scalars.count("R_K_4") || p.scalars.count("sigma_K2")) {
      has_lz = true;
      lz << p.L << ',' << p.w_gamma << ',' << mean_or_nan(p, "sigma_K2") << ',' << sem_or_nan(p, "sigma_K2")
         << ',' << mean_or_nan(p, "R_K_4") << ',' << mean_or_nan(p, "R_K_5") << ',' << mean_or_nan(p, "R_K_6")
         << '\n';
    }
    if (p.scalars.count("csr_r")) {
      has_csr = true;
      csr << p.L << ',' << p.w_gamma << ',' << mean_or_nan(p, "csr_r") << ',' << sem_or_nan(p, "csr_r") << ','
          << mean_or_nan(p, "csr_cos") << ',' << sem_or_nan(p, "csr_cos") << ',' << p.succeeded << '\n';
    }
    if (p.scalars.count("S_mean")) {
      has_ent = true;
      ent << p.L << ',' << p.w_gamma << ',' << mean_or_nan(p, "S_mean") << ',' << std_or_nan(p, "S_mean") << '\n';
    }
    if (p.profiles.count("C_K")) {
      has_cx = true;
      cx << p.L << ',' << p.w_gamma;
      for (const char* k : {"C_K_t300", "C_K_t1000", "C_K_t10000", "I_K_t300", "I_K_t1000", "I_K_t10000", "early_a"})
        cx << ',' << mean_or_nan(p, k);
      cx << '\n';
      std::ostringstream tr;
      tr << std::setprecision(12) << "t,c_k,i_k,raw_log_norm\n";
      const auto& ck = p.profiles.at("C_K").mean;
      const auto& ik = p.profiles.at("I_K").mean;
      const auto& ln = p.profiles.at("raw_log_norm").mean;
      for (std::size_t i = 0; i < ck.size() && i < store.times.size(); ++i)
        tr << store.times[i] << ',' << ck[i] << ',' << ik[i] << ',' << ln[i] << '\n';
      std::filesystem::create_directories(dir / "traces");
      write_file(dir / "traces" / ("trace_L" + std::to_string(p.L) + "_w" + std::to_string(p.w_index) + ".csv"),
                 tr.str());
    }
  }
  if (has_lz) write_file(dir / "lanczos.csv", lz.str());
  if (has_csr) write_file(dir / "csr.csv", csr.str());
  if (has_ent) write_file(dir / "entropy.csv", ent.str());
  if (has_cx) write_file(dir / "complexity.csv", cx.str());
}

ResultStore load(const std::filesystem::path& path) {
  const std::filesystem::path file =
      std::filesystem::is_directory(path) ? path / "store.json" : path;
  std::ifstream is(file);
  if (!is) throw StoreError("cannot open " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw StoreError("parse error in " + file.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version"))
    throw StoreError(file.string() + ": missing schema_version");
  const int version = j.at("schema_version").get<int>();
  if (version != ResultStore::kSchemaVersion)
    throw StoreError(file.string() + ": schema version " + std::to_string(version) +
                     " cannot be read by this build (supports version " +
                     std::to_string(ResultStore::kSchemaVersion) + "); migrate the store first");
  try {
    return j.get<ResultStore>();
  } catch (const nlohmann::json::exception& e) {
    throw StoreError("malformed store " + file.string() + ": " + e.what());
  }
}

}  // namespace nhk
