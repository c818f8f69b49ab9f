// nhk: batch driver for the non-Hermitian Krylov chain pipeline.
//
// Every subcommand writes manifest.json into --out with the resolved
// configuration, so any output can be regenerated from its manifest.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nhk/bilanczos.hpp"
#include "nhk/ensemble.hpp"
#include "nhk/entanglement.hpp"
#include "nhk/krylov_dynamics.hpp"
#include "nhk/lanczos_metrics.hpp"
#include "nhk/model.hpp"
#include "nhk/rng.hpp"
#include "nhk/scaling.hpp"
#include "nhk/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Raised while resolving arguments, before anything is written.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string format = "csv";
};

struct ModelFlags {
  std::vector<int> L;
  std::vector<double> w_gamma;
  std::optional<int> realizations;
  std::optional<double> J, h, w_delta;
  std::optional<int> max_dim;
  std::string method;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "base seed");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

void add_model(CLI::App* app, ModelFlags& m, bool lists) {
  if (lists) {
    app->add_option("--L", m.L, "chain lengths")->delimiter(',');
    app->add_option("--w-gamma", m.w_gamma, "W_gamma values")->delimiter(',');
    app->add_option("--realizations", m.realizations, "realizations per point")->check(CLI::PositiveNumber);
  }
  app->add_option("--J", m.J, "XY coupling");
  app->add_option("--field", m.h, "transverse field h");
  app->add_option("--w-delta", m.w_delta, "real disorder width");
  app->add_option("--max-dim", m.max_dim, "cap on the Krylov dimension (0 = full)");
  app->add_option("--method", m.method, "chain evolution")->check(CLI::IsMember({"rk45", "spectral"}));
}

nhk::ExperimentConfig resolve(const Common& c, const ModelFlags& m, std::set<nhk::Metric> metrics) {
  nhk::ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    std::ifstream is(c.config_path);
    try {
      cfg = json::parse(is).get<nhk::ExperimentConfig>();
    } catch (const json::exception& e) {
      throw UsageError("config " + c.config_path + ": " + e.what());
    } catch (const nhk::InvalidInput& e) {
      throw UsageError(e.what());
    }
  }
  if (!m.L.empty()) cfg.L_list = m.L;
  if (!m.w_gamma.empty()) cfg.w_gamma_grid = m.w_gamma;
  if (m.realizations) cfg.realizations = *m.realizations;
  if (m.J) cfg.J = *m.J;
  if (m.h) cfg.h = *m.h;
  if (m.w_delta) cfg.w_delta = *m.w_delta;
  if (m.max_dim) cfg.lanczos_max_dim = *m.max_dim;
  if (!m.method.empty())
    cfg.evolution = m.method == "rk45" ? nhk::EvolutionMethod::RungeKutta : nhk::EvolutionMethod::Spectral;
  if (c.seed) cfg.base_seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (!metrics.empty()) cfg.metrics = std::move(metrics);
  try {
    cfg.validate();
  } catch (const nhk::InvalidInput& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct Manifest {
  json body;
  fs::path dir;

  Manifest(std::string command, fs::path out, json config) : dir(std::move(out)) {
    body = {{"command", std::move(command)}, {"version", kVersion}, {"config", std::move(config)},
            {"outputs", json::array()}, {"status", "running"}};
  }
  void output(const std::string& name) { body["outputs"].push_back(name); }
  void finish() {
    body["status"] = "ok";
    write_json(dir / "manifest.json", body);
  }
  void fail(const std::string& error) {
    body["status"] = "failed";
    body["error"] = error;
    fs::create_directories(dir);
    write_json(dir / "manifest.json", body);
    write_text(dir / "failure.log", error + "\n");
  }
};

// ---- trace -------------------------------------------------------------------

struct TraceCmd {
  Common common;
  ModelFlags model;
  int L = 6;
  double w_gamma = 0.0;
  int realization = 0;
};

json trace_config(const TraceCmd& t, const nhk::SpinChainParams& p, std::uint64_t base, std::uint64_t seed,
                  const std::string& method, int max_dim) {
  return {{"params", p}, {"base_seed", base}, {"realization", t.realization}, {"disorder_seed", seed},
          {"method", method}, {"max_dim", max_dim}, {"times", nhk::default_time_grid()}};
}

void run_trace(const TraceCmd& t, Manifest& man, const nhk::SpinChainParams& params, std::uint64_t seed,
               const nhk::EvolveOptions& eo, int max_dim) {
  const nhk::DisorderRealization dis = nhk::sample_disorder(params, seed);
  const nhk::DenseOperator H = nhk::build_hamiltonian(params, dis);
  nhk::BiLanczosOptions bo;
  bo.keep_basis = false;
  bo.max_dim = max_dim;
  const nhk::BiLanczosResult chain = nhk::tridiagonalize(H, nhk::initial_plus_state(params.L), bo);
  const std::vector<double> times = nhk::default_time_grid();
  const nhk::DiagnosticTrace trace = nhk::DiagnosticTrace::from(nhk::evolve_krylov_chain(chain.form, times, eo));

  fs::create_directories(man.dir);
  write_json(man.dir / "disorder.json", dis);
  man.output("disorder.json");
  write_json(man.dir / "tridiagonal.json", chain.form);
  man.output("tridiagonal.json");
  if (t.common.format == "csv") {
    std::ofstream os(man.dir / "trace.csv");
    trace.write_csv(os);
    man.output("trace.csv");
  } else {
    write_json(man.dir / "trace.json", {{"t", trace.times}, {"c_k", trace.c_k}, {"i_k", trace.i_k},
                                        {"raw_log_norm", trace.raw_log_norm}});
    man.output("trace.json");
  }
  man.body["K"] = chain.form.K();
  if (chain.breakdown) man.body["breakdown"] = {{"step", chain.breakdown->step}, {"reason", chain.breakdown->reason}};
  std::cout << "L=" << params.L << " W_gamma=" << params.w_gamma << " K=" << chain.form.K()
            << " C_K(t=1e4)=" << trace.c_k.back() << " I_K(t=1e4)=" << trace.i_k.back() << "\n";
}

// ---- sweep-backed commands ---------------------------------------------------

void summarize(const nhk::ResultStore& store, const std::vector<std::string>& keys) {
  std::cout << std::setw(4) << "L" << std::setw(12) << "W_gamma";
  for (const auto& k : keys) std::cout << std::setw(14) << k;
  std::cout << std::setw(8) << "n" << "\n";
  for (const auto& p : store.points) {
    std::cout << std::setw(4) << p.L << std::setw(12) << p.w_gamma;
    for (const auto& k : keys) {
      const auto it = p.scalars.find(k);
      std::cout << std::setw(14) << (it == p.scalars.end() ? std::nan("") : it->second.mean);
    }
    std::cout << std::setw(8) << p.succeeded << (p.flagged ? "  FLAGGED" : "") << "\n";
  }
}

int failed_points(const nhk::ResultStore& store) {
  int n = 0;
  for (const auto& p : store.points) n += p.flagged;
  return n;
}

void run_store(const nhk::ExperimentConfig& cfg, Manifest& man, const std::vector<std::string>& keys) {
  fs::create_directories(man.dir);
  const fs::path dir = man.dir;
  const nhk::ResultStore store = nhk::run_sweep(cfg, &dir);
  for (const char* f : {"store.json", "lanczos.csv", "csr.csv", "entropy.csv", "complexity.csv"})
    if (fs::exists(dir / f)) man.output(f);
  summarize(store, keys);
  if (const int bad = failed_points(store)) {
    man.body["flagged_points"] = bad;
    std::cerr << bad << " point(s) flagged with >20% failed realizations; see store.json\n";
  }
}

void dump_eigenstates(const nhk::ExperimentConfig& cfg, Manifest& man, const std::string& format) {
  for (int L : cfg.L_list)
    for (int i = 0; i < static_cast<int>(cfg.w_gamma_grid.size()); ++i)
      for (int r = 0; r < cfg.realizations_for(L); ++r) {
        const auto params = cfg.params(L, cfg.w_gamma_grid[i]);
        const auto H = nhk::build_hamiltonian(params, nhk::sample_disorder(params, nhk::derive_seed(cfg.base_seed, L, i, r)));
        const nhk::EntropySample s = nhk::eigenstate_entropies(H, L);
        const std::string stem = "eigenstates_L" + std::to_string(L) + "_w" + std::to_string(i) + "_r" + std::to_string(r);
        if (format == "csv") {
          std::ofstream os(man.dir / (stem + ".csv"));
          s.write_csv(os);
          man.output(stem + ".csv");
        } else {
          write_json(man.dir / (stem + ".json"), {{"re_E", s.eigenvalue_re}, {"S", s.entropies}});
          man.output(stem + ".json");
        }
      }
}

// ---- csr reference ensembles -------------------------------------------------

struct CsrCmd {
  Common common;
  ModelFlags model;
  std::string ensemble;
  int dim = 1000;
  int count = 50;
  double edge_fraction = 0.0;
};

void run_reference(const CsrCmd& c, Manifest& man) {
  const auto kind = nhk::parse_reference_ensemble(c.ensemble);
  const std::uint64_t seed = c.common.seed.value_or(20240601);
  const auto spectra = nhk::sample_reference_ensemble(kind, c.dim, c.count, seed);
  nhk::CsrOptions opts;
  opts.edge_fraction = c.edge_fraction;
  std::vector<double> r, cs;
  for (const auto& s : spectra) {
    const auto sample = nhk::csr_ratios(s, opts);
    r.push_back(nhk::mean_radial(sample));
    cs.push_back(nhk::mean_angular(sample));
  }
  auto stats = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sem = v.size() > 1 ? std::sqrt(ss / (v.size() - 1) / v.size()) : 0.0;
    return std::pair{m, sem};
  };
  const auto [rm, rs] = stats(r);
  const auto [cm, csem] = stats(cs);
  fs::create_directories(man.dir);
  const json summary = {{"ensemble", nhk::to_string(kind)}, {"dim", c.dim}, {"count", c.count},
                        {"r_mean", rm}, {"r_sem", rs}, {"cos_theta_mean", cm}, {"cos_theta_sem", csem}};
  if (c.common.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(12) << "ensemble,dim,count,r_mean,r_sem,cos_theta_mean,cos_theta_sem\n"
       << nhk::to_string(kind) << ',' << c.dim << ',' << c.count << ',' << rm << ',' << rs << ',' << cm << ','
       << csem << '\n';
    write_text(man.dir / "reference.csv", os.str());
    std::ofstream sp(man.dir / "spectrum_0.csv");
    nhk::write_spectrum_csv(sp, spectra.front());
    man.output("reference.csv");
    man.output("spectrum_0.csv");
  } else {
    write_json(man.dir / "reference.json", summary);
    man.output("reference.json");
  }
  std::cout << nhk::to_string(kind) << " dim=" << c.dim << " count=" << c.count << "  <r>=" << rm << " +- " << rs
            << "  <cos theta>=" << cm << " +- " << csem << "\n";
}

// ---- collapse ----------------------------------------------------------------

struct CollapseCmd {
  Common common;
  std::string observable = "R_K_4";
  std::string input;
  bool rescale_y = false;
  double w_min = 0.0, w_max = 1e300;
  bool log_w = false;
  std::optional<double> w_c0, alpha0;
  double w_c_lo = 0.0, w_c_hi = 3.0, alpha_lo = 0.5, alpha_hi = 2.5;
};

nhk::ScalingDataset dataset_from(const nhk::ResultStore& store, const CollapseCmd& c) {
  nhk::ScalingDataset d;
  d.observable = c.observable;
  // sigma_S is the realization spread of the mean entropy
  const bool spread = c.observable == "sigma_S";
  const std::string key = spread ? "S_mean" : c.observable;
  for (const auto& p : store.points) {
    if (p.w_gamma < c.w_min || p.w_gamma > c.w_max) continue;
    const auto it = p.scalars.find(key);
    if (it == p.scalars.end()) continue;
    nhk::ScalingPoint pt;
    pt.w = c.log_w ? std::log10(p.w_gamma) : p.w_gamma;
    pt.y = spread ? it->second.std : it->second.mean;
    pt.y_err = spread ? 0.0 : it->second.sem;
    d.curves[p.L].push_back(pt);
  }
  if (d.curves.empty()) throw UsageError("observable '" + c.observable + "' not found in " + c.input);
  return d;
}

void run_collapse(const CollapseCmd& c, Manifest& man, const nhk::ScalingDataset& data) {
  nhk::CollapseOptions opts;
  opts.rescale_y = c.rescale_y;
  opts.w_c_lo = c.w_c_lo;
  opts.w_c_hi = c.w_c_hi;
  opts.alpha_lo = c.alpha_lo;
  opts.alpha_hi = c.alpha_hi;
  std::optional<nhk::CollapseResult> init;
  if (c.w_c0 || c.alpha0) {
    init.emplace();
    init->w_c = c.w_c0.value_or(0.5 * (c.w_c_lo + c.w_c_hi));
    init->alpha = c.alpha0.value_or(1.0);
  }
  json out = {{"dataset", data}, {"dataset_hash", nhk::dataset_hash(data)}, {"options", opts},
              {"input", c.input}, {"log_w", c.log_w}};
  if (init) out["init"] = {{"W_c", init->w_c}, {"alpha", init->alpha}};
  fs::create_directories(man.dir);
  try {
    const nhk::CollapseResult res = nhk::collapse(data, opts, init ? &*init : nullptr);
    out["result"] = res;
    std::cout << c.observable << ": W_c=" << (c.log_w ? std::pow(10.0, res.w_c) : res.w_c)
              << " alpha=" << res.alpha << " beta=" << res.beta << " objective=" << res.objective << "\n";
  } catch (const nhk::CollapseError& e) {
    out["result"] = e.best;
    out["error"] = e.what();
    write_json(man.dir / "collapse.json", out);
    man.output("collapse.json");
    throw;
  }
  try {
    const nhk::CrossingResult cr = nhk::crossing_point(data);
    json per = json::object();
    for (const auto& [L, x] : cr.per_L) per[std::to_string(L)] = x;
    out["crossing"] = {{"per_L", per}, {"mean", cr.mean}};
    std::cout << "zero crossing mean: " << cr.mean << "\n";
  } catch (const nhk::InvalidInput&) {
    // no sign change in the data; not an error for collapse
  }
  write_json(man.dir / "collapse.json", out);
  man.output("collapse.json");
}

// ---- verify ------------------------------------------------------------------

struct Check {
  std::string name;
  double worst = 0.0;
  double tol = 0.0;
  bool ok() const { return worst < tol; }
};

std::vector<Check> run_verify(std::uint64_t base_seed) {
  Check bio{"biorthogonality |Q^+P - I|", 0.0, 1e-8};
  Check tri{"tridiagonal |Q^+HP - T|/|H|", 0.0, 1e-8};
  Check herm{"Hermitian limit |b - c|", 0.0, 1e-9};
  Check evo{"chain vs direct evolution", 0.0, 1e-6};
  Check spec{"rk45 vs spectral chain", 0.0, 1e-6};
  const std::vector<double> widths = {0.0, 0.1, 1.0, 3.0};
  const std::vector<double> times = {1.0, 10.0};
  for (int L = 2; L <= 4; ++L)
    for (int wi = 0; wi < 4; ++wi)
      for (int r = 0; r < 5; ++r) {
        nhk::SpinChainParams p;
        p.L = L;
        p.w_gamma = widths[wi];
        const auto H = nhk::build_hamiltonian(p, nhk::sample_disorder(p, nhk::derive_seed(base_seed, L, wi, r)));
        const auto psi0 = nhk::initial_plus_state(L);
        const auto res = nhk::tridiagonalize(H, psi0);
        const auto rep = nhk::verify(res.form, *res.basis, H);
        bio.worst = std::max(bio.worst, rep.biorthogonality);
        tri.worst = std::max(tri.worst, rep.tridiagonal / std::max(1.0, rep.h_norm));
        if (widths[wi] == 0.0)
          for (int n = 0; n + 1 < res.form.K(); ++n)
            herm.worst = std::max(herm.worst, std::abs(res.form.b[n] - res.form.c[n]));
        nhk::EvolveOptions rk;
        nhk::EvolveOptions sp;
        sp.method = nhk::EvolutionMethod::Spectral;
        const auto a = nhk::evolve_krylov_chain(res.form, times, rk);
        const auto b = nhk::evolve_krylov_chain(res.form, times, sp);
        for (std::size_t k = 0; k < times.size(); ++k) {
          const auto direct = nhk::direct_evolution_oracle(H, psi0, *res.basis, times[k]);
          evo.worst = std::max(evo.worst, nhk::max_abs(a[k].normalized() - direct.normalized()));
          spec.worst = std::max(spec.worst, nhk::max_abs(a[k].normalized() - b[k].normalized()));
        }
      }
  return {bio, tri, herm, evo, spec};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov complexity of the disordered non-Hermitian XY chain"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  TraceCmd trace;
  auto* trace_app = app.add_subcommand("trace", "Krylov wave-function trace for one realization");
  add_common(trace_app, trace.common);
  add_model(trace_app, trace.model, false);
  trace_app->add_option("--L", trace.L, "chain length")->check(CLI::Range(1, 14));
  trace_app->add_option("--w-gamma", trace.w_gamma, "imaginary disorder width")->check(CLI::NonNegativeNumber);
  trace_app->add_option("--realization", trace.realization, "realization index")->check(CLI::NonNegativeNumber);

  Common lz_common;
  ModelFlags lz_model;
  auto* lz_app = app.add_subcommand("lanczos", "Lanczos coefficients, Krylov variance and reciprocity");
  add_common(lz_app, lz_common);
  add_model(lz_app, lz_model, true);

  CsrCmd csr;
  auto* csr_app = app.add_subcommand("csr", "complex spacing ratios of the model or a reference ensemble");
  add_common(csr_app, csr.common);
  add_model(csr_app, csr.model, true);
  csr_app->add_option("--ensemble", csr.ensemble, "reference ensemble instead of the model")
      ->check(CLI::IsMember({"GOE", "AIdagger", "Poisson2D"}));
  csr_app->add_option("--dim", csr.dim, "reference matrix dimension")->check(CLI::Range(3, 100000));
  csr_app->add_option("--count", csr.count, "number of reference matrices")->check(CLI::PositiveNumber);
  csr_app->add_option("--edge-fraction", csr.edge_fraction, "skip this fraction of outermost eigenvalues as centres")
      ->check(CLI::Range(0.0, 0.9));

  Common ent_common;
  ModelFlags ent_model;
  bool dump = false;
  auto* ent_app = app.add_subcommand("entropy", "half-chain entanglement entropy of eigenstates");
  add_common(ent_app, ent_common);
  add_model(ent_app, ent_model, true);
  ent_app->add_flag("--eigenstates", dump, "also write re_E,S per realization");

  CollapseCmd col;
  auto* col_app = app.add_subcommand("collapse", "finite-size scaling collapse of a stored observable");
  add_common(col_app, col.common);
  col_app->add_option("--observable", col.observable, "scalar key, e.g. R_K_4, sigma_K2, csr_r, sigma_S");
  col_app->add_option("--input", col.input, "sweep output directory or store.json")->required();
  col_app->add_flag("--rescale-y", col.rescale_y, "also fit beta in y L^-beta");
  col_app->add_flag("--log-w", col.log_w, "collapse in log10 W_gamma");
  col_app->add_option("--w-min", col.w_min, "lower W_gamma cut");
  col_app->add_option("--w-max", col.w_max, "upper W_gamma cut");
  col_app->add_option("--w-c0", col.w_c0, "extra starting W_c");
  col_app->add_option("--alpha0", col.alpha0, "extra starting alpha");
  col_app->add_option("--w-c-range", [&](const std::vector<std::string>& v) {
        col.w_c_lo = std::stod(v.at(0));
        col.w_c_hi = std::stod(v.at(1));
        return true;
      }, "start lattice range for W_c")->expected(2);
  col_app->add_option("--alpha-range", [&](const std::vector<std::string>& v) {
        col.alpha_lo = std::stod(v.at(0));
        col.alpha_hi = std::stod(v.at(1));
        return true;
      }, "start lattice range for alpha")->expected(2);

  Common sw_common;
  ModelFlags sw_model;
  auto* sw_app = app.add_subcommand("sweep", "full (L, W_gamma) sweep from a config; resumable");
  add_common(sw_app, sw_common);
  add_model(sw_app, sw_model, true);

  Common vf_common;
  auto* vf_app = app.add_subcommand("verify", "oracle and residual checks on L <= 4");
  add_common(vf_app, vf_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  std::optional<Manifest> man;
  try {
    if (*trace_app) {
      nhk::SpinChainParams p;
      p.L = trace.L;
      p.w_gamma = trace.w_gamma;
      if (trace.model.J) p.J = *trace.model.J;
      if (trace.model.h) p.h = *trace.model.h;
      if (trace.model.w_delta) p.w_delta = *trace.model.w_delta;
      try {
        p.validate();
      } catch (const nhk::InvalidInput& e) {
        throw UsageError(e.what());
      }
      const std::uint64_t base = trace.common.seed.value_or(20240601);
      const std::uint64_t seed = nhk::derive_seed(base, p.L, 0, trace.realization);
      nhk::EvolveOptions eo;
      if (trace.model.method == "spectral") eo.method = nhk::EvolutionMethod::Spectral;
      const int max_dim = trace.model.max_dim.value_or(0);
      man.emplace("trace", trace.common.out,
                  trace_config(trace, p, base, seed, trace.model.method.empty() ? "rk45" : trace.model.method, max_dim));
      run_trace(trace, *man, p, seed, eo, max_dim);
    } else if (*lz_app) {
      const auto cfg = resolve(lz_common, lz_model, {nhk::Metric::Lanczos});
      man.emplace("lanczos", lz_common.out, cfg);
      run_store(cfg, *man, {"sigma_K2", "R_K_4", "R_K_5", "R_K_6", "K"});
    } else if (*csr_app) {
      if (!csr.ensemble.empty()) {
        man.emplace("csr", csr.common.out,
                    json{{"ensemble", csr.ensemble}, {"dim", csr.dim}, {"count", csr.count},
                         {"seed", csr.common.seed.value_or(20240601)}, {"edge_fraction", csr.edge_fraction}});
        run_reference(csr, *man);
      } else {
        const auto cfg = resolve(csr.common, csr.model, {nhk::Metric::Csr});
        man.emplace("csr", csr.common.out, cfg);
        run_store(cfg, *man, {"csr_r", "csr_cos"});
      }
    } else if (*ent_app) {
      const auto cfg = resolve(ent_common, ent_model, {nhk::Metric::Entropy});
      man.emplace("entropy", ent_common.out, cfg);
      run_store(cfg, *man, {"S_mean", "S_max"});
      if (dump) dump_eigenstates(cfg, *man, ent_common.format);
    } else if (*col_app) {
      nhk::ResultStore store;
      try {
        store = nhk::load(col.input);
      } catch (const nhk::StoreError& e) {
        throw UsageError(e.what());
      }
      const nhk::ScalingDataset data = dataset_from(store, col);
      try {
        data.validate();
      } catch (const nhk::InvalidInput& e) {
        throw UsageError(e.what());
      }
      man.emplace("collapse", col.common.out, json{{"input", col.input}, {"observable", col.observable},
                                                   {"rescale_y", col.rescale_y}, {"log_w", col.log_w},
                                                   {"w_min", col.w_min}, {"w_max", col.w_max}});
      run_collapse(col, *man, data);
    } else if (*sw_app) {
      if (sw_common.config_path.empty()) throw UsageError("sweep needs --config");
      const auto cfg = resolve(sw_common, sw_model, {});
      man.emplace("sweep", sw_common.out, cfg);
      std::vector<std::string> keys;
      if (cfg.metrics.count(nhk::Metric::Complexity)) keys.insert(keys.end(), {"C_K_t300", "C_K_t10000", "I_K_t10000"});
      if (cfg.metrics.count(nhk::Metric::Lanczos)) keys.insert(keys.end(), {"sigma_K2", "R_K_4"});
      if (cfg.metrics.count(nhk::Metric::Csr)) keys.insert(keys.end(), {"csr_r", "csr_cos"});
      if (cfg.metrics.count(nhk::Metric::Entropy)) keys.insert(keys.end(), {"S_mean"});
      run_store(cfg, *man, keys);
    } else if (*vf_app) {
      const std::uint64_t seed = vf_common.seed.value_or(20240601);
      man.emplace("verify", vf_common.out, json{{"seed", seed}, {"L", {2, 3, 4}}, {"W_gamma", {0.0, 0.1, 1.0, 3.0}},
                                                {"realizations", 5}});
      const auto checks = run_verify(seed);
      bool all = true;
      json table = json::array();
      for (const auto& c : checks) {
        std::cout << (c.ok() ? "PASS  " : "FAIL  ") << std::left << std::setw(32) << c.name << std::right
                  << " worst=" << std::setw(11) << std::setprecision(3) << c.worst << "  tol=" << c.tol << "\n";
        table.push_back({{"check", c.name}, {"worst", c.worst}, {"tol", c.tol}, {"pass", c.ok()}});
        all = all && c.ok();
      }
      fs::create_directories(man->dir);
      write_json(man->dir / "verify.json", table);
      man->output("verify.json");
      if (!all) {
        man->fail("verification failed");
        return 2;
      }
    }
    man->finish();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    if (man) man->fail(e.what());
    return 2;
  }
}
