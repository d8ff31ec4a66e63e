#include "qten/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "qten/errors.hpp"
#include "qten/rng.hpp"

namespace qten {

namespace {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Type-7 quantile (linear interpolation between order statistics).
double quantile_type7(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double metric_value(const TrialResult& r, Metric m) {
  switch (m) {
    case Metric::Cost: return r.final_cost;
    case Metric::NmseA: return r.nmse_a;
    case Metric::NmseB: return r.nmse_b;
    case Metric::NmseC: return r.nmse_c;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("config: trials must be >= 1");
  if (cfg.rank < 1) throw DomainError("config: rank must be >= 1");
  for (Index d : cfg.dims)
    if (d < 1) throw DomainError("config: dims must be positive");
  if (cfg.snr_db.empty()) throw DomainError("config: snr list is empty");
  for (double s : cfg.snr_db)
    if (!std::isfinite(s)) throw DomainError("config: snr values must be finite");
  if (cfg.solvers.empty()) throw DomainError("config: solver set is empty");
  for (const std::string& s : cfg.solvers)
    if (s != "qals" && s != "cals")
      throw DomainError("config: unknown solver \"" + s + "\"");
  if (cfg.max_iters < 1) throw DomainError("config: max_iters must be >= 1");
  if (!(cfg.rel_tol >= 0.0)) throw DomainError("config: rel_tol must be >= 0");
}

std::uint64_t cell_seed(std::uint64_t master, int trial, double snr_db) {
  return mix_seed(master, static_cast<std::uint64_t>(trial), double_key(snr_db));
}

SynthesizedTrial synthesize_trial(const ExperimentConfig& cfg, int trial, double snr_db) {
  const std::uint64_t cell = cell_seed(cfg.seed, trial, snr_db);

  SolverConfig truth_cfg;
  truth_cfg.seed = mix_seed(cell, 0);
  CpdFactors truth = initialize(cfg.dims, cfg.rank, truth_cfg);
  QTensor clean = cpd_reconstruct(truth);

  if (std::isinf(snr_db) && snr_db > 0.0)
    return {clean, clean, std::move(truth)};
  if (!std::isfinite(snr_db)) throw DomainError("synthesize_trial: invalid snr");

  CounterRng noise_rng(mix_seed(cell, 1));
  QTensor noise(std::vector<Index>(cfg.dims.begin(), cfg.dims.end()));
  for (Index i = 0; i < noise.size(); ++i) {
    Quaternion& q = noise[i];
    q.w = noise_rng.next_normal();
    q.x = noise_rng.next_normal();
    q.y = noise_rng.next_normal();
    q.z = noise_rng.next_normal();
  }
  // |lambda W|_F = |T|_F / 10^(snr/20), so the realized SNR equals snr_db
  // exactly rather than in expectation.
  const double lambda =
      frobenius_norm(clean) / (frobenius_norm(noise) * std::pow(10.0, snr_db / 20.0));
  QTensor noisy = clean + noise * lambda;
  return {std::move(clean), std::move(noisy), std::move(truth)};
}

namespace {

void run_cell(const ExperimentConfig& cfg, int trial, std::size_t snr_idx,
              std::vector<TrialResult>& results) {
  const double snr = cfg.snr_db[snr_idx];
  const std::size_t base = (static_cast<std::size_t>(trial) * cfg.snr_db.size() + snr_idx) *
                           cfg.solvers.size();
  for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
    TrialResult& r = results[base + s];
    r.trial = trial;
    r.snr_db = snr;
    r.solver = cfg.solvers[s];
  }

  std::optional<SynthesizedTrial> data;
  try {
    data = synthesize_trial(cfg, trial, snr);
  } catch (const std::exception& e) {
    for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
      results[base + s].failed = true;
      results[base + s].message = std::string("synthesis: ") + e.what();
    }
    return;
  }

  SolverConfig scfg;
  scfg.max_iters = cfg.max_iters;
  scfg.rel_tol = cfg.rel_tol;
  scfg.seed = mix_seed(cell_seed(cfg.seed, trial, snr), 2);

  for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
    TrialResult& r = results[base + s];
    try {
      const SolveResult sol = cfg.solvers[s] == "qals" ? qals(data->noisy, cfg.rank, scfg)
                                                       : cals(data->noisy, cfg.rank, scfg);
      const AlignmentResult align = align_factors(sol.factors, data->truth);
      r.final_cost = sol.trace.cost.back();
      r.nmse_a = align.nmse[0];
      r.nmse_b = align.nmse[1];
      r.nmse_c = align.nmse[2];
      r.iterations = sol.trace.iterations;
      r.converged = sol.trace.converged;
      r.wall_seconds = sol.trace.wall_seconds;
    } catch (const std::exception& e) {
      r.failed = true;
      r.message = e.what();
    }
  }
}

}  // namespace

std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::size_t cells = static_cast<std::size_t>(cfg.trials) * cfg.snr_db.size();
  std::vector<TrialResult> results(cells * cfg.solvers.size());

  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells) return;
      const int trial = static_cast<int>(i / cfg.snr_db.size());
      const std::size_t snr_idx = i % cfg.snr_db.size();
      run_cell(cfg, trial, snr_idx, results);
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return results;
}

void write_trials_csv(const std::vector<TrialResult>& results, const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "trial,snr_db,solver,final_cost,nmse_a,nmse_b,nmse_c,iterations,converged,status\n";
  for (const TrialResult& r : results) {
    out << r.trial << ',' << fmt_g17(r.snr_db) << ',' << r.solver << ','
        << fmt_g17(r.final_cost) << ',' << fmt_g17(r.nmse_a) << ',' << fmt_g17(r.nmse_b)
        << ',' << fmt_g17(r.nmse_c) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
        << ',' << (r.failed ? "failed" : "ok") << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& results, Metric metric) {
  std::vector<double> snrs;
  std::vector<std::string> solvers;
  for (const TrialResult& r : results) {
    if (std::find(snrs.begin(), snrs.end(), r.snr_db) == snrs.end()) snrs.push_back(r.snr_db);
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end())
      solvers.push_back(r.solver);
  }
  std::sort(snrs.begin(), snrs.end());

  std::vector<AggregateRow> rows;
  for (double snr : snrs)
    for (const std::string& solver : solvers) {
      AggregateRow row;
      row.snr_db = snr;
      row.solver = solver;
      std::vector<double> vals;
      for (const TrialResult& r : results)
        if (!r.failed && r.snr_db == snr && r.solver == solver)
          vals.push_back(metric_value(r, metric));
      if (!vals.empty()) {
        std::sort(vals.begin(), vals.end());
        double sum = 0.0;
        for (double v : vals) sum += v;
        row.mean = sum / static_cast<double>(vals.size());
        row.median = quantile_type7(vals, 0.5);
        row.q25 = quantile_type7(vals, 0.25);
        row.q75 = quantile_type7(vals, 0.75);
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

namespace {

double to_db(double linear) { return 10.0 * std::log10(linear); }

void write_panel(const std::string& dir, const std::string& name, const char* what,
                 const std::vector<AggregateRow>& rows, bool in_db) {
  const std::string path = dir + "/" + name;
  std::ofstream out = open_csv(path);
  out << "# " << what << '\n';
  out << "# statistics computed in linear units over non-failed trials"
      << (in_db ? ", reported in dB (10 log10)" : ", reported in linear units") << '\n';
  out << "# quantiles: type-7 linear interpolation\n";
  out << "snr_db,solver,median,mean,q25,q75\n";
  for (const AggregateRow& r : rows) {
    const double med = in_db ? to_db(r.median) : r.median;
    const double mean = in_db ? to_db(r.mean) : r.mean;
    const double q25 = in_db ? to_db(r.q25) : r.q25;
    const double q75 = in_db ? to_db(r.q75) : r.q75;
    out << fmt_g17(r.snr_db) << ',' << r.solver << ',' << fmt_g17(med) << ','
        << fmt_g17(mean) << ',' << fmt_g17(q25) << ',' << fmt_g17(q75) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

void emit_plot_data(const std::vector<TrialResult>& results, const std::string& dir) {
  if (results.empty()) throw PreconditionError("emit_plot_data: no results");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  write_panel(dir, "cost.csv", "final relative cost  |T - [[A,B,C]]|_F / |T|_F",
              aggregate(results, Metric::Cost), false);
  write_panel(dir, "nmse_a.csv", "factor NMSE  |A_hat - A|_F^2 / |A|_F^2 after alignment",
              aggregate(results, Metric::NmseA), true);
  write_panel(dir, "nmse_b.csv", "factor NMSE  |B_hat - B|_F^2 / |B|_F^2 after alignment",
              aggregate(results, Metric::NmseB), true);
  write_panel(dir, "nmse_c.csv", "factor NMSE  |C_hat - C|_F^2 / |C|_F^2 after alignment",
              aggregate(results, Metric::NmseC), true);
}

}  // namespace qten
