#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qten/models.hpp"
#include "qten/qtensor.hpp"
#include "qten/solvers.hpp"

namespace qten {

/// Monte-Carlo sweep configuration. Defaults give the desk-scale run:
/// 10x10x10 tensors of rank 5, 50 trials, SNR 10..40 dB, both solvers.
struct ExperimentConfig {
  std::array<Index, 3> dims{10, 10, 10};
  Index rank = 5;
  int trials = 50;
  std::vector<double> snr_db{10.0, 20.0, 30.0, 40.0};
  std::vector<std::string> solvers{"qals", "cals"};
  std::uint64_t seed = 0;
  int max_iters = 500;
  double rel_tol = 1e-8;
  int threads = 0;  ///< 0 = hardware concurrency
};

/// One (trial, snr, solver) cell. wall_seconds is kept for interactive
/// reporting only and is never written to any CSV, so output files are
/// byte-identical across reruns and thread counts.
struct TrialResult {
  int trial = 0;
  double snr_db = 0.0;
  std::string solver;
  double final_cost = std::numeric_limits<double>::quiet_NaN();
  double nmse_a = std::numeric_limits<double>::quiet_NaN();
  double nmse_b = std::numeric_limits<double>::quiet_NaN();
  double nmse_c = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  bool failed = false;
  std::string message;
  double wall_seconds = 0.0;
};

struct SynthesizedTrial {
  QTensor clean;
  QTensor noisy;
  CpdFactors truth;
};

/// Throws DomainError on an invalid configuration: trials < 1, non-positive
/// dims or rank, non-finite SNR, empty or unknown solver set.
void validate_config(const ExperimentConfig& cfg);

/// Per-cell seed: a documented hash of (master, trial, snr bit pattern).
/// Sub-streams 0, 1, 2 of this seed drive truth factors, noise, and the
/// shared solver initialization respectively.
std::uint64_t cell_seed(std::uint64_t master, int trial, double snr_db);

/// Draws truth factors (standard normal per component, same layout as
/// initialize), reconstructs the clean tensor, and adds white Gaussian
/// quaternion noise scaled so the realized SNR matches snr_db exactly:
/// the noise draw is rescaled by |T|_F / (|W|_F 10^(snr/20)). A +infinity
/// snr_db is the noiseless sentinel (noisy == clean).
SynthesizedTrial synthesize_trial(const ExperimentConfig& cfg, int trial, double snr_db);

/// Runs every (trial, snr, solver) cell on a bounded worker pool. Both
/// solvers of a cell start from the same random initialization. A cell
/// failure is recorded in its slot (failed flag + message) and never aborts
/// the sweep. Results are ordered trial-major, then snr in config order,
/// then solver in config order, independent of scheduling.
std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg);

/// Per-trial table: trial,snr_db,solver,final_cost,nmse_a,nmse_b,nmse_c,
/// iterations,converged,status. Numbers use %.17g. Throws IoError.
void write_trials_csv(const std::vector<TrialResult>& results, const std::string& path);

/// Aggregate statistics of one metric per (snr, solver), in linear units.
struct AggregateRow {
  double snr_db = 0.0;
  std::string solver;
  double median = std::numeric_limits<double>::quiet_NaN();
  double mean = std::numeric_limits<double>::quiet_NaN();
  double q25 = std::numeric_limits<double>::quiet_NaN();
  double q75 = std::numeric_limits<double>::quiet_NaN();
};

enum class Metric { Cost, NmseA, NmseB, NmseC };

/// Linear-domain aggregation over non-failed cells, rows ordered by
/// ascending snr then solver first-appearance order. Quantiles use type-7
/// linear interpolation. Trial-order invariant.
std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& results, Metric metric);

/// Writes cost.csv, nmse_a.csv, nmse_b.csv, nmse_c.csv into dir, one row
/// per (snr, solver), columns snr_db,solver,median,mean,q25,q75. Statistics
/// are computed in linear units; the NMSE files report them in dB
/// (10 log10), the cost file stays linear. Conventions are documented in
/// leading # comment lines. Throws PreconditionError on empty results,
/// IoError on filesystem failures.
void emit_plot_data(const std::vector<TrialResult>& results, const std::string& dir);

}  // namespace qten
