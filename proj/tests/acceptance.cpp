// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every criterion runs on fixed seeds, so reruns are bit-identical.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qten/adjoint.hpp"
#include "qten/bench.hpp"
#include "qten/models.hpp"
#include "qten/qtensor.hpp"
#include "qten/rank.hpp"
#include "qten/rng.hpp"
#include "qten/solvers.hpp"
#include "test_util.hpp"

using namespace qten;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

CpdFactors random_factors(CounterRng& rng, Index n1, Index n2, Index n3, Index f) {
  return CpdFactors(testutil::random_qmatrix(rng, n1, f),
                    testutil::random_rmatrix(rng, n2, f),
                    testutil::random_qmatrix(rng, n3, f));
}

// ---------------------------------------------------------------------------
// 1. Adjoint homomorphism on 200 random shape-compatible pairs.

Outcome criterion1() {
  CounterRng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index m = 1 + static_cast<Index>(rng.next_u64() % 5);
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 5);
    const Index p = 1 + static_cast<Index>(rng.next_u64() % 5);
    const QMatrix a = testutil::random_qmatrix(rng, m, n);
    const QMatrix b = testutil::random_qmatrix(rng, n, p);
    const CMatrix direct = adjoint(matmul_direct(a, b), AdjointKind::Direct) -
                           adjoint(a, AdjointKind::Direct) * adjoint(b, AdjointKind::Direct);
    const CMatrix reverse = adjoint(matmul_reverse(a, b), AdjointKind::Reverse) -
                            adjoint(a, AdjointKind::Reverse) * adjoint(b, AdjointKind::Reverse);
    worst = std::max({worst, direct.cwiseAbs().maxCoeff(), reverse.cwiseAbs().maxCoeff()});
  }
  return {worst < 1e-12, fmt("200 pairs, both flavours, max error %.2e", worst)};
}

// ---------------------------------------------------------------------------
// 2. Right rank of an r-term outer-product sum is r; its direct adjoint has
// complex rank 2r. 100 trials for each r = 1..3 at N = 5.

Outcome criterion2() {
  const auto start = std::chrono::steady_clock::now();
  CounterRng rng(1002);
  int good = 0;
  for (int t = 0; t < 100; ++t) {
    bool ok = true;
    for (Index r = 1; r <= 3; ++r) {
      QMatrix a(5, 5);
      for (Index term = 0; term < r; ++term) {
        const QMatrix u = testutil::random_qmatrix(rng, 5, 1);
        const QMatrix v = testutil::random_qmatrix(rng, 1, 5);
        a = a + matmul_direct(u, v);
      }
      if (rank_right(a) != r) ok = false;
      if (numerical_rank(adjoint(a, AdjointKind::Direct)) != 2 * r) ok = false;
    }
    good += ok ? 1 : 0;
  }
  const double secs = elapsed_seconds(start);
  const bool pass = good == 100 && secs < 5.0;
  return {pass, fmt("%d/100 trials, r = 1..3, %.2f s (budget 5 s)", good, secs)};
}

// ---------------------------------------------------------------------------
// 3. Kruskal rank via quaternion subset enumeration equals the k'-rank of the
// columnwise adjoint via complex subset enumeration, both sides.

Outcome criterion3() {
  const auto start = std::chrono::steady_clock::now();
  CounterRng rng(1003);
  int good = 0;
  for (int t = 0; t < 100; ++t) {
    QMatrix a = testutil::random_qmatrix(rng, 4, 4);
    if (t % 3 == 1) {
      // Plant a right-dependent column: col 3 = col 0 * q.
      const Quaternion q = testutil::random_q(rng);
      for (Index i = 0; i < 4; ++i) a(i, 3) = a(i, 0) * q;
    } else if (t % 3 == 2) {
      // Plant a left-dependent column: col 3 = q * col 0.
      const Quaternion q = testutil::random_q(rng);
      for (Index i = 0; i < 4; ++i) a(i, 3) = q * a(i, 0);
    }
    const Index kr = kruskal_rank_right(a);
    const Index kl = kruskal_rank_left(a);
    const Index kr_oracle = oracle::kprime_rank(adjoint(a, AdjointKind::DirectColumnwise), 2);
    const Index kl_oracle = oracle::kprime_rank(adjoint(a, AdjointKind::ReverseColumnwise), 2);
    good += (kr == kr_oracle && kl == kl_oracle) ? 1 : 0;
  }
  const double secs = elapsed_seconds(start);
  const bool pass = good == 100 && secs < 10.0;
  return {pass, fmt("%d/100 matrices, right and left, %.2f s (budget 10 s)", good, secs)};
}

// ---------------------------------------------------------------------------
// 4. The seven multilinear laws. Six are expressible on an order-3 tensor;
// the seventh (two distinct central modes commute) needs order 4 and runs on
// 3x4x5x2 tensors.

Outcome criterion4() {
  CounterRng rng(1004);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const QTensor x = testutil::random_qtensor(rng, {3, 4, 5});
    const QMatrix u0 = testutil::random_qmatrix(rng, 4, 3);
    const RMatrix w1 = testutil::random_rmatrix(rng, 6, 4);
    const QMatrix v2 = testutil::random_qmatrix(rng, 2, 5);

    // distinct modes commute: first/last, first/central, central/last
    worst = std::max(worst, max_abs_diff(mode_product(mode_product(x, 0, u0), 2, v2),
                                         mode_product(mode_product(x, 2, v2), 0, u0)));
    worst = std::max(worst, max_abs_diff(mode_product(mode_product(x, 0, u0), 1, w1),
                                         mode_product(mode_product(x, 1, w1), 0, u0)));
    worst = std::max(worst, max_abs_diff(mode_product(mode_product(x, 1, w1), 2, v2),
                                         mode_product(mode_product(x, 2, v2), 1, w1)));

    // repeated modes compose: direct flavour in front, reverse in the back,
    // plain real product in the middle
    const QMatrix u0b = testutil::random_qmatrix(rng, 2, 4);
    worst = std::max(worst, max_abs_diff(mode_product(mode_product(x, 0, u0), 0, u0b),
                                         mode_product(x, 0, matmul_direct(u0b, u0))));
    const QMatrix v2b = testutil::random_qmatrix(rng, 3, 2);
    worst = std::max(worst, max_abs_diff(mode_product(mode_product(x, 2, v2), 2, v2b),
                                         mode_product(x, 2, matmul_reverse(v2b, v2))));
    const RMatrix w1b = testutil::random_rmatrix(rng, 3, 6);
    worst = std::max(worst, max_abs_diff(mode_product(mode_product(x, 1, w1), 1, w1b),
                                         mode_product(x, 1, RMatrix(w1b * w1))));

    // two distinct central modes commute (order-4 tensor)
    const QTensor y = testutil::random_qtensor(rng, {3, 4, 5, 2});
    const RMatrix wa = testutil::random_rmatrix(rng, 6, 4);
    const RMatrix wb = testutil::random_rmatrix(rng, 2, 5);
    worst = std::max(worst, max_abs_diff(mode_product(mode_product(y, 1, wa), 2, wb),
                                         mode_product(mode_product(y, 2, wb), 1, wa)));
  }
  return {worst < 1e-12, fmt("seven laws, 50 tensors, max error %.2e", worst)};
}

// ---------------------------------------------------------------------------
// 5. Model consistency: entrywise sum, the three unfolding equations, the
// three slice families, and the n-mode (Tucker, superdiagonal core) path all
// reconstruct the same tensor.

Outcome criterion5() {
  CounterRng rng(1005);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const CpdFactors f = random_factors(rng, 6, 6, 6, 3);
    const std::vector<Index> dims{6, 6, 6};

    std::vector<QTensor> paths;
    QTensor elementwise(dims);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j)
        for (Index k = 0; k < 6; ++k) {
          Quaternion acc{};
          for (Index g = 0; g < 3; ++g)
            acc += oracle::qmul(f.a(i, g), f.c(k, g)) * f.b(j, g);
          elementwise.at3(i, j, k) = acc;
        }
    paths.push_back(elementwise);
    paths.push_back(cpd_reconstruct(f));
    for (Index mode = 0; mode < 3; ++mode)
      paths.push_back(fold(cpd_unfolding(f, mode), mode, dims));

    QTensor from_h(dims), from_l(dims), from_f(dims);
    for (Index i = 0; i < 6; ++i) {
      const QMatrix s = cpd_slice(f, SliceKind::Horizontal, i);
      for (Index j = 0; j < 6; ++j)
        for (Index k = 0; k < 6; ++k) from_h.at3(i, j, k) = s(j, k);
    }
    for (Index j = 0; j < 6; ++j) {
      const QMatrix s = cpd_slice(f, SliceKind::Lateral, j);
      for (Index i = 0; i < 6; ++i)
        for (Index k = 0; k < 6; ++k) from_l.at3(i, j, k) = s(i, k);
    }
    for (Index k = 0; k < 6; ++k) {
      const QMatrix s = cpd_slice(f, SliceKind::Frontal, k);
      for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j) from_f.at3(i, j, k) = s(i, j);
    }
    paths.push_back(from_h);
    paths.push_back(from_l);
    paths.push_back(from_f);

    QTensor core({3, 3, 3});
    for (Index g = 0; g < 3; ++g) core.at3(g, g, g) = Quaternion(1.0);
    paths.push_back(tucker_reconstruct({core, f.a, f.b, f.c}));

    for (std::size_t p = 0; p < paths.size(); ++p)
      for (std::size_t q = p + 1; q < paths.size(); ++q)
        worst = std::max(worst, max_abs_diff(paths[p], paths[q]));
  }
  return {worst < 1e-12, fmt("9 evaluation paths, 50 instances, max pairwise error %.2e", worst)};
}

// ---------------------------------------------------------------------------
// 6. Equivalent complex models: the adjoint tensor equals the rank-(2,2,1)
// sum and the CONFAC stacks match the Cayley-Dickson unfoldings.

Outcome criterion6() {
  CounterRng rng(1006);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n1 = 3 + static_cast<Index>(rng.next_u64() % 3);
    const Index n2 = 3 + static_cast<Index>(rng.next_u64() % 3);
    const Index n3 = 3 + static_cast<Index>(rng.next_u64() % 3);
    const Index nf = 2 + static_cast<Index>(rng.next_u64() % 2);
    const CpdFactors f = random_factors(rng, n1, n2, n3, nf);
    const QTensor x = cpd_reconstruct(f);

    const std::vector<CMatrix> slices = adjoint_tensor(x);
    for (Index j = 0; j < n2; ++j) {
      CMatrix model = CMatrix::Zero(2 * n1, 2 * n3);
      for (Index g = 0; g < nf; ++g)
        model += f.b(j, g) * adjoint(f.a.col(g), AdjointKind::Direct) *
                 adjoint(f.c.col(g), AdjointKind::Reverse).transpose();
      worst = std::max(worst,
                       (slices[static_cast<std::size_t>(j)] - model).cwiseAbs().maxCoeff());
    }

    const ConfacUnfoldings un =
        confac_unfoldings(confac_from_cpd(f), cayley_dickson_parts(x));
    worst = std::max({worst, un.residual_a, un.residual_b, un.residual_c});
  }
  return {worst < 1e-12, fmt("rank-(2,2,1) sum and CONFAC stacks, 50 instances, max error %.2e", worst)};
}

// ---------------------------------------------------------------------------
// 7. Admissible scaling + permutation invariance and alignment recovery.

Outcome criterion7() {
  CounterRng rng(1007);
  double worst_recon = 0.0, worst_nmse = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index nf = 2 + static_cast<Index>(rng.next_u64() % 3);
    const CpdFactors f = random_factors(rng, 5, 4, 5, nf);
    const QTensor x = cpd_reconstruct(f);

    ScalingTriple s;
    std::vector<Index> perm;
    for (Index g = 0; g < nf; ++g) {
      const Quaternion alpha = testutil::random_q(rng);
      const double beta =
          (rng.next_u64() % 2 == 0 ? 1.0 : -1.0) * (0.5 + rng.next_uniform());
      s.alpha.push_back(alpha);
      s.beta.push_back(beta);
      s.gamma.push_back(inverse(alpha) * (1.0 / beta));
      perm.push_back(g);
    }
    for (Index g = nf - 1; g > 0; --g)
      std::swap(perm[static_cast<std::size_t>(g)],
                perm[static_cast<std::size_t>(rng.next_u64() % (g + 1))]);

    const CpdFactors scaled = apply_scaling(f, s, perm);
    worst_recon = std::max(worst_recon, max_abs_diff(cpd_reconstruct(scaled), x));
    const AlignmentResult align = align_factors(scaled, f);
    worst_nmse = std::max({worst_nmse, align.nmse[0], align.nmse[1], align.nmse[2]});
  }
  const bool pass = worst_recon < 1e-12 && worst_nmse < 1e-12;
  return {pass, fmt("100 transformations, max reconstruction error %.2e, max aligned NMSE %.2e",
                    worst_recon, worst_nmse)};
}

// ---------------------------------------------------------------------------
// 8. Noiseless exact recovery at desk scale (N = 10, F = 5, 20 trials) for
// both solvers, plus uniqueness certification of the truth instances.

Outcome criterion8() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.dims = {10, 10, 10};
  cfg.rank = 5;
  cfg.seed = 1008;

  int recovered = 0, certified = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    const SynthesizedTrial data = synthesize_trial(cfg, trial, inf);
    SolverConfig scfg;
    scfg.max_iters = 500;
    scfg.rel_tol = 1e-10;
    scfg.seed = mix_seed(cell_seed(cfg.seed, trial, inf), 2);

    bool ok = true;
    for (const bool use_cals : {false, true}) {
      const SolveResult r =
          use_cals ? cals(data.noisy, 5, scfg) : qals(data.noisy, 5, scfg);
      if (!(r.trace.cost.back() < 1e-6)) ok = false;
      const AlignmentResult align = align_factors(r.factors, data.truth);
      for (double v : align.nmse)
        if (!(v < 1e-6)) ok = false;
    }
    recovered += ok ? 1 : 0;
    certified += certify_uniqueness(data.truth).certified ? 1 : 0;
  }
  const double secs = elapsed_seconds(start);
  const bool pass = recovered >= 19 && certified >= 19 && secs < 60.0;
  return {pass, fmt("recovery %d/20, certified %d/20, %.1f s (budget 60 s)",
                    recovered, certified, secs)};
}

// ---------------------------------------------------------------------------
// 9. Scaled Monte-Carlo reproduction: NMSE-vs-SNR slope, solver agreement,
// and monotone Q-ALS traces.

ExperimentConfig criterion9_config() {
  ExperimentConfig cfg;
  cfg.dims = {10, 10, 10};
  cfg.rank = 5;
  cfg.trials = 50;
  cfg.snr_db = {10.0, 20.0, 30.0, 40.0};
  cfg.solvers = {"qals", "cals"};
  cfg.seed = 1009;
  cfg.max_iters = 500;
  cfg.rel_tol = 1e-8;
  return cfg;
}

double median_db(const std::vector<AggregateRow>& rows, double snr, const std::string& solver) {
  for (const AggregateRow& r : rows)
    if (r.snr_db == snr && r.solver == solver) return 10.0 * std::log10(r.median);
  return std::numeric_limits<double>::quiet_NaN();
}

Outcome criterion9(std::vector<TrialResult>& results_out) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = criterion9_config();
  results_out = run_experiment(cfg);

  int failed_cells = 0;
  for (const TrialResult& r : results_out) failed_cells += r.failed ? 1 : 0;

  // (a) slope of median NMSE (dB) against SNR (dB) within -1.0 +- 0.2 for
  // every solver and factor; (b) solver medians within 1 dB everywhere.
  double slope_lo = 0.0, slope_hi = -10.0, worst_gap = 0.0;
  for (const Metric metric : {Metric::NmseA, Metric::NmseB, Metric::NmseC}) {
    const std::vector<AggregateRow> rows = aggregate(results_out, metric);
    for (const std::string solver : {"qals", "cals"}) {
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      for (double snr : cfg.snr_db) {
        const double y = median_db(rows, snr, solver);
        sx += snr;
        sy += y;
        sxx += snr * snr;
        sxy += snr * y;
      }
      const double n = static_cast<double>(cfg.snr_db.size());
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      slope_lo = std::min(slope_lo, slope);
      slope_hi = std::max(slope_hi, slope);
    }
    for (double snr : cfg.snr_db)
      worst_gap = std::max(worst_gap, std::abs(median_db(rows, snr, "qals") -
                                               median_db(rows, snr, "cals")));
  }

  // (c) every Q-ALS trace is non-increasing; the cells are reproduced
  // bit-identically from the documented per-cell seeds.
  double worst_rise = 0.0;
  for (int trial = 0; trial < cfg.trials; ++trial)
    for (double snr : cfg.snr_db) {
      const SynthesizedTrial data = synthesize_trial(cfg, trial, snr);
      SolverConfig scfg;
      scfg.max_iters = cfg.max_iters;
      scfg.rel_tol = cfg.rel_tol;
      scfg.seed = mix_seed(cell_seed(cfg.seed, trial, snr), 2);
      const SolveResult r = qals(data.noisy, cfg.rank, scfg);
      for (std::size_t i = 1; i < r.trace.cost.size(); ++i)
        worst_rise = std::max(worst_rise, r.trace.cost[i] - r.trace.cost[i - 1]);
    }

  const double secs = elapsed_seconds(start);
  const bool pass = failed_cells == 0 && slope_lo >= -1.2 && slope_hi <= -0.8 &&
                    worst_gap <= 1.0 && worst_rise <= 1e-12 && secs < 600.0;
  return {pass,
          fmt("slopes in [%.3f, %.3f] (target -1.0 +- 0.2), solver gap %.3f dB (<= 1), "
              "max trace rise %.1e, %d failed cells, %.0f s (budget 600 s)",
              slope_lo, slope_hi, worst_gap, worst_rise, failed_cells, secs)};
}

// ---------------------------------------------------------------------------
// 10. Byte-identical CSV output across two runs of criterion 9's config.

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome criterion10(const std::vector<TrialResult>& first_run) {
  const ExperimentConfig cfg = criterion9_config();
  const std::vector<TrialResult> second_run = run_experiment(cfg);

  const std::filesystem::path base = std::filesystem::temp_directory_path();
  const std::filesystem::path dir_a = base / "qten_acceptance_run_a";
  const std::filesystem::path dir_b = base / "qten_acceptance_run_b";
  std::filesystem::create_directories(dir_a);
  std::filesystem::create_directories(dir_b);
  write_trials_csv(first_run, (dir_a / "trials.csv").string());
  write_trials_csv(second_run, (dir_b / "trials.csv").string());
  emit_plot_data(first_run, dir_a.string());
  emit_plot_data(second_run, dir_b.string());

  int identical = 0, files = 0;
  for (const char* name : {"trials.csv", "cost.csv", "nmse_a.csv", "nmse_b.csv", "nmse_c.csv"}) {
    ++files;
    identical += (slurp(dir_a / name) == slurp(dir_b / name)) ? 1 : 0;
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  return {identical == files, fmt("%d/%d output files byte-identical across reruns",
                                  identical, files)};
}

// ---------------------------------------------------------------------------
// 11. Fitting the first Cayley-Dickson part alone recovers the real middle
// factor on generic certified instances.

Outcome criterion11() {
  CounterRng rng(1011);
  int recovered = 0, instances = 0, stuck = 0;
  for (int t = 0; t < 10; ++t) {
    const CpdFactors truth = random_factors(rng, 8, 5, 8, 3);
    if (!certify_uniqueness(truth).certified) continue;  // generic: never expected
    ++instances;
    const EmpiricalBReport report =
        empirical_b_uniqueness_check(truth, 5, 2000 + static_cast<std::uint64_t>(t));
    // Alternating least squares lands in a local minimum from roughly one
    // start in ten regardless of instance geometry; such a run plateaus near
    // cost 1e-1 instead of 1e-14 and never produces a decomposition of T1, so
    // it carries no B to compare. The instance counts as recovered when at
    // least one start fits T1 and every start that fits reproduces B.
    int fitted = 0;
    bool all_fitted_recover = true;
    for (std::size_t s = 0; s < report.fit_cost.size(); ++s) {
      if (report.fit_cost[s] < 1e-6) {
        ++fitted;
        if (!(report.b_nmse[s] < 1e-6)) all_fitted_recover = false;
      } else {
        ++stuck;
      }
    }
    if (fitted > 0 && all_fitted_recover) ++recovered;
  }
  const bool pass = instances == 10 && recovered >= 9;
  return {pass,
          fmt("B recovered from every successful T1 fit in %d/%d certified instances "
              "(5 starts each, %d starts stuck in local minima)",
              recovered, instances, stuck)};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    std::function<Outcome()> run;
  };

  std::vector<TrialResult> crit9_results;
  const std::vector<Entry> entries{
      {1, "adjoint homomorphism", criterion1},
      {2, "rank correspondence", criterion2},
      {3, "Kruskal-rank oracle equivalence", criterion3},
      {4, "multilinear law suite", criterion4},
      {5, "model consistency", criterion5},
      {6, "equivalent-model suite", criterion6},
      {7, "ambiguity invariance", criterion7},
      {8, "noiseless exact recovery", criterion8},
      {9, "Monte-Carlo reproduction", [&crit9_results] { return criterion9(crit9_results); }},
      {10, "CSV determinism", [&crit9_results] { return criterion10(crit9_results); }},
      {11, "empirical middle-factor uniqueness", criterion11},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("[%s] criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", e.id, e.label,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  if (failures > 0) std::printf("%d of 11 criteria failed\n", failures);
  else std::printf("all 11 criteria passed\n");
  return failures == 0 ? 0 : 1;
}
