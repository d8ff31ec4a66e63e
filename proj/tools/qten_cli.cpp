// Command-line driver: Monte-Carlo benchmark, single-tensor decomposition,
// uniqueness certification, and model self-checks over QT1/QF1 files.
//
// Exit codes: 0 success, 1 usage, 2 numerical failure, 3 IO failure.

#include <cinttypes>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qten/bench.hpp"
#include "qten/errors.hpp"
#include "qten/models.hpp"
#include "qten/qtensor.hpp"
#include "qten/solvers.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

struct BenchArgs {
  std::vector<long long> dims{10, 10, 10};
  long long rank = 5;
  int trials = 50;
  std::vector<double> snr{10.0, 20.0, 30.0, 40.0};
  std::vector<std::string> solvers{"qals", "cals"};
  std::uint64_t seed = 0;
  int max_iters = 500;
  double rel_tol = 1e-8;
  int threads = 0;
  std::string out = "bench_out";
};

int run_bench(const BenchArgs& args) {
  qten::ExperimentConfig cfg;
  if (args.dims.size() != 3) {
    std::fprintf(stderr, "error: --dims needs exactly three values\n");
    return kExitUsage;
  }
  for (int d = 0; d < 3; ++d) cfg.dims[static_cast<std::size_t>(d)] = args.dims[static_cast<std::size_t>(d)];
  cfg.rank = args.rank;
  cfg.trials = args.trials;
  cfg.snr_db = args.snr;
  cfg.solvers = args.solvers;
  cfg.seed = args.seed;
  cfg.max_iters = args.max_iters;
  cfg.rel_tol = args.rel_tol;
  cfg.threads = args.threads;

  try {
    qten::validate_config(cfg);
  } catch (const qten::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  const std::vector<qten::TrialResult> results = qten::run_experiment(cfg);
  qten::emit_plot_data(results, args.out);
  qten::write_trials_csv(results, args.out + "/trials.csv");

  int failed = 0;
  double wall = 0.0;
  for (const qten::TrialResult& r : results) {
    if (r.failed) ++failed;
    wall += r.wall_seconds;
  }
  std::printf("ran %zu cells (%d trials x %zu SNR x %zu solvers), %d failed\n",
              results.size(), cfg.trials, cfg.snr_db.size(), cfg.solvers.size(), failed);
  std::printf("total solver wall time %.3f s (not part of the CSV output)\n", wall);
  std::printf("wrote %s/{trials,cost,nmse_a,nmse_b,nmse_c}.csv\n", args.out.c_str());
  return failed == 0 ? kExitOk : kExitNumerical;
}

struct DecomposeArgs {
  std::string input;
  std::string out = "factors.qf1";
  long long rank = 1;
  std::string solver = "qals";
  std::uint64_t seed = 0;
  int max_iters = 500;
  double rel_tol = 1e-8;
};

int run_decompose(const DecomposeArgs& args) {
  const qten::QTensor t = qten::load_qt1(args.input);
  if (t.order() != 3) {
    std::fprintf(stderr, "error: decompose expects an order-3 tensor, got order %d\n",
                 static_cast<int>(t.order()));
    return kExitNumerical;
  }
  qten::SolverConfig cfg;
  cfg.seed = args.seed;
  cfg.max_iters = args.max_iters;
  cfg.rel_tol = args.rel_tol;
  const qten::SolveResult res = args.solver == "qals" ? qten::qals(t, args.rank, cfg)
                                                      : qten::cals(t, args.rank, cfg);
  qten::save_qf1(res.factors, args.out);
  std::printf("solver %s, rank %lld: cost %.6e after %d iterations (%s)\n",
              args.solver.c_str(), args.rank, res.trace.cost.back(), res.trace.iterations,
              res.trace.converged ? "converged" : "iteration cap");
  std::printf("wrote %s\n", args.out.c_str());
  return kExitOk;
}

struct CertifyArgs {
  std::string input;
  bool generic = false;
  double tol = 0.0;
};

int run_certify(const CertifyArgs& args) {
  const qten::CpdFactors f = qten::load_qf1(args.input);
  qten::CertifyOptions opts;
  opts.tol = args.tol;
  if (args.generic) opts.krank = qten::KrankMethod::AssumeGeneric;
  const qten::UniquenessReport rep = qten::certify_uniqueness(f, opts);

  std::printf("factors: A %lld x %lld, B %lld x %lld, C %lld x %lld\n",
              static_cast<long long>(f.a.rows()), static_cast<long long>(f.a.cols()),
              static_cast<long long>(f.b.rows()), static_cast<long long>(f.b.cols()),
              static_cast<long long>(f.c.rows()), static_cast<long long>(f.c.cols()));
  std::printf("rrank(A) = %lld, lrank(C) = %lld\n", static_cast<long long>(rep.rrank_a),
              static_cast<long long>(rep.lrank_c));
  std::printf("rkrank(A) = %lld, krank(B) = %lld, lkrank(C) = %lld\n",
              static_cast<long long>(rep.rkrank_a), static_cast<long long>(rep.krank_b),
              static_cast<long long>(rep.lkrank_c));
  std::printf("B proportional-column free: %s\n",
              rep.b_no_proportional_columns ? "yes" : "no");
  for (int c = 0; c < 5; ++c)
    std::printf("condition %d: %s\n", c + 1, rep.condition[static_cast<std::size_t>(c)] ? "holds" : "fails");
  std::printf("%s\n", rep.certified ? "CERTIFIED essentially unique" : "NOT certified");

  // Machine-readable block.
  std::printf("uniqueness.f=%lld\n", static_cast<long long>(rep.f));
  std::printf("uniqueness.rrank_a=%lld\n", static_cast<long long>(rep.rrank_a));
  std::printf("uniqueness.lrank_c=%lld\n", static_cast<long long>(rep.lrank_c));
  std::printf("uniqueness.rkrank_a=%lld\n", static_cast<long long>(rep.rkrank_a));
  std::printf("uniqueness.krank_b=%lld\n", static_cast<long long>(rep.krank_b));
  std::printf("uniqueness.lkrank_c=%lld\n", static_cast<long long>(rep.lkrank_c));
  std::printf("uniqueness.b_no_proportional_columns=%d\n",
              rep.b_no_proportional_columns ? 1 : 0);
  for (int c = 0; c < 5; ++c)
    std::printf("uniqueness.condition%d=%d\n", c + 1, rep.condition[static_cast<std::size_t>(c)] ? 1 : 0);
  std::printf("uniqueness.certified=%d\n", rep.certified ? 1 : 0);
  return kExitOk;
}

struct CheckArgs {
  std::string input;
};

int run_check_model(const CheckArgs& args) {
  const qten::CpdFactors f = qten::load_qf1(args.input);
  const qten::QTensor t = qten::cpd_reconstruct(f);
  const auto& d = t.dims();
  std::printf("reconstructed %lld x %lld x %lld tensor, rank %lld, |T|_F = %.6e\n",
              static_cast<long long>(d[0]), static_cast<long long>(d[1]),
              static_cast<long long>(d[2]), static_cast<long long>(f.a.cols()),
              qten::frobenius_norm(t));

  for (qten::Index mode = 0; mode < 3; ++mode) {
    const double r = qten::max_abs_diff(qten::unfold(t, mode), qten::cpd_unfolding(f, mode));
    std::printf("unfold %lld residual: %.3e\n", static_cast<long long>(mode), r);
  }
  const qten::SliceKind kinds[3] = {qten::SliceKind::Horizontal, qten::SliceKind::Lateral,
                                    qten::SliceKind::Frontal};
  const char* names[3] = {"horizontal", "lateral", "frontal"};
  for (int k = 0; k < 3; ++k) {
    double worst = 0.0;
    for (qten::Index i = 0; i < d[static_cast<std::size_t>(k)]; ++i) {
      const double r = qten::max_abs_diff(qten::slice(t, kinds[k], i),
                                          qten::cpd_slice(f, kinds[k], i));
      worst = std::max(worst, r);
    }
    std::printf("%s slice residual (max over %lld): %.3e\n", names[k],
                static_cast<long long>(d[static_cast<std::size_t>(k)]), worst);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quaternion tensor toolkit: Q-CPD solvers, uniqueness certification, benchmarks"};
  app.require_subcommand(1);

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Monte-Carlo SNR sweep with CSV output");
  bench->add_option("--dims", bench_args.dims, "tensor dimensions N1,N2,N3")->delimiter(',');
  bench->add_option("--rank", bench_args.rank, "decomposition rank F");
  bench->add_option("--trials", bench_args.trials, "trials per SNR");
  bench->add_option("--snr", bench_args.snr, "SNR list in dB")->delimiter(',');
  bench->add_option("--solvers", bench_args.solvers, "solver set (qals, cals)")->delimiter(',');
  bench->add_option("--seed", bench_args.seed, "master seed");
  bench->add_option("--max-iters", bench_args.max_iters, "iteration cap per solve");
  bench->add_option("--rel-tol", bench_args.rel_tol, "relative cost change tolerance");
  bench->add_option("--threads", bench_args.threads, "worker threads (0 = hardware)");
  bench->add_option("--out", bench_args.out, "output directory");

  DecomposeArgs dec_args;
  CLI::App* dec = app.add_subcommand("decompose", "fit a Q-CPD to a QT1 tensor file");
  dec->add_option("input", dec_args.input, "QT1 tensor file")->required();
  dec->add_option("--rank", dec_args.rank, "decomposition rank F")->required();
  dec->add_option("--solver", dec_args.solver, "qals or cals")
      ->check(CLI::IsMember({"qals", "cals"}));
  dec->add_option("--seed", dec_args.seed, "initialization seed");
  dec->add_option("--max-iters", dec_args.max_iters, "iteration cap");
  dec->add_option("--rel-tol", dec_args.rel_tol, "relative cost change tolerance");
  dec->add_option("--out", dec_args.out, "output QF1 factor bundle");

  CertifyArgs cert_args;
  CLI::App* cert = app.add_subcommand("certify", "uniqueness certificate for a QF1 bundle");
  cert->add_option("input", cert_args.input, "QF1 factor bundle")->required();
  cert->add_flag("--generic", cert_args.generic,
                 "assume generic factors instead of brute-force Kruskal ranks");
  cert->add_option("--tol", cert_args.tol, "rank tolerance (0 = default policy)");

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand("check-model", "reconstruction self-checks for a QF1 bundle");
  check->add_option("input", check_args.input, "QF1 factor bundle")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (bench->parsed()) return run_bench(bench_args);
    if (dec->parsed()) return run_decompose(dec_args);
    if (cert->parsed()) return run_certify(cert_args);
    if (check->parsed()) return run_check_model(check_args);
  } catch (const qten::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
