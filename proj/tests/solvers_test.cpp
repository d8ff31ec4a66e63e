#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qten/solvers.hpp"
#include "test_util.hpp"

using namespace qten;

namespace {

CpdFactors random_factors(CounterRng& rng, Index n1, Index n2, Index n3, Index f) {
  return CpdFactors(testutil::random_qmatrix(rng, n1, f),
                    testutil::random_rmatrix(rng, n2, f),
                    testutil::random_qmatrix(rng, n3, f));
}

double plane_mass(const QMatrix& m) {
  double worst = 0.0;
  for (int comp = 1; comp < 4; ++comp)
    worst = std::max(worst, m.plane(comp).cwiseAbs().maxCoeff());
  return worst;
}

// Non-increasing within floating-point slack.
bool monotone(const std::vector<double>& cost, double slack = 1e-12) {
  for (std::size_t i = 1; i < cost.size(); ++i)
    if (cost[i] > cost[i - 1] + slack) return false;
  return true;
}

}  // namespace

TEST_CASE("initialize draws the documented shapes deterministically") {
  SolverConfig cfg;
  cfg.seed = 970;
  const std::array<Index, 3> dims{4, 3, 5};
  const CpdFactors f = initialize(dims, 2, cfg);
  CHECK(f.a.rows() == 4);
  CHECK(f.a.cols() == 2);
  CHECK(f.b.rows() == 3);
  CHECK(f.b.cols() == 2);
  CHECK(f.c.rows() == 5);
  CHECK(f.c.cols() == 2);

  const CpdFactors g = initialize(dims, 2, cfg);
  CHECK(max_abs_diff(f.a, g.a) == 0.0);
  CHECK((f.b - g.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_abs_diff(f.c, g.c) == 0.0);

  SolverConfig other = cfg;
  other.seed = 971;
  const CpdFactors h = initialize(dims, 2, other);
  CHECK(max_abs_diff(f.a, h.a) > 1e-3);

  CHECK_THROWS_AS(initialize(dims, 0, cfg), ShapeError);
}

TEST_CASE("initialize draws standard normal components") {
  SolverConfig cfg;
  cfg.seed = 972;
  const CpdFactors f = initialize({100, 60, 80}, 5, cfg);
  // Each quaternion entry carries four unit-variance components.
  const double a_mean_sq = std::pow(frobenius_norm(f.a), 2) / (100.0 * 5.0);
  CHECK(a_mean_sq == doctest::Approx(4.0).epsilon(0.10));
  const double b_mean_sq = f.b.squaredNorm() / (60.0 * 5.0);
  CHECK(b_mean_sq == doctest::Approx(1.0).epsilon(0.25));
  const double c_mean_sq = std::pow(frobenius_norm(f.c), 2) / (80.0 * 5.0);
  CHECK(c_mean_sq == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("initialize passes provided factors through after shape checks") {
  CounterRng rng(973);
  const CpdFactors f = random_factors(rng, 4, 3, 5, 2);
  SolverConfig cfg;
  cfg.init = SolverInit::Provided;
  cfg.init_factors = f;
  const CpdFactors g = initialize({4, 3, 5}, 2, cfg);
  CHECK(max_abs_diff(g.a, f.a) == 0.0);
  CHECK(max_abs_diff(g.c, f.c) == 0.0);
  CHECK_THROWS_AS(initialize({4, 3, 6}, 2, cfg), ShapeError);
  CHECK_THROWS_AS(initialize({4, 3, 5}, 3, cfg), ShapeError);
}

TEST_CASE("relative cost is zero on the model and positive off it") {
  CounterRng rng(974);
  const CpdFactors f = random_factors(rng, 4, 3, 4, 2);
  const QTensor t = cpd_reconstruct(f);
  CHECK(cpd_relative_cost(t, f) < 1e-14);
  const CpdFactors g = random_factors(rng, 4, 3, 4, 2);
  CHECK(cpd_relative_cost(t, g) > 0.1);
  QTensor zero({2, 2, 2});
  CHECK_THROWS_AS(cpd_relative_cost(zero, f), DomainError);
}

TEST_CASE("each block update is an exact least-squares step") {
  CounterRng rng(975);
  // Random data tensor, not exactly decomposable, so every cost is positive.
  const QTensor t = testutil::random_qtensor(rng, {5, 4, 5});
  const CpdFactors f0 = random_factors(rng, 5, 4, 5, 2);
  const QMatrix t0 = unfold(t, 0), t1 = unfold(t, 1), t2 = unfold(t, 2);

  const double cost0 = cpd_relative_cost(t, f0);
  const QMatrix a1 = solver_detail::update_a(t0, f0.b, f0.c);
  const double cost_a = cpd_relative_cost(t, CpdFactors(a1, f0.b, f0.c));
  CHECK(cost_a <= cost0 + 1e-12);

  const RMatrix b1 = solver_detail::update_b(t1, a1, f0.c);
  const double cost_b = cpd_relative_cost(t, CpdFactors(a1, b1, f0.c));
  CHECK(cost_b <= cost_a + 1e-12);

  const QMatrix c1 = solver_detail::update_c(t2, a1, b1);
  const double cost_c = cpd_relative_cost(t, CpdFactors(a1, b1, c1));
  CHECK(cost_c <= cost_b + 1e-12);

  // Stationarity of the accepted blocks against the respective unfoldings.
  CHECK(oracle::normal_equation_residual_direct(
            t0, a1, transpose(khatri_rao_direct(f0.c, QMatrix::from_real(f0.b)))) < 1e-10);
  CHECK(oracle::normal_equation_residual_reverse(
            t2, c1, transpose(khatri_rao_direct(QMatrix::from_real(b1), a1))) < 1e-10);
}

TEST_CASE("qals recovers exact low-rank data") {
  CounterRng rng(976);
  const CpdFactors truth = random_factors(rng, 6, 5, 6, 2);
  const QTensor t = cpd_reconstruct(truth);

  SolverConfig cfg;
  cfg.seed = 977;
  cfg.max_iters = 2000;
  cfg.rel_tol = 1e-10;
  const SolveResult r = qals(t, 2, cfg);

  CHECK(r.trace.converged);
  CHECK(r.trace.cost.size() == static_cast<std::size_t>(r.trace.iterations) + 1);
  CHECK(monotone(r.trace.cost));
  CHECK(r.trace.cost.back() < 1e-8);
  CHECK(r.trace.wall_seconds > 0.0);

  const AlignmentResult align = align_factors(r.factors, truth);
  for (double v : align.nmse) CHECK(v < 1e-10);
}

TEST_CASE("qals started at the truth converges immediately") {
  CounterRng rng(978);
  const CpdFactors truth = random_factors(rng, 5, 4, 5, 2);
  const QTensor t = cpd_reconstruct(truth);
  SolverConfig cfg;
  cfg.init = SolverInit::Provided;
  cfg.init_factors = truth;
  const SolveResult r = qals(t, 2, cfg);
  CHECK(r.trace.cost.front() < 1e-12);
  CHECK(r.trace.iterations == 1);
  CHECK(r.trace.converged);
  CHECK(r.trace.cost.back() < 1e-12);
}

TEST_CASE("qals is deterministic and reports the initial cost first") {
  CounterRng rng(979);
  const CpdFactors truth = random_factors(rng, 5, 4, 5, 2);
  const QTensor t = cpd_reconstruct(truth);
  SolverConfig cfg;
  cfg.seed = 980;
  const SolveResult r1 = qals(t, 2, cfg);
  const SolveResult r2 = qals(t, 2, cfg);
  REQUIRE(r1.trace.cost.size() == r2.trace.cost.size());
  for (std::size_t i = 0; i < r1.trace.cost.size(); ++i)
    CHECK(r1.trace.cost[i] == r2.trace.cost[i]);
  CHECK(max_abs_diff(r1.factors.a, r2.factors.a) == 0.0);
  CHECK(max_abs_diff(r1.factors.c, r2.factors.c) == 0.0);

  const CpdFactors init = initialize({5, 4, 5}, 2, cfg);
  CHECK(r1.trace.cost.front() == doctest::Approx(cpd_relative_cost(t, init)).epsilon(1e-12));
}

TEST_CASE("qals honours the iteration cap") {
  CounterRng rng(981);
  const QTensor t = testutil::random_qtensor(rng, {4, 4, 4});
  SolverConfig cfg;
  cfg.seed = 982;
  cfg.max_iters = 3;
  cfg.rel_tol = 0.0;
  const SolveResult r = qals(t, 2, cfg);
  CHECK(r.trace.iterations == 3);
  CHECK_FALSE(r.trace.converged);
  CHECK(r.trace.cost.size() == 4);
}

TEST_CASE("qals rejects degenerate inputs") {
  SolverConfig cfg;
  QTensor zero({3, 3, 3});
  CHECK_THROWS_AS(qals(zero, 2, cfg), DomainError);
  CounterRng rng(983);
  const QTensor order4 = testutil::random_qtensor(rng, {2, 2, 2, 2});
  CHECK_THROWS_AS(qals(order4, 2, cfg), ShapeError);
  CHECK_THROWS_AS(cals(order4, 2, cfg), ShapeError);
}

TEST_CASE("cals recovers exact low-rank data and traces the imaginary mass") {
  CounterRng rng(984);
  const CpdFactors truth = random_factors(rng, 6, 5, 6, 2);
  const QTensor t = cpd_reconstruct(truth);

  SolverConfig cfg;
  cfg.seed = 985;
  cfg.max_iters = 2000;
  cfg.rel_tol = 1e-10;
  const SolveResult r = cals(t, 2, cfg);

  CHECK(r.trace.converged);
  CHECK(r.trace.cost.back() < 1e-8);
  CHECK(r.trace.b_imag_residual.size() == static_cast<std::size_t>(r.trace.iterations));
  // At the solution the complex middle-factor estimate is essentially real.
  CHECK(r.trace.b_imag_residual.back() < 1e-6);

  const AlignmentResult align = align_factors(r.factors, truth);
  for (double v : align.nmse) CHECK(v < 1e-10);
}

TEST_CASE("cals is deterministic") {
  CounterRng rng(986);
  const CpdFactors truth = random_factors(rng, 5, 4, 5, 2);
  const QTensor t = cpd_reconstruct(truth);
  SolverConfig cfg;
  cfg.seed = 987;
  cfg.max_iters = 40;
  const SolveResult r1 = cals(t, 2, cfg);
  const SolveResult r2 = cals(t, 2, cfg);
  REQUIRE(r1.trace.cost.size() == r2.trace.cost.size());
  for (std::size_t i = 0; i < r1.trace.cost.size(); ++i)
    CHECK(r1.trace.cost[i] == r2.trace.cost[i]);
}

TEST_CASE("cals keeps real problems real") {
  CounterRng rng(988);
  const QMatrix a = QMatrix::from_real(testutil::random_rmatrix(rng, 5, 2));
  const RMatrix b = testutil::random_rmatrix(rng, 4, 2);
  const QMatrix c = QMatrix::from_real(testutil::random_rmatrix(rng, 5, 2));
  const CpdFactors truth(a, b, c);
  const QTensor t = cpd_reconstruct(truth);

  SolverConfig cfg;
  cfg.init = SolverInit::Provided;
  cfg.init_factors = random_factors(rng, 5, 4, 5, 2);
  // Flatten the provided start onto the reals.
  CpdFactors start(QMatrix::from_real(cfg.init_factors.a.real_part()),
                   cfg.init_factors.b,
                   QMatrix::from_real(cfg.init_factors.c.real_part()));
  cfg.init_factors = start;
  cfg.max_iters = 50;
  const SolveResult r = cals(t, 2, cfg);
  CHECK(plane_mass(r.factors.a) < 1e-10);
  CHECK(plane_mass(r.factors.c) < 1e-10);
  for (double v : r.trace.b_imag_residual) CHECK(v < 1e-10);
}

TEST_CASE("both solvers agree on noiseless data") {
  CounterRng rng(989);
  const CpdFactors truth = random_factors(rng, 5, 4, 6, 3);
  const QTensor t = cpd_reconstruct(truth);
  SolverConfig cfg;
  cfg.seed = 990;
  cfg.max_iters = 3000;
  cfg.rel_tol = 1e-10;
  const SolveResult rq = qals(t, 3, cfg);
  const SolveResult rc = cals(t, 3, cfg);
  CHECK(rq.trace.cost.back() < 1e-7);
  CHECK(rc.trace.cost.back() < 1e-7);
  CHECK(max_abs_diff(cpd_reconstruct(rq.factors), cpd_reconstruct(rc.factors)) <
        1e-5 * frobenius_norm(t));
}
