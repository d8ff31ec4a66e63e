#include "qten/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "qten/lstsq.hpp"
#include "qten/rng.hpp"

namespace qten {

namespace {

constexpr double kCostFloor = 100.0 * std::numeric_limits<double>::epsilon();

void require_order3(const QTensor& t, const char* who) {
  if (t.order() != 3) throw ShapeError(std::string(who) + ": order-3 tensors only");
}

void check_finite(const QMatrix& m, const char* block) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const Quaternion& q = m(i, j);
      if (!std::isfinite(q.w) || !std::isfinite(q.x) || !std::isfinite(q.y) ||
          !std::isfinite(q.z))
        throw SingularUpdateError(std::string(block) + " update produced non-finite values");
    }
}

bool converged_step(double prev, double cur, double rel_tol) {
  const double dev = std::abs(cur - prev) / std::max(prev, std::numeric_limits<double>::min());
  return dev < rel_tol || cur < kCostFloor;
}

double fit_cost(const QMatrix& t0, const QMatrix& a, const QMatrix& kr_cb, double norm_t) {
  return frobenius_norm(t0 - matmul_direct(a, transpose(kr_cb))) / norm_t;
}

struct TimedTrace {
  SolverTrace trace;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  void finish() {
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

CpdFactors initialize(const std::array<Index, 3>& dims, Index f, const SolverConfig& cfg) {
  if (f < 1) throw ShapeError("initialize: rank must be positive");
  if (cfg.init == SolverInit::Provided) {
    const CpdFactors& p = cfg.init_factors;
    if (p.a.rows() != dims[0] || p.b.rows() != dims[1] || p.c.rows() != dims[2] ||
        p.a.cols() != f || p.b.cols() != f || p.c.cols() != f)
      throw ShapeError("initialize: provided factors have the wrong shape");
    return p;
  }
  CounterRng rng(cfg.seed);
  CpdFactors init;
  auto draw_q = [&rng](Index rows, Index cols) {
    QMatrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) {
        Quaternion& q = m(r, c);
        q.w = rng.next_normal();
        q.x = rng.next_normal();
        q.y = rng.next_normal();
        q.z = rng.next_normal();
      }
    return m;
  };
  init.a = draw_q(dims[0], f);
  init.b.resize(dims[1], f);
  for (Index c = 0; c < f; ++c)
    for (Index r = 0; r < dims[1]; ++r) init.b(r, c) = rng.next_normal();
  init.c = draw_q(dims[2], f);
  return init;
}

double cpd_relative_cost(const QTensor& t, const CpdFactors& f) {
  const double n = frobenius_norm(t);
  if (n == 0.0) throw DomainError("cpd_relative_cost: zero tensor");
  return frobenius_norm(t - cpd_reconstruct(f)) / n;
}

namespace solver_detail {

QMatrix update_a(const QMatrix& t_unfold0, const RMatrix& b, const QMatrix& c) {
  const QMatrix kr = khatri_rao_direct(c, QMatrix::from_real(b));
  QMatrix a = lstsq_direct(t_unfold0, transpose(kr)).solution;
  check_finite(a, "A");
  return a;
}

RMatrix update_b(const QMatrix& t_unfold1, const QMatrix& a, const QMatrix& c) {
  const QMatrix kr = khatri_rao_reverse(c, a);
  QMatrix b = lstsq_real_constrained(t_unfold1, transpose(kr)).solution;
  check_finite(b, "B");
  return b.real_part();
}

QMatrix update_c(const QMatrix& t_unfold2, const QMatrix& a, const RMatrix& b) {
  const QMatrix kr = khatri_rao_direct(QMatrix::from_real(b), a);
  QMatrix c = lstsq_reverse(t_unfold2, transpose(kr)).solution;
  check_finite(c, "C");
  return c;
}

}  // namespace solver_detail

SolveResult qals(const QTensor& t, Index f, const SolverConfig& cfg) {
  require_order3(t, "qals");
  const std::array<Index, 3> dims{t.dims()[0], t.dims()[1], t.dims()[2]};
  CpdFactors cur = initialize(dims, f, cfg);

  const QMatrix t0 = unfold(t, 0);
  const QMatrix t1 = unfold(t, 1);
  const QMatrix t2 = unfold(t, 2);
  const double norm_t = frobenius_norm(t);
  if (norm_t == 0.0) throw DomainError("qals: zero tensor");

  TimedTrace tt;
  QMatrix kr_cb = khatri_rao_direct(cur.c, QMatrix::from_real(cur.b));
  double cost = fit_cost(t0, cur.a, kr_cb, norm_t);
  tt.trace.cost.push_back(cost);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    cur.a = solver_detail::update_a(t0, cur.b, cur.c);
    cur.b = solver_detail::update_b(t1, cur.a, cur.c);
    cur.c = solver_detail::update_c(t2, cur.a, cur.b);
    kr_cb = khatri_rao_direct(cur.c, QMatrix::from_real(cur.b));
    const double prev = cost;
    cost = fit_cost(t0, cur.a, kr_cb, norm_t);
    tt.trace.cost.push_back(cost);
    tt.trace.iterations = it;
    if (converged_step(prev, cost, cfg.rel_tol)) {
      tt.trace.converged = true;
      break;
    }
  }
  tt.finish();
  return {std::move(cur), std::move(tt.trace)};
}

namespace {

// Data-side CONFAC stacks of the Cayley-Dickson parts, layouts as in
// confac_unfoldings.
struct ConfacData {
  CMatrix ta, tb, tc;
};

ConfacData confac_data_stacks(const CdParts& parts) {
  const Index n1 = parts.dims[0], n2 = parts.dims[1], n3 = parts.dims[2];
  ConfacData d;
  d.ta.resize(n1, 2 * n2 * n3);
  d.tb.resize(n2, 2 * n1 * n3);
  d.tc.resize(n3, 2 * n1 * n2);
  for (Index i3 = 0; i3 < n3; ++i3)
    for (Index i2 = 0; i2 < n2; ++i2)
      for (Index i1 = 0; i1 < n1; ++i1) {
        const auto v1 = parts.t1[static_cast<std::size_t>(i1 + n1 * (i2 + n2 * i3))];
        const auto v2 = parts.t2[static_cast<std::size_t>(i1 + n1 * (i2 + n2 * i3))];
        d.ta(i1, i3 * n2 + i2) = v1;
        d.ta(i1, n3 * n2 + i3 * n2 + i2) = v2;
        d.tb(i2, i1 * n3 + i3) = v2;
        d.tb(i2, n1 * n3 + i1 * n3 + i3) = std::conj(v1);
        d.tc(i3, i1 * n2 + i2) = v2;
        d.tc(i3, n1 * n2 + i1 * n2 + i2) = std::conj(v1);
      }
  return d;
}

void check_finite_c(const CMatrix& m, const char* block) {
  if (!m.allFinite())
    throw SingularUpdateError(std::string(block) + " update produced non-finite values");
}

}  // namespace

SolveResult cals(const QTensor& t, Index f, const SolverConfig& cfg) {
  require_order3(t, "cals");
  const std::array<Index, 3> dims{t.dims()[0], t.dims()[1], t.dims()[2]};
  CpdFactors cur = initialize(dims, f, cfg);

  const double norm_t = frobenius_norm(t);
  if (norm_t == 0.0) throw DomainError("cals: zero tensor");
  const QMatrix t0 = unfold(t, 0);
  const ConfacData data = confac_data_stacks(cayley_dickson_parts(t));

  ConfacModel m = confac_from_cpd(cur);
  const CMatrix psi = m.psi.cast<std::complex<double>>();
  const CMatrix phi = m.phi.cast<std::complex<double>>();
  CMatrix u = m.u;
  CMatrix w = m.w;
  RMatrix b = m.b;

  auto chi_a = [&]() {
    CMatrix x(2 * u.rows(), u.cols());
    x.topRows(u.rows()) = u;
    x.bottomRows(u.rows()) = u.conjugate() * psi;
    return x;
  };
  auto chi_c = [&]() {
    CMatrix x(2 * w.rows(), w.cols());
    x.topRows(w.rows()) = -(w.conjugate() * psi);
    x.bottomRows(w.rows()) = w;
    return x;
  };

  TimedTrace tt;
  QMatrix kr_cb = khatri_rao_direct(cur.c, QMatrix::from_real(cur.b));
  double cost = fit_cost(t0, cur.a, kr_cb, norm_t);
  tt.trace.cost.push_back(cost);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const CMatrix xa = chi_a();
    const CMatrix bc = data.tb * pinv_complex(phi * khatri_rao(xa, w).transpose());
    check_finite_c(bc, "B");
    const double bnorm = bc.norm();
    tt.trace.b_imag_residual.push_back(
        bnorm > 0.0 ? bc.imag().norm() / bnorm : 0.0);
    b = bc.real();
    const CMatrix bphi = (b * m.phi).cast<std::complex<double>>();
    w = data.tc * pinv_complex(khatri_rao(xa, bphi).transpose());
    check_finite_c(w, "C");
    u = data.ta * pinv_complex(khatri_rao(chi_c(), bphi).transpose());
    check_finite_c(u, "A");

    cur.a = confac_factor_a(u);
    cur.b = b;
    cur.c = confac_factor_c(w);
    kr_cb = khatri_rao_direct(cur.c, QMatrix::from_real(cur.b));
    const double prev = cost;
    cost = fit_cost(t0, cur.a, kr_cb, norm_t);
    tt.trace.cost.push_back(cost);
    tt.trace.iterations = it;
    if (converged_step(prev, cost, cfg.rel_tol)) {
      tt.trace.converged = true;
      break;
    }
  }
  tt.finish();
  return {std::move(cur), std::move(tt.trace)};
}

}  // namespace qten
