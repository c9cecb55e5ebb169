#include "statdisc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace statdisc {
namespace {

struct Evaluation {
  MatrixXd rows;                   // N x M
  std::vector<MatrixXcd> g_lift;   // per grid point, lift order (optional)
  double sup = 0.0;
};

Evaluation evaluate(const ConormalSystem& sys, const ConstrainedLift& lift, int M, bool with_g) {
  const int N = sys.size();
  const MatrixXcd samples = lift.realized().all().boundary(M);
  const VectorXcd grid = unit_grid(M);
  Evaluation ev;
  ev.rows.resize(N, M);
  if (with_g) ev.g_lift.resize(static_cast<std::size_t>(M));
  for (int k = 0; k < M; ++k) {
    ev.rows.col(k) =
        sys.rows_at(samples.col(k), grid(k), with_g ? &ev.g_lift[static_cast<std::size_t>(k)] : nullptr);
  }
  ev.sup = ev.rows.cwiseAbs().maxCoeff();
  return ev;
}

double merit(const Evaluation& ev, const VectorXd& cr, int M) {
  return ev.rows.squaredNorm() / M + cr.squaredNorm();
}

}  // namespace

void SolverConfig::validate() const {
  if (nf < 1) throw Error(ErrorCode::invalid_input, "truncation must be >= 1");
  if (grid < 4 * nf) throw Error(ErrorCode::invalid_input, "grid must satisfy M >= 4 N_F");
  if (!(newton_tol > 0.0)) throw Error(ErrorCode::invalid_input, "newton_tol must be positive");
  if (max_iter < 0 || max_halvings < 0) throw Error(ErrorCode::invalid_input, "iteration limits must be >= 0");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw Error(ErrorCode::invalid_input, "backtrack factor must lie in (0, 1)");
  if (continuation_steps < 1) throw Error(ErrorCode::invalid_input, "continuation_steps must be >= 1");
}

VectorXd cofactor_coords(const ConstrainedLift& lift, int nf) {
  return realify(LiftedDisc(lift.n(), lift.d(), lift.cofactor()), nf);
}

ConstrainedLift from_cofactor_coords(int n, int d, const VectorXd& x, int nf, const VectorXd& c) {
  return ConstrainedLift(n, d, unrealify(n, d, x, nf).all(), c);
}

double lift_l2_norm(const LiftedDisc& lift) { return lift.all().coefficients().norm(); }

// ---------------------------------------------------------------------------
// Chart constraints

ChartConstraints::ChartConstraints(const ConstrainedLift& anchor,
                                   const std::vector<LiftedDisc>& basis, int nf)
    : nf_(nf), anchor_(anchor) {
  const int n = anchor.n();
  const int d = anchor.d();
  const int N = anchor.size();
  const int dim = static_cast<int>(basis.size());
  const int rdeg = nf + 1;
  MatrixXd E(2 * N * (rdeg + 1), dim);
  for (int i = 0; i < dim; ++i) E.col(i) = realify(basis[static_cast<std::size_t>(i)], rdeg);
  const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(E).householderQ() * MatrixXd::Identity(E.rows(), dim);
  for (int i = 0; i < dim; ++i) directions_.push_back(unrealify(n, d, Q.col(i), rdeg));

  // <(1 - zeta) du, E_i>: coefficient j of du pairs with E_i[j] - E_i[j + 1].
  rows_.resize(dim, 2 * N * (nf + 1));
  for (int i = 0; i < dim; ++i) {
    for (int a = 0; a < N; ++a) {
      for (int j = 0; j <= nf; ++j) {
        for (int p = 0; p < 2; ++p) {
          const int src = 2 * (a * (rdeg + 1) + j) + p;
          rows_(i, 2 * (a * (nf + 1) + j) + p) = Q(src, i) - Q(src + 2, i);
        }
      }
    }
  }
  anchor_coords_ = cofactor_coords(anchor, nf);
}

VectorXd ChartConstraints::residual(const VectorXd& u, const VectorXd& s) const {
  return rows_ * (u - anchor_coords_) - s;
}

// ---------------------------------------------------------------------------
// Gauss-Newton

SolveResult solve_constrained(const DefiningFunction& def, const ConstrainedLift& start,
                              const ChartConstraints& chart, const VectorXd& s,
                              const SolverConfig& config, bool want_tangent) {
  config.validate();
  const int n = def.n();
  const int d = def.d();
  const int N = 2 * n + 2 * d;
  const int nf = config.nf;
  const int M = config.grid;
  if (start.n() != n || start.d() != d) {
    throw Error(ErrorCode::invalid_input, "start lift dimensions do not match the defining function");
  }
  if (d > n) throw Error(ErrorCode::invalid_input, "solver requires d <= n");
  if (chart.nf() != nf) throw Error(ErrorCode::invalid_input, "chart truncation differs from solver truncation");
  if (s.size() != chart.dim()) throw Error(ErrorCode::invalid_input, "chart coordinate has wrong dimension");

  const ConormalSystem sys(def);
  const VectorXd c = start.c();
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(M));
  VectorXd u = cofactor_coords(start, nf);
  SolveResult result;

  auto lift_of = [&](const VectorXd& x) { return from_cofactor_coords(n, d, x, nf, c); };
  auto stacked = [&](const Evaluation& ev, const VectorXd& cr) {
    VectorXd F(N * M + cr.size());
    F.head(N * M) = Eigen::Map<const VectorXd>(ev.rows.data(), N * M) * inv_sqrt_m;
    F.tail(cr.size()) = cr;
    return F;
  };
  auto factor = [&](const Evaluation& ev) {
    MatrixXd J(N * M + chart.dim(), 2 * N * (nf + 1));
    J.topRows(N * M) = realified_operator(ev.g_lift, true, nf, inv_sqrt_m);
    J.bottomRows(chart.dim()) = chart.rows();
    Eigen::ColPivHouseholderQR<MatrixXd> qr(J);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    const double cond = diag.maxCoeff() / std::max(diag.minCoeff(), 1e-300);
    if (!(cond < config.max_condition)) {
      throw Error(ErrorCode::linearization_singular, "linearization singular");
    }
    return qr;
  };

  Evaluation ev = evaluate(sys, lift_of(u), M, true);
  VectorXd cr = chart.residual(u, s);
  double step = 0.0;
  for (int iter = 0;; ++iter) {
    const double csup = cr.size() ? cr.cwiseAbs().maxCoeff() : 0.0;
    result.trace.push_back({iter, ev.sup, csup, step, def.scale()});
    if (ev.sup < config.newton_tol && csup < config.newton_tol) {
      result.iterations = iter;
      result.residual = ev.sup;
      result.constraint_residual = csup;
      break;
    }
    if (iter >= config.max_iter) {
      std::ostringstream msg;
      msg << "Newton did not converge after " << iter << " iterations (residual " << ev.sup << ")";
      throw Error(ErrorCode::not_converged, msg.str());
    }
    const auto qr = factor(ev);
    const VectorXd delta = -qr.solve(stacked(ev, cr));
    const double m0 = merit(ev, cr, M);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= config.max_halvings; ++h) {
      const VectorXd trial = u + lambda * delta;
      Evaluation tev = evaluate(sys, lift_of(trial), M, false);
      const VectorXd tcr = chart.residual(trial, s);
      if (merit(tev, tcr, M) < m0) {
        u = trial;
        cr = tcr;
        accepted = true;
        break;
      }
      lambda *= config.backtrack;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "Newton stalled at residual " << ev.sup;
      throw Error(ErrorCode::not_converged, msg.str());
    }
    step = lambda;
    ev = evaluate(sys, lift_of(u), M, true);
  }

  result.lift = lift_of(u);
  if (want_tangent) {
    const auto qr = factor(ev);
    MatrixXd rhs = MatrixXd::Zero(N * M + chart.dim(), chart.dim());
    rhs.bottomRows(chart.dim()).setIdentity();
    result.tangent = qr.solve(rhs);
  }
  return result;
}

SolveResult continuation(const DefiningFunction& def, const ConstrainedLift& start,
                         const ChartConstraints& chart, const VectorXd& s,
                         const SolverConfig& config) {
  config.validate();
  const double target = def.scale();
  if (target == 0.0 || def.perturbation().empty()) {
    return solve_constrained(def, start, chart, s, config);
  }
  ConstrainedLift current = start;
  SolveResult out;
  for (int k = 1; k <= config.continuation_steps; ++k) {
    const double tk = target * k / config.continuation_steps;
    try {
      SolveResult step = solve_constrained(def.with_scale(tk), current, chart, s, config);
      current = step.lift;
      out.iterations += step.iterations;
      out.trace.insert(out.trace.end(), step.trace.begin(), step.trace.end());
      out.residual = step.residual;
      out.constraint_residual = step.constraint_residual;
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " at t = " << tk;
      throw Error(e.code(), msg.str());
    }
  }
  out.lift = current;
  return out;
}

std::optional<double> convergence_order(const std::vector<TraceEntry>& trace, double onset, double floor) {
  std::optional<double> order;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    if (trace[k].t != trace[k + 1].t) continue;  // continuation step boundary
    const double r0 = trace[k].residual, r1 = trace[k + 1].residual;
    if (!(r0 < onset) || !(r1 > floor)) continue;
    const double p = std::log(r1) / std::log(r0);
    order = order ? std::min(*order, p) : p;
  }
  return order;
}

// ---------------------------------------------------------------------------
// Charts

FamilyChart FamilyChart::build(const DefiningFunction& def, const VectorXcd& V, const VectorXd& c,
                               std::optional<double> radius, const SolverConfig& config) {
  config.validate();
  FamilyChart chart;
  chart.def_ = def;
  chart.config_ = config;
  const HermitianPencil& pencil = def.pencil();
  ConstrainedLift f0 = build_initial_lift(pencil, V, c);
  f0 = ConstrainedLift(f0.n(), f0.d(), f0.cofactor().resized(config.nf), f0.c());
  const KernelBasis basis = explicit_kernel_basis(pencil, V, c);
  chart.constraints_ = ChartConstraints(f0, basis.elements, config.nf);
  chart.dim_ = chart.constraints_.dim();
  chart.radius_ = radius.value_or(0.1 * lift_l2_norm(f0.realized()));
  if (def.is_quadric()) {
    chart.base_ = f0;
    chart.base_solve_.lift = f0;
  } else {
    chart.base_solve_ = continuation(def, f0, chart.constraints_, VectorXd::Zero(chart.dim_), config);
    chart.base_ = chart.base_solve_.lift;
  }
  return chart;
}

FamilyChart FamilyChart::synthetic(const DefiningFunction& def, const ConstrainedLift& base,
                                   const KernelBasis& basis, double radius) {
  if (!basis.constrained || basis.cofactors.size() != basis.elements.size()) {
    throw Error(ErrorCode::invalid_input, "synthetic charts need a constrained kernel basis");
  }
  FamilyChart chart;
  chart.def_ = def;
  chart.synthetic_ = true;
  chart.radius_ = radius;
  chart.dim_ = basis.dim;
  int nf = base.nf();
  for (const auto& u : basis.cofactors) nf = std::max(nf, u.nf());
  chart.config_.nf = nf;
  chart.config_.grid = 4 * (nf + 2);
  chart.base_ = ConstrainedLift(base.n(), base.d(), base.cofactor().resized(nf), base.c());
  chart.base_solve_.lift = chart.base_;
  for (const auto& u : basis.cofactors) chart.synthetic_cofactors_.push_back(u.resized(nf));
  return chart;
}

SolveResult FamilyChart::solve(const VectorXd& s, const ConstrainedLift* warm, bool want_tangent) const {
  if (s.size() != dim_) throw Error(ErrorCode::invalid_input, "chart coordinate has wrong dimension");
  if (!(s.norm() < radius_)) throw Error(ErrorCode::invalid_input, "chart coordinate outside the chart radius");
  if (!synthetic_) {
    return solve_constrained(def_, warm ? *warm : base_, constraints_, s, config_, want_tangent);
  }
  SolveResult out;
  AnalyticDisc u = base_.cofactor();
  for (int i = 0; i < dim_; ++i) u = u + synthetic_cofactors_[static_cast<std::size_t>(i)] * s(i);
  out.lift = ConstrainedLift(base_.n(), base_.d(), u, base_.c());
  if (want_tangent) {
    MatrixXd T(2 * base_.size() * (config_.nf + 1), dim_);
    for (int i = 0; i < dim_; ++i) {
      T.col(i) = realify(LiftedDisc(base_.n(), base_.d(), synthetic_cofactors_[static_cast<std::size_t>(i)]),
                         config_.nf);
    }
    out.tangent = T;
  }
  return out;
}

}  // namespace statdisc
