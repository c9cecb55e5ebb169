#include "statdisc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace statdisc {

RankReport rank_report(const MatrixXd& jacobian, int expected, double rel_tol) {
  RankReport r;
  r.jacobian = jacobian;
  r.expected = expected;
  r.tolerance = rel_tol;
  Eigen::JacobiSVD<MatrixXd> svd(jacobian);
  r.singular_values = svd.singularValues();
  const double smax = r.singular_values.size() ? r.singular_values(0) : 0.0;
  for (int i = 0; i < r.singular_values.size(); ++i) {
    if (r.singular_values(i) > rel_tol * smax) ++r.rank;
  }
  r.full = r.rank == expected;
  return r;
}

VectorXd realify_vector(const VectorXcd& v) {
  VectorXd out(2 * v.size());
  for (int i = 0; i < v.size(); ++i) {
    out(2 * i) = v(i).real();
    out(2 * i + 1) = v(i).imag();
  }
  return out;
}

VectorXcd center_map(const FamilyChart& chart, const VectorXd& s) {
  const ConstrainedLift lift = chart(s);
  return lift.realized().all().eval(0.0).head(lift.n() + lift.d());
}

namespace {

template <class Map>
MatrixXd central_differences(const FamilyChart& chart, double step, Map&& map) {
  const int dim = chart.dim();
  MatrixXd J;
  for (int i = 0; i < dim; ++i) {
    VectorXd e = VectorXd::Zero(dim);
    e(i) = step;
    const VectorXd col = (realify_vector(map(e)) - realify_vector(map(-e))) / (2.0 * step);
    if (J.size() == 0) J.resize(col.size(), dim);
    J.col(i) = col;
  }
  return J;
}

// Real jet Jacobian from the cofactor tangent: jet1 is linear in the cofactor.
MatrixXd jet_jacobian_from_tangent(int n, int d, const MatrixXd& T, int nf) {
  const int N = 2 * n + 2 * d;
  MatrixXd J(4 * N, T.cols());
  for (int i = 0; i < T.cols(); ++i) {
    const LiftedDisc du = unrealify(n, d, T.col(i), nf);
    J.col(i) = realify_vector(jet1_at_one(LiftedDisc(n, d, du.all().times_one_minus_zeta())));
  }
  return J;
}

}  // namespace

RankReport center_jacobian(const FamilyChart& chart, double step) {
  const MatrixXd J = central_differences(chart, step, [&](const VectorXd& s) { return center_map(chart, s); });
  return rank_report(J, chart.dim());
}

VectorXcd jet_map(const FamilyChart& chart, const VectorXd& s) { return jet1_at_one(chart(s).realized()); }

RankReport jet_jacobian(const FamilyChart& chart, double step) {
  const MatrixXd J = central_differences(chart, step, [&](const VectorXd& s) { return jet_map(chart, s); });
  return rank_report(J, chart.dim());
}

// ---------------------------------------------------------------------------
// Recovery from the 1-jet

namespace {

RecoveryResult gauss_newton_jet(const FamilyChart& chart, const VectorXd& target, const VectorXd& s_init,
                                const RecoveryOptions& opt) {
  const int n = chart.base().n();
  const int d = chart.base().d();
  const int nf = chart.config().nf;
  const double limit = 0.999 * chart.radius();
  RecoveryResult out;
  out.s = s_init;
  SolveResult cur = chart.solve(out.s, nullptr, true);
  VectorXd F = realify_vector(jet1_at_one(cur.lift.realized())) - target;
  bool converged = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    const MatrixXd J = jet_jacobian_from_tangent(n, d, *cur.tangent, nf);
    const VectorXd step = Eigen::ColPivHouseholderQR<MatrixXd>(J).solve(-F);
    double lambda = 1.0;
    while ((out.s + lambda * step).norm() >= limit && lambda > 1e-6) lambda *= 0.5;
    const VectorXd s_new = out.s + lambda * step;
    const ConstrainedLift warm = cur.lift;
    cur = chart.solve(s_new, &warm, true);
    out.s = s_new;
    F = realify_vector(jet1_at_one(cur.lift.realized())) - target;
    out.iterations = it + 1;
    const double res = F.cwiseAbs().maxCoeff();
    if (res < opt.tol && lambda * step.norm() < 1e-10) {
      converged = true;
      break;
    }
  }
  out.jet_residual = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
  if (!converged && out.jet_residual < opt.tol) converged = true;
  if (!converged) {
    throw Error(ErrorCode::not_converged,
                "jet recovery did not converge (residual " + std::to_string(out.jet_residual) + ")");
  }
  return out;
}

}  // namespace

RecoveryResult recover_from_jet(const FamilyChart& chart, const VectorXcd& target, const VectorXd& s_init,
                                const RecoveryOptions& options) {
  const VectorXd tgt = realify_vector(target);
  RecoveryResult best = gauss_newton_jet(chart, tgt, s_init, options);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  const double scale = options.restart_scale * chart.radius();
  for (int r = 0; r < options.restarts; ++r) {
    VectorXd dir(chart.dim());
    for (int i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
    VectorXd s0 = best.s + scale * dir.normalized();
    if (s0.norm() >= 0.9 * chart.radius()) s0 *= 0.9 * chart.radius() / s0.norm();
    RecoveryResult alt;
    try {
      alt = gauss_newton_jet(chart, tgt, s0, options);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::not_converged) continue;  // no second fixed point found from here
      throw;
    }
    const double gap = (alt.s - best.s).norm();
    best.restart_spread = std::max(best.restart_spread, gap);
    if (gap > options.agreement) {
      throw Error(ErrorCode::ambiguous_recovery,
                  "distinct chart points share the target jet (gap " + std::to_string(gap) + ")");
    }
  }
  return best;
}

DefiningFunction dilate(const DefiningFunction& def, double t_dil) {
  if (!(t_dil > 0.0)) throw Error(ErrorCode::invalid_input, "dilation parameter must be positive");
  return DefiningFunction(def.pencil(), def.perturbation().rescaled_by_weight(t_dil), def.scale());
}

// ---------------------------------------------------------------------------
// Polynomial automorphisms

PolynomialAutomorphism::PolynomialAutomorphism(int n, int d, std::vector<AutTerm> terms, std::string name)
    : n_(n), d_(d), terms_(std::move(terms)), name_(std::move(name)) {
  if (n < 1 || d < 1) throw Error(ErrorCode::invalid_input, "automorphism dimensions must be positive");
  for (const auto& t : terms_) {
    if (t.component < 0 || t.component >= n + d) throw Error(ErrorCode::invalid_input, "term component out of range");
    if (static_cast<int>(t.exponents.size()) != n + d) throw Error(ErrorCode::invalid_input, "term exponent length must be n + d");
    int deg = 0;
    for (int e : t.exponents) {
      if (e < 0) throw Error(ErrorCode::invalid_input, "negative exponent");
      deg += e;
    }
    if (deg == 0 && t.coefficient != cplx(0.0)) throw Error(ErrorCode::invalid_input, "automorphism must fix the origin");
  }
  if (std::abs(jacobian(VectorXcd::Zero(n + d)).determinant()) < 1e-12) {
    throw Error(ErrorCode::singular_jacobian, "automorphism Jacobian at 0 is singular");
  }
}

namespace {
AutTerm linear_term(int n, int d, int comp, int var, cplx coef) {
  AutTerm t;
  t.component = comp;
  t.coefficient = coef;
  t.exponents.assign(static_cast<std::size_t>(n + d), 0);
  t.exponents[static_cast<std::size_t>(var)] = 1;
  return t;
}

std::vector<AutTerm> diagonal_terms(int n, int d, cplx zf, cplx wf) {
  std::vector<AutTerm> terms;
  for (int a = 0; a < n + d; ++a) terms.push_back(linear_term(n, d, a, a, a < n ? zf : wf));
  return terms;
}
}  // namespace

PolynomialAutomorphism PolynomialAutomorphism::identity(int n, int d) {
  return PolynomialAutomorphism(n, d, diagonal_terms(n, d, 1.0, 1.0), "identity");
}

PolynomialAutomorphism PolynomialAutomorphism::rotation(int n, int d, double theta) {
  return PolynomialAutomorphism(n, d, diagonal_terms(n, d, std::polar(1.0, theta), 1.0), "rotation");
}

PolynomialAutomorphism PolynomialAutomorphism::dilation(int n, int d, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_input, "dilation factor must be positive");
  return PolynomialAutomorphism(n, d, diagonal_terms(n, d, lambda, lambda * lambda), "dilation");
}

PolynomialAutomorphism PolynomialAutomorphism::identity_plus(int n, int d, AutTerm extra, std::string name) {
  auto terms = diagonal_terms(n, d, 1.0, 1.0);
  terms.push_back(std::move(extra));
  return PolynomialAutomorphism(n, d, std::move(terms), std::move(name));
}

VectorXcd PolynomialAutomorphism::eval(const VectorXcd& Z) const {
  VectorXcd out = VectorXcd::Zero(n_ + d_);
  for (const auto& t : terms_) {
    cplx m = t.coefficient;
    for (int i = 0; i < n_ + d_; ++i) {
      for (int e = 0; e < t.exponents[static_cast<std::size_t>(i)]; ++e) m *= Z(i);
    }
    out(t.component) += m;
  }
  return out;
}

MatrixXcd PolynomialAutomorphism::jacobian(const VectorXcd& Z) const {
  const int m = n_ + d_;
  MatrixXcd J = MatrixXcd::Zero(m, m);
  for (const auto& t : terms_) {
    for (int v = 0; v < m; ++v) {
      const int ev = t.exponents[static_cast<std::size_t>(v)];
      if (ev == 0) continue;
      cplx val = t.coefficient * static_cast<double>(ev);
      for (int i = 0; i < m; ++i) {
        const int e = t.exponents[static_cast<std::size_t>(i)] - (i == v ? 1 : 0);
        for (int k = 0; k < e; ++k) val *= Z(i);
      }
      J(t.component, v) += val;
    }
  }
  return J;
}

PolynomialAutomorphism PolynomialAutomorphism::conjugated_by_dilation(double t) const {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_input, "dilation parameter must be positive");
  std::vector<AutTerm> terms = terms_;
  for (auto& term : terms) {
    int w = 0;
    for (int i = 0; i < n_ + d_; ++i) w += term.exponents[static_cast<std::size_t>(i)] * (i < n_ ? 1 : 2);
    w -= term.component < n_ ? 1 : 2;
    term.coefficient *= std::pow(t, w);
  }
  return PolynomialAutomorphism(n_, d_, std::move(terms), name_);
}

bool PolynomialAutomorphism::has_trivial_2jet() const {
  const int m = n_ + d_;
  if ((jacobian(VectorXcd::Zero(m)) - MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-14) return false;
  // Quadratic part must cancel after collecting like terms.
  std::vector<AutTerm> quad;
  for (const auto& t : terms_) {
    int deg = 0;
    for (int e : t.exponents) deg += e;
    if (deg != 2) continue;
    bool merged = false;
    for (auto& q : quad) {
      if (q.component == t.component && q.exponents == t.exponents) {
        q.coefficient += t.coefficient;
        merged = true;
      }
    }
    if (!merged) quad.push_back(t);
  }
  return std::all_of(quad.begin(), quad.end(), [](const AutTerm& q) { return std::abs(q.coefficient) < 1e-14; });
}

std::vector<PolynomialAutomorphism> automorphism_corpus(int n, int d) {
  std::vector<PolynomialAutomorphism> out;
  out.push_back(PolynomialAutomorphism::identity(n, d));
  out.push_back(PolynomialAutomorphism::rotation(n, d, 0.7));
  out.push_back(PolynomialAutomorphism::dilation(n, d, 1.5));
  AutTerm cz;
  cz.component = 0;
  cz.coefficient = 1.0;
  cz.exponents.assign(static_cast<std::size_t>(n + d), 0);
  cz.exponents[0] = 3;
  out.push_back(PolynomialAutomorphism::identity_plus(n, d, cz, "cubic_z"));
  AutTerm cw = cz;
  cw.component = n;
  out.push_back(PolynomialAutomorphism::identity_plus(n, d, cw, "cubic_w"));
  return out;
}

double preservation_residual(const DefiningFunction& def, const PolynomialAutomorphism& F, int samples,
                             double radius, std::uint64_t seed) {
  const int n = def.n();
  const int d = def.d();
  if (F.n() != n || F.d() != d) throw Error(ErrorCode::invalid_input, "automorphism dimensions do not match");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const DefiningFunction quadric(def.pencil());
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    VectorXcd z(n);
    for (int i = 0; i < n; ++i) z(i) = cplx(uni(rng), uni(rng));
    z *= radius * std::abs(uni(rng)) / std::max(z.norm(), 1e-300);
    VectorXcd w(d);
    for (int j = 0; j < d; ++j) w(j) = cplx(0.0, radius * radius * uni(rng));
    // r does not depend on Re w beyond the linear term, so r(z, i Im w) = -Re w on M.
    const VectorXd r0 = def.eval_r(z, w);
    for (int j = 0; j < d; ++j) w(j) -= r0(j);
    VectorXcd Z(n + d);
    Z << z, w;
    const VectorXcd FZ = F.eval(Z);
    const VectorXd r = def.eval_r(FZ.head(n), FZ.tail(d));
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

Pushforward pushforward(const PolynomialAutomorphism& F, const LiftedDisc& lift, int M, std::optional<int> nf) {
  const int n = lift.n();
  const int d = lift.d();
  if (F.n() != n || F.d() != d) throw Error(ErrorCode::invalid_input, "automorphism dimensions do not match");
  int max_deg = 1;
  for (const auto& t : F.terms()) {
    int deg = 0;
    for (int e : t.exponents) deg += e;
    max_deg = std::max(max_deg, deg);
  }
  const int out_nf = nf.value_or(std::min(lift.nf() * max_deg, M / 2 - 1));
  if (out_nf < 0 || out_nf >= M / 2) throw Error(ErrorCode::invalid_input, "push-forward degree must be below M / 2");
  const MatrixXcd S = lift.all().boundary(M);
  MatrixXcd P(lift.size(), M);
  for (int k = 0; k < M; ++k) {
    const VectorXcd Z = S.col(k).head(n + d);
    const VectorXcd cov = S.col(k).tail(n + d);
    const MatrixXcd J = F.jacobian(Z);
    Eigen::PartialPivLU<MatrixXcd> lu(J);
    const double rc = lu.rcond();
    if (!(rc > 1e-12)) throw Error(ErrorCode::singular_jacobian, "automorphism Jacobian is singular along the disc");
    P.col(k).head(n + d) = F.eval(Z);
    // Row covector times J^{-1}, stored as a column.
    P.col(k).tail(n + d) = lu.transpose().solve(cov);
  }
  Pushforward out;
  out.negative_mode_defect = negative_mode_defect(P);
  out.lift = LiftedDisc(n, d, AnalyticDisc::from_boundary(P, out_nf));
  return out;
}

// ---------------------------------------------------------------------------
// Determination experiment

ExperimentReport jet_determination_experiment(const DefiningFunction& def, const PolynomialAutomorphism& F,
                                              const FamilyChart& chart, const ExperimentConfig& config) {
  ExperimentReport rep;
  rep.automorphism = F.name();
  rep.trivial_2jet = F.has_trivial_2jet();
  rep.preservation_residual = preservation_residual(def, F);
  rep.note =
      "Only automorphisms from the shipped corpus are tested; no nontrivial automorphism with trivial "
      "2-jet is known for the instance, so a passing run is the identity check.";
  if (!rep.trivial_2jet) {
    rep.rejection = "2-jet at 0 is not trivial";
    return rep;
  }
  if (!(rep.preservation_residual <= config.preservation_tol)) {
    rep.rejection = "not an automorphism";
    return rep;
  }
  if (config.grid_points < 1) throw Error(ErrorCode::invalid_input, "experiment grid needs at least one point");
  if (chart.dim() < 2) throw Error(ErrorCode::invalid_input, "experiment needs a chart of dimension >= 2");
  rep.accepted = true;

  const PolynomialAutomorphism Ft = F.conjugated_by_dilation(config.t_dil);
  const int g = config.grid_points;
  // Square inscribed in the chart ball: the corners stay at 0.7 radius.
  const double half = 0.5 * chart.radius();
  std::vector<ExperimentRecord> records(static_cast<std::size_t>(g * g));
  for (int a = 0; a < g; ++a) {
    for (int b = 0; b < g; ++b) {
      VectorXd s = VectorXd::Zero(chart.dim());
      s(0) = g == 1 ? 0.0 : -half + 2.0 * half * a / (g - 1);
      s(1) = g == 1 ? 0.0 : -half + 2.0 * half * b / (g - 1);
      records[static_cast<std::size_t>(a * g + b)].s = s;
    }
  }

  auto run_one = [&](ExperimentRecord& rec) {
    try {
      const LiftedDisc f = chart(rec.s).realized();
      const int n = f.n();
      const int d = f.d();
      rec.center = f.all().eval(0.0).head(n + d);
      const Pushforward push = pushforward(Ft, f, chart.config().grid, f.nf());
      const VectorXcd jet_f = jet1_at_one(f);
      const VectorXcd jet_p = jet1_at_one(push.lift);
      rec.jet_defect = (jet_p - jet_f).cwiseAbs().maxCoeff();
      const RecoveryResult rr = recover_from_jet(chart, jet_p, rec.s, config.recovery);
      rec.recovery_distance = (rr.s - rec.s).norm();
      rec.fixed_point_defect = (Ft.eval(rec.center) - rec.center).cwiseAbs().maxCoeff();
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.status = std::string("failed: ") + e.what();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(records.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) run_one(records[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  rep.records = std::move(records);
  for (const auto& r : rep.records) {
    rep.max_fixed_point_defect = std::max(rep.max_fixed_point_defect, r.fixed_point_defect);
    rep.max_jet_defect = std::max(rep.max_jet_defect, r.jet_defect);
  }
  return rep;
}

}  // namespace statdisc
