#include "statdisc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace statdisc {
namespace {

namespace fs = std::filesystem;

// Raised inside an analysis when a prerequisite cannot be met.
struct Unsatisfiable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

class Pipeline {
 public:
  Pipeline(const Scenario& s, const std::optional<fs::path>& out)
      : s_(s), out_(out), def0_(s.pencil), def_(s.defining_function()) {}

  RunResult run() {
    RunResult res;
    ojson& rep = res.report;
    rep["schema_version"] = kSchemaVersion;
    rep["seed"] = s_.seed;
    rep["scenario"] = scenario_to_json(s_);
    resolve_witnesses();
    rep["witnesses"] = witnesses_json();

    ojson analyses = ojson::object();
    for (const auto& name : kAnalysisOrder) {
      if (std::find(s_.analyses.begin(), s_.analyses.end(), name) == s_.analyses.end()) continue;
      ojson entry;
      try {
        entry = dispatch(name);
      } catch (const Unsatisfiable& e) {
        entry = {{"skipped", e.what()}};
        assertion(name + ".prerequisites", false, e.what());
      } catch (const Error& e) {
        entry = {{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}};
        assertion(name + ".completed", false, e.what());
      } catch (const std::exception& e) {
        entry = {{"error", {{"code", "internal"}, {"message", e.what()}}}};
        assertion(name + ".completed", false, e.what());
      }
      analyses[name] = entry;
    }
    rep["analyses"] = analyses;
    rep["assertions"] = assertions_;
    const bool ok = std::all_of(assertions_.begin(), assertions_.end(),
                                [](const ojson& a) { return a.at("passed").get<bool>(); });
    rep["status"] = ok ? "passed" : "failed";
    res.exit_code = ok ? 0 : 1;
    res.summary = summary_;
    if (out_) {
      fs::create_directories(*out_);
      std::ofstream f(*out_ / "report.json");
      f << rep.dump(2) << '\n';
    }
    return res;
  }

 private:
  const Scenario& s_;
  std::optional<fs::path> out_;
  DefiningFunction def0_;
  DefiningFunction def_;
  NonDegeneracyReport nondeg_;
  VectorXcd V_;
  std::optional<VectorXd> c_;
  std::string v_source_, c_source_;
  std::unique_ptr<FamilyChart> chart_;
  ojson assertions_ = ojson::array();
  std::vector<std::string> summary_;

  void assertion(const std::string& name, bool passed, const std::string& detail = "") {
    assertions_.push_back({{"name", name}, {"passed", passed}, {"detail", detail}});
  }
  void say(const std::string& line) { summary_.push_back(line); }

  std::unique_ptr<CsvWriter> csv(const std::string& file, const std::vector<std::string>& header) const {
    if (!out_) return nullptr;
    fs::create_directories(*out_);
    return std::make_unique<CsvWriter>(*out_ / file, header);
  }

  void resolve_witnesses() {
    nondeg_ = analyze_nondegeneracy(s_.pencil, s_.witness_trials, s_.seed);
    if (s_.V) {
      V_ = *s_.V;
      v_source_ = "config";
    } else if (nondeg_.full_witness) {
      V_ = *nondeg_.full_witness;
      v_source_ = "search";
    } else {
      // No full witness exists: any seeded vector serves for the degenerate branch.
      std::mt19937_64 rng(s_.seed);
      std::normal_distribution<double> normal;
      V_.resize(s_.n());
      for (int i = 0; i < s_.n(); ++i) V_(i) = cplx(normal(rng), normal(rng));
      v_source_ = "fallback";
    }
    if (s_.c) {
      c_ = *s_.c;
      c_source_ = "config";
    } else if (nondeg_.invertible_combination) {
      c_ = *nondeg_.invertible_combination;
      c_source_ = "search";
    } else {
      c_source_ = "none";
    }
  }

  ojson witnesses_json() const {
    return {{"V", vector_to_json(V_)},
            {"V_source", v_source_},
            {"c", c_ ? vector_to_json(*c_) : ojson(nullptr)},
            {"c_source", c_source_}};
  }

  const VectorXd& need_c() const {
    if (!c_) throw Unsatisfiable("no invertible combination sum c_j A_j (condition (t) fails)");
    if (numeric_rank(s_.pencil.combination(*c_)) < s_.n()) {
      throw Unsatisfiable("sum c_j A_j is singular for the given c");
    }
    return *c_;
  }

  ConstrainedLift initial_lift() const {
    ConstrainedLift f0 = build_initial_lift(s_.pencil, V_, need_c());
    return ConstrainedLift(f0.n(), f0.d(), f0.cofactor().resized(s_.solver.nf), f0.c());
  }

  const FamilyChart& chart() {
    if (!chart_) {
      need_c();
      chart_ = std::make_unique<FamilyChart>(make_analysis_chart(def_, V_, *c_, s_.solver));
    }
    return *chart_;
  }

  ojson dispatch(const std::string& name) {
    if (name == "check") return check();
    if (name == "disc") return disc();
    if (name == "indices") return indices();
    if (name == "kernel") return kernel();
    if (name == "solve") return solve();
    if (name == "centers") return centers();
    if (name == "jets") return jets();
    return determine();
  }

  ojson check() {
    say(std::string("beloshapka=") + (nondeg_.beloshapka ? "true" : "false"));
    say(std::string("fully=") + (nondeg_.fully ? "true" : "false"));
    return to_json(nondeg_);
  }

  ojson disc() {
    const int M = s_.solver.grid;
    const ConstrainedLift f0 = initial_lift();
    const LiftedDisc lift = f0.realized();
    const StationaryReport rep = verify_stationary(def0_, lift, s_.tol, M);
    ojson j;
    j["initial_lift"] = to_json(rep);
    j["cofactor_holder_norm"] = factored_norm(FactoredDisc{f0.cofactor()}, s_.alpha, std::max(M, 64));
    j["center"] = vector_to_json(VectorXcd(lift.all().eval(0.0).head(s_.n() + s_.d())));
    assertion("disc.initial_lift_stationary", rep.stationary);
    if (s_.W || s_.y) {
      const VectorXcd W = s_.W.value_or(VectorXcd::Zero(s_.n()));
      const VectorXd y = s_.y.value_or(VectorXd::Zero(s_.d()));
      const StationaryReport q = verify_stationary(def0_, build_quadric_lift(s_.pencil, V_, W, *c_, y), s_.tol, M);
      j["quadric_lift"] = to_json(q);
      assertion("disc.quadric_lift_stationary", q.stationary);
    }
    say("stationary=" + std::string(rep.stationary ? "true" : "false"));
    say("lift_defect=" + fmt(rep.lift_defect));
    if (auto w = csv("disc_boundary.csv", boundary_header(lift.size()))) {
      const MatrixXcd S = lift.all().boundary(M);
      for (int k = 0; k < M; ++k) {
        std::vector<double> row{static_cast<double>(k), 2.0 * std::numbers::pi * k / M};
        for (int a = 0; a < lift.size(); ++a) {
          row.push_back(S(a, k).real());
          row.push_back(S(a, k).imag());
        }
        w->row(row);
      }
    }
    return j;
  }

  static std::vector<std::string> boundary_header(int N) {
    std::vector<std::string> h{"k", "theta"};
    for (int a = 0; a < N; ++a) {
      h.push_back("re" + std::to_string(a));
      h.push_back("im" + std::to_string(a));
    }
    return h;
  }

  ojson indices() {
    const ConstrainedLift f0 = initial_lift();
    const BoundaryMatrix G = assemble_G(def0_, f0.realized(), s_.solver.grid);
    const int maslov = maslov_index(G);
    const int kappa = 2 * s_.n() + 2 * s_.d();
    ojson j;
    j["maslov"] = maslov;
    j["min_abs_det"] = G.min_abs_det();
    say("maslov=" + std::to_string(maslov));
    try {
      const IndexData idx = partial_indices_structured(G);
      j["partial_indices"] = idx.partial_indices;
      say("partial_indices=" + join_ints(idx.partial_indices));
      std::vector<int> expected;
      for (int i = 0; i < s_.d(); ++i) expected.push_back(0);
      for (int i = 0; i < 2 * s_.n(); ++i) expected.push_back(1);
      for (int i = 0; i < s_.d(); ++i) expected.push_back(2);
      std::vector<int> got = idx.partial_indices;
      std::sort(got.begin(), got.end());
      assertion("indices.partial_pattern", got == expected, join_ints(got));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::unstructured) throw;
      j["partial_indices"] = nullptr;
      j["partial_indices_note"] = e.what();
    }
    assertion("indices.maslov_equals_2n_plus_2d", maslov == kappa, std::to_string(maslov));
    return j;
  }

  ojson kernel() {
    const int nf = s_.solver.nf;
    const ConstrainedLift f0 = initial_lift();
    const BoundaryMatrix G = assemble_G(def0_, f0.realized(), s_.solver.grid);
    const KernelBasis ku = numeric_kernel(G, false, nf);
    const KernelBasis kc = numeric_kernel(G, true, nf);
    const int N = 2 * s_.n() + 2 * s_.d();
    ojson j;
    j["unconstrained"] = {{"dim", ku.dim}, {"gap_ratio", ku.gap_ratio}};
    j["constrained"] = {{"dim", kc.dim}, {"gap_ratio", kc.gap_ratio}};
    say("unconstrained_dim=" + std::to_string(ku.dim));
    say("constrained_dim=" + std::to_string(kc.dim));
    assertion("kernel.unconstrained_dim", ku.dim == 2 * N, std::to_string(ku.dim));
    assertion("kernel.constrained_dim", kc.dim == N, std::to_string(kc.dim));
    assertion("kernel.gap", ku.gap_ratio > kKernelGapRatio && kc.gap_ratio > kKernelGapRatio);
    const GramD gram = gram_D(s_.pencil, V_);
    if (gram.positive_definite && kc.dim == N) {
      const KernelBasis ex = explicit_kernel_basis(s_.pencil, V_, *c_);
      MatrixXd X(2 * N * (kc.nf + 1), kc.dim), Y(2 * N * (kc.nf + 1), ex.dim);
      for (int i = 0; i < kc.dim; ++i) X.col(i) = realify(kc.elements[static_cast<std::size_t>(i)], kc.nf);
      for (int i = 0; i < ex.dim; ++i) Y.col(i) = realify(ex.elements[static_cast<std::size_t>(i)], kc.nf);
      const double angle = max_principal_angle(X, Y);
      j["explicit_principal_angle"] = angle;
      assertion("kernel.explicit_matches_numeric", angle < 1e-6, fmt(angle));
    } else {
      j["explicit_principal_angle"] = nullptr;
    }
    if (auto w = csv("kernel_singular_values.csv", {"constrained", "index", "value"})) {
      for (int i = 0; i < ku.singular_values.size(); ++i) w->row({0.0, double(i), ku.singular_values(i)});
      for (int i = 0; i < kc.singular_values.size(); ++i) w->row({1.0, double(i), kc.singular_values(i)});
    }
    return j;
  }

  ojson solve() {
    need_c();
    if (s_.d() > s_.n()) throw Unsatisfiable("the solver requires d <= n");
    const GramD gram = gram_D(s_.pencil, V_);
    if (!gram.positive_definite) throw Unsatisfiable("Gram matrix of the witness is not positive definite");
    const FamilyChart& ch = chart();
    const SolveResult& sr = ch.base_solve();
    const LiftedDisc lift = ch.base().realized();
    const StationaryReport rep = verify_stationary(def_, lift, s_.tol, s_.solver.grid);
    const ConstrainedLift f0 = initial_lift();
    const double dist = lift_l2_norm(LiftedDisc(s_.n(), s_.d(), lift.all() - f0.realized().all()));
    const auto order = convergence_order(sr.trace);
    ojson j;
    j["iterations"] = sr.iterations;
    j["residual"] = sr.residual;
    j["constraint_residual"] = sr.constraint_residual;
    j["convergence_order"] = order ? ojson(*order) : ojson(nullptr);
    j["distance_to_initial"] = dist;
    j["verification"] = to_json(rep);
    say("iterations=" + std::to_string(sr.iterations));
    say("residual=" + fmt(sr.residual));
    say("distance_to_initial=" + fmt(dist));
    assertion("solve.residual", sr.residual <= s_.solver.newton_tol, fmt(sr.residual));
    assertion("solve.stationary", rep.stationary, fmt(rep.lift_defect));
    if (auto w = csv("solver_trace.csv", {"iteration", "t", "residual", "constraint_residual", "step"})) {
      for (const auto& e : sr.trace) w->row({double(e.iteration), e.t, e.residual, e.constraint_residual, e.step});
    }
    return j;
  }

  ojson centers() {
    const FamilyChart& ch = chart();
    const RankReport r = center_jacobian(ch);
    ojson j = to_json(r);
    j["chart"] = ch.is_synthetic() ? "synthetic" : "solver";
    j["center_at_zero"] = vector_to_json(center_map(ch, VectorXd::Zero(ch.dim())));
    say("center_rank=" + std::to_string(r.rank) + "/" + std::to_string(r.expected));
    assertion("centers.rank_matches_nondegeneracy", r.full == nondeg_.fully,
              std::to_string(r.rank) + " of " + std::to_string(r.expected));
    if (auto w = csv("center_singular_values.csv", {"index", "value"})) {
      for (int i = 0; i < r.singular_values.size(); ++i) w->row({double(i), r.singular_values(i)});
    }
    return j;
  }

  ojson jets() {
    const FamilyChart& ch = chart();
    if (ch.is_synthetic()) throw Unsatisfiable("jet analysis needs a solver-backed chart");
    const RankReport r = jet_jacobian(ch);
    ojson j = to_json(r);
    say("jet_rank=" + std::to_string(r.rank) + "/" + std::to_string(r.expected));
    assertion("jets.injective", r.full, std::to_string(r.rank));
    std::mt19937_64 rng(s_.seed);
    std::normal_distribution<double> normal;
    RecoveryOptions opt;
    opt.restarts = s_.recovery_restarts;
    opt.seed = s_.seed;
    ojson trips = ojson::array();
    double worst = 0.0;
    auto w = csv("jet_recovery.csv", {"sample", "error", "jet_residual", "iterations", "restart_spread"});
    for (int k = 0; k < s_.jet_samples; ++k) {
      VectorXd s(ch.dim());
      for (int i = 0; i < s.size(); ++i) s(i) = normal(rng);
      s *= 0.5 * ch.radius() / s.norm();
      const RecoveryResult rr = recover_from_jet(ch, jet_map(ch, s), VectorXd::Zero(ch.dim()), opt);
      const double err = (rr.s - s).norm();
      worst = std::max(worst, err);
      trips.push_back({{"s", vector_to_json(s)},
                       {"error", err},
                       {"jet_residual", rr.jet_residual},
                       {"iterations", rr.iterations},
                       {"restart_spread", rr.restart_spread}});
      if (w) w->row({double(k), err, rr.jet_residual, double(rr.iterations), rr.restart_spread});
    }
    j["round_trips"] = trips;
    j["max_recovery_error"] = worst;
    if (s_.jet_samples > 0) {
      say("max_recovery_error=" + fmt(worst));
      assertion("jets.round_trip", worst < 1e-8, fmt(worst));
    }
    return j;
  }

  ojson determine() {
    need_c();
    if (s_.d() > s_.n()) throw Unsatisfiable("the solver requires d <= n");
    if (!gram_D(s_.pencil, V_).positive_definite) {
      throw Unsatisfiable("Gram matrix of the witness is not positive definite");
    }
    SolverConfig cfg = s_.solver;
    cfg.nf = s_.experiment_nf;
    cfg.grid = 4 * cfg.nf;
    const FamilyChart ch = FamilyChart::build(dilate(def_, s_.t_dil), V_, *c_, std::nullopt, cfg);
    ExperimentConfig ec;
    ec.t_dil = s_.t_dil;
    ec.grid_points = s_.experiment_grid;
    ec.recovery.restarts = s_.experiment_restarts;
    ec.recovery.seed = s_.seed;
    ojson runs = ojson::array();
    for (const auto& F : automorphism_corpus(s_.n(), s_.d())) {
      if (!s_.automorphisms.empty() &&
          std::find(s_.automorphisms.begin(), s_.automorphisms.end(), F.name()) == s_.automorphisms.end()) {
        continue;
      }
      const ExperimentReport r = jet_determination_experiment(def_, F, ch, ec);
      runs.push_back(to_json(r));
      const bool all_ok = std::all_of(r.records.begin(), r.records.end(),
                                      [](const ExperimentRecord& x) { return x.status == "ok"; });
      say(F.name() + "=" + (r.accepted ? "accepted max_fixed_point_defect=" + fmt(r.max_fixed_point_defect)
                                       : "rejected (" + r.rejection + ")"));
      if (r.accepted) {
        const double bound = F.name() == "identity" ? 1e-12 : 1e-8;
        assertion("determine." + F.name(), all_ok && r.max_fixed_point_defect < bound,
                  fmt(r.max_fixed_point_defect));
      } else if (F.name() == "identity") {
        assertion("determine.identity", false, r.rejection);
      }
      if (auto w = csv("experiment_" + F.name() + ".csv",
                       {"s0", "s1", "jet_defect", "fixed_point_defect", "recovery_distance", "ok"})) {
        for (const auto& x : r.records) {
          w->row({x.s(0), x.s(1), x.jet_defect, x.fixed_point_defect, x.recovery_distance,
                  x.status == "ok" ? 1.0 : 0.0});
        }
      }
    }
    return {{"t_dil", s_.t_dil}, {"chart_radius", ch.radius()}, {"experiments", runs}};
  }
};

}  // namespace

FamilyChart make_analysis_chart(const DefiningFunction& def, const VectorXcd& V, const VectorXd& c,
                                const SolverConfig& config, int synthetic_nf) {
  const GramD gram = gram_D(def.pencil(), V);
  if (gram.positive_definite && def.d() <= def.n()) {
    return FamilyChart::build(def, V, c, std::nullopt, config);
  }
  if (!def.is_quadric()) {
    throw Error(ErrorCode::invalid_input, "linear charts are only available on quadrics");
  }
  ConstrainedLift f0 = build_initial_lift(def.pencil(), V, c);
  f0 = ConstrainedLift(f0.n(), f0.d(), f0.cofactor().resized(synthetic_nf), f0.c());
  const BoundaryMatrix G = assemble_G(def, f0.realized(), 4 * (synthetic_nf + 2));
  const KernelBasis kc = numeric_kernel(G, true, synthetic_nf);
  return FamilyChart::synthetic(def, f0, kc, 0.1 * lift_l2_norm(f0.realized()));
}

RunResult run_scenario(const Scenario& scenario, const std::optional<std::filesystem::path>& out_dir) {
  return Pipeline(scenario, out_dir).run();
}

}  // namespace statdisc
