#pragma once

// Center and 1-jet maps of a disc family, anisotropic dilations, push-forward
// by polynomial automorphisms and the jet determination experiment.

#include <optional>
#include <string>
#include <vector>

#include "statdisc/solver.hpp"

namespace statdisc {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kAnalysisRankTolerance = 1e-6;

struct RankReport {
  MatrixXd jacobian;
  VectorXd singular_values;
  int rank = 0;
  double tolerance = kAnalysisRankTolerance;
  int expected = 0;
  bool full = false;  // rank == expected
};

RankReport rank_report(const MatrixXd& jacobian, int expected, double rel_tol = kAnalysisRankTolerance);

// (h(0), g(0)) of the chart disc at s.
VectorXcd center_map(const FamilyChart& chart, const VectorXd& s);
// Central differences in every chart direction; real 2(n+d) x (2n+2d).
RankReport center_jacobian(const FamilyChart& chart, double step = kFdStep);

// 1-jet at zeta = 1 of the chart disc at s.
VectorXcd jet_map(const FamilyChart& chart, const VectorXd& s);
// Real 4(2n+2d) x (2n+2d).
RankReport jet_jacobian(const FamilyChart& chart, double step = kFdStep);

// Complex vector -> (Re, Im) interleaved.
VectorXd realify_vector(const VectorXcd& v);

struct RecoveryOptions {
  double tol = 1e-9;        // jet residual (sup norm)
  int max_iter = 30;
  int restarts = 8;         // perturbed initializations for the uniqueness check
  double restart_scale = 0.05;  // as a fraction of the chart radius
  double agreement = 1e-6;
  std::uint64_t seed = kDefaultSeed;
};

struct RecoveryResult {
  VectorXd s;
  double jet_residual = 0.0;
  int iterations = 0;
  double restart_spread = 0.0;  // max distance between restart solutions and s
};

// Gauss-Newton on s -> jet_map(chart, s) - target.
RecoveryResult recover_from_jet(const FamilyChart& chart, const VectorXcd& target,
                                const VectorXd& s_init, const RecoveryOptions& options = {});

// r_t = t^{-2} r(t z, t^2 w).
DefiningFunction dilate(const DefiningFunction& def, double t_dil);

struct AutTerm {
  int component = 0;  // 0..n+d-1, ordered (z, w)
  cplx coefficient;
  std::vector<int> exponents;  // length n + d
};

// Holomorphic polynomial map of C^{n+d} with F(0) = 0.
class PolynomialAutomorphism {
 public:
  PolynomialAutomorphism(int n, int d, std::vector<AutTerm> terms, std::string name = "custom");

  static PolynomialAutomorphism identity(int n, int d);
  // (e^{i theta} z, w)
  static PolynomialAutomorphism rotation(int n, int d, double theta);
  // (lambda z, lambda^2 w)
  static PolynomialAutomorphism dilation(int n, int d, double lambda);
  // identity plus coefficient * (monomial) in one component
  static PolynomialAutomorphism identity_plus(int n, int d, AutTerm extra, std::string name);

  int n() const { return n_; }
  int d() const { return d_; }
  const std::string& name() const { return name_; }
  const std::vector<AutTerm>& terms() const { return terms_; }

  VectorXcd eval(const VectorXcd& Z) const;
  MatrixXcd jacobian(const VectorXcd& Z) const;

  // Lambda_t^{-1} o F o Lambda_t.
  PolynomialAutomorphism conjugated_by_dilation(double t) const;
  // F(Z) = Z + O(|Z|^3).
  bool has_trivial_2jet() const;

 private:
  int n_, d_;
  std::vector<AutTerm> terms_;
  std::string name_;
};

// Rotation, dilation, identity and two identity-plus-cubic candidates.
std::vector<PolynomialAutomorphism> automorphism_corpus(int n, int d);

// sup |r(F(P))| over points P of M = {r = 0} sampled with |z| <= radius.
double preservation_residual(const DefiningFunction& def, const PolynomialAutomorphism& F,
                             int samples = 64, double radius = 0.3,
                             std::uint64_t seed = kDefaultSeed);

struct Pushforward {
  LiftedDisc lift;
  double negative_mode_defect = 0.0;
};

// (F o f, f~ (dF)^{-1}) on the boundary grid, projected to degree nf.
Pushforward pushforward(const PolynomialAutomorphism& F, const LiftedDisc& lift, int M = kDefaultGrid,
                        std::optional<int> nf = std::nullopt);

struct ExperimentRecord {
  VectorXd s;
  VectorXcd center;
  double jet_defect = 0.0;
  double fixed_point_defect = 0.0;
  double recovery_distance = 0.0;
  std::string status;
};

struct ExperimentConfig {
  double t_dil = 0.1;
  int grid_points = 5;  // per axis, over the first two chart coordinates
  double preservation_tol = 1e-10;
  RecoveryOptions recovery;
};

struct ExperimentReport {
  std::string automorphism;
  bool trivial_2jet = false;
  double preservation_residual = 0.0;
  bool accepted = false;
  std::string rejection;
  std::vector<ExperimentRecord> records;
  double max_fixed_point_defect = 0.0;
  double max_jet_defect = 0.0;
  std::string note;
};

// `chart` must be built for dilate(def, config.t_dil).
ExperimentReport jet_determination_experiment(const DefiningFunction& def,
                                              const PolynomialAutomorphism& F,
                                              const FamilyChart& chart,
                                              const ExperimentConfig& config = {});

}  // namespace statdisc
