#pragma once

// Gauss-Newton solver for the constrained nonlinear Riemann-Hilbert problem
// r~((1-zeta) u + (0, 0, 0, zeta c / 2)) = 0 on the circle, with chart
// coordinates fixing the component along the quadric kernel.

#include <optional>
#include <vector>

#include "statdisc/conormal.hpp"
#include "statdisc/discs.hpp"
#include "statdisc/geometry.hpp"
#include "statdisc/rh_linear.hpp"

namespace statdisc {

struct SolverConfig {
  int nf = kDefaultTruncation;
  int grid = kDefaultGrid;
  double newton_tol = 1e-12;
  int max_iter = 50;
  double backtrack = 0.5;
  int max_halvings = 30;
  int continuation_steps = 8;
  double max_condition = 1e12;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double residual = 0.0;             // sup of the collocated rows
  double constraint_residual = 0.0;  // sup of the chart constraints
  double step = 0.0;                 // accepted step length factor
  double t = 0.0;
};

struct SolveResult {
  ConstrainedLift lift;
  int iterations = 0;
  double residual = 0.0;
  double constraint_residual = 0.0;
  std::vector<TraceEntry> trace;
  // d(cofactor)/ds in real coordinates (one column per chart direction), when requested.
  std::optional<MatrixXd> tangent;
};

// Linear chart constraints <realized(u) - realized(u0), E_i> = s_i where E_i
// are orthonormal realified coefficient vectors and the pairing is the real
// coefficient dot product (the discrete L2 pairing on the circle).
class ChartConstraints {
 public:
  ChartConstraints() = default;
  // anchor: the lift at s = 0 of the quadric; basis: realized kernel elements.
  ChartConstraints(const ConstrainedLift& anchor, const std::vector<LiftedDisc>& basis, int nf);

  int dim() const { return static_cast<int>(rows_.rows()); }
  int nf() const { return nf_; }
  const MatrixXd& rows() const { return rows_; }  // acts on cofactor coordinates
  const std::vector<LiftedDisc>& directions() const { return directions_; }
  const ConstrainedLift& anchor() const { return anchor_; }

  VectorXd residual(const VectorXd& u, const VectorXd& s) const;

 private:
  int nf_ = 0;
  ConstrainedLift anchor_;
  VectorXd anchor_coords_;
  MatrixXd rows_;
  std::vector<LiftedDisc> directions_;  // orthonormalized realized basis
};

// Realified cofactor coordinates padded to degree nf.
VectorXd cofactor_coords(const ConstrainedLift& lift, int nf);
ConstrainedLift from_cofactor_coords(int n, int d, const VectorXd& x, int nf, const VectorXd& c);

SolveResult solve_constrained(const DefiningFunction& def, const ConstrainedLift& start,
                              const ChartConstraints& chart, const VectorXd& s,
                              const SolverConfig& config, bool want_tangent = false);

// Solves at t_k = k t / steps for k = 1..steps, warm starting each step.
SolveResult continuation(const DefiningFunction& def, const ConstrainedLift& start,
                         const ChartConstraints& chart, const VectorXd& s,
                         const SolverConfig& config);

inline constexpr double kResidualFloor = 64 * 2.220446049250313e-16;

// Smallest log r_{k+1} / log r_k over steps with r_k < onset (the log-log
// slope through the origin; 2 for r_{k+1} = r_k^2). Steps landing at or below
// the rounding floor carry no rate information and are skipped. nullopt when
// no step qualifies.
std::optional<double> convergence_order(const std::vector<TraceEntry>& trace, double onset = 1e-4,
                                        double floor = kResidualFloor);

// Local parameterization s -> lifted stationary disc near the initial lift.
class FamilyChart {
 public:
  // Solver-backed chart: anchor = initial quadric lift, basis = explicit kernel.
  static FamilyChart build(const DefiningFunction& def, const VectorXcd& V, const VectorXd& c,
                           std::optional<double> radius, const SolverConfig& config);
  // Linear chart base + sum s_i e_i over a given (numeric) constrained kernel.
  static FamilyChart synthetic(const DefiningFunction& def, const ConstrainedLift& base,
                               const KernelBasis& basis, double radius);

  const DefiningFunction& def() const { return def_; }
  const ConstrainedLift& base() const { return base_; }
  const ChartConstraints& constraints() const { return constraints_; }
  const SolverConfig& config() const { return config_; }
  double radius() const { return radius_; }
  bool is_synthetic() const { return synthetic_; }
  int dim() const { return dim_; }
  // Continuation run that produced the base (empty trace for quadrics and synthetic charts).
  const SolveResult& base_solve() const { return base_solve_; }

  // Stationary lift at s; warm start optional. Throws invalid_input if |s| >= radius.
  SolveResult solve(const VectorXd& s, const ConstrainedLift* warm = nullptr,
                    bool want_tangent = false) const;
  ConstrainedLift operator()(const VectorXd& s) const { return solve(s).lift; }

 private:
  DefiningFunction def_{HermitianPencil({MatrixXcd::Identity(1, 1)})};
  ConstrainedLift base_;
  ChartConstraints constraints_;
  SolverConfig config_;
  double radius_ = 0.0;
  bool synthetic_ = false;
  int dim_ = 0;
  SolveResult base_solve_;
  std::vector<AnalyticDisc> synthetic_cofactors_;
};

// Coefficient l2 norm of the realized lift (the L2 norm on the circle).
double lift_l2_norm(const LiftedDisc& lift);

}  // namespace statdisc
