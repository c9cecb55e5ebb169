#pragma once

// Conormal defining system r~ for stationary lifts, explicit quadric lifts and
// the stationarity audit.
//
// A point of T*C^{n+d} is stored in lift order (z, w, z~, w~). With
// M_w = (d r_j / d w_l) and e = M_w^{-T} w~, the 2n + 2d real rows are
//
//   r_j(z, w)                         j < d
//   2 Re q_k,  -2 Im q_k              q = z~ - sum_j e_j d_z r_j
//   -Im(conj(zeta) e_j)               j < d
//
// so that on |zeta| = 1 a zero means (z~, w~) = zeta sum_j c_j dr_j with
// c = conj(zeta) e real.

#include <vector>

#include "statdisc/discs.hpp"
#include "statdisc/geometry.hpp"

namespace statdisc {

inline constexpr double kNonvanishingThreshold = 1e-8;

// perm[p] = lift index of the p-th column in the (w, z, z~, w~) ordering.
std::vector<int> block_order(int n, int d);

class ConormalSystem {
 public:
  explicit ConormalSystem(DefiningFunction def) : def_(std::move(def)) {}

  const DefiningFunction& def() const { return def_; }
  int size() const { return 2 * def_.n() + 2 * def_.d(); }

  // Rows at one boundary point. If G is given it receives the N x N matrix of
  // derivatives with respect to the conjugated variables, columns in lift order.
  VectorXd rows_at(const VectorXcd& point, cplx zeta, MatrixXcd* G = nullptr) const;

  // N x M residual array for boundary samples (N x M, lift order).
  MatrixXd eval_samples(const MatrixXcd& samples) const;
  MatrixXd eval(const LiftedDisc& lift, int M) const;

 private:
  DefiningFunction def_;
};

// Convenience wrapper matching the residual array of a lift.
MatrixXd eval_conormal(const ConormalSystem& system, const LiftedDisc& lift, int M);

// h = V + zeta W, g_j = V*A_jV + W*A_jW + 2 V*A_jW zeta + i y_j,
// h~ = -(A^T conj W) - (A^T conj V) zeta, g~ = zeta c / 2, with A = sum c_j A_j.
LiftedDisc build_quadric_lift(const HermitianPencil& pencil, const VectorXcd& V,
                              const VectorXcd& W, const VectorXd& c, const VectorXd& y);

// ((1-zeta) V, 2 (1-zeta) V*A_jV, (1-zeta) A^T conj V, zeta c / 2).
ConstrainedLift build_initial_lift(const HermitianPencil& pencil, const VectorXcd& V,
                                   const VectorXd& c);

struct StationaryReport {
  double attachment_sup = 0.0;
  double lift_defect = 0.0;
  double realness_defect = 0.0;
  double min_abs_c = 0.0;
  MatrixXd c_of_zeta;  // d x M, real part of the recovered multipliers
  bool nonvanishing = false;
  bool stationary = false;
};

StationaryReport verify_stationary_samples(const DefiningFunction& def, const MatrixXcd& samples,
                                           double tol);
StationaryReport verify_stationary(const DefiningFunction& def, const LiftedDisc& lift,
                                   double tol, int M = kDefaultGrid);

}  // namespace statdisc
