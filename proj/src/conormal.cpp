#include "statdisc/conormal.hpp"

#include <algorithm>
#include <cmath>

namespace statdisc {
namespace {

MatrixXcd sum_combination(const HermitianPencil& pencil, const VectorXd& c) {
  if (c.size() != pencil.d()) throw Error(ErrorCode::invalid_input, "c must have length d");
  const MatrixXcd a = pencil.combination(c);
  if (numeric_rank(a) < pencil.n()) {
    throw Error(ErrorCode::invalid_input, "sum c_j A_j is not invertible");
  }
  return a;
}

}  // namespace

std::vector<int> block_order(int n, int d) {
  std::vector<int> perm;
  perm.reserve(static_cast<std::size_t>(2 * n + 2 * d));
  for (int l = 0; l < d; ++l) perm.push_back(n + l);
  for (int k = 0; k < n; ++k) perm.push_back(k);
  for (int k = 0; k < n; ++k) perm.push_back(n + d + k);
  for (int l = 0; l < d; ++l) perm.push_back(2 * n + d + l);
  return perm;
}

VectorXd ConormalSystem::rows_at(const VectorXcd& point, cplx zeta, MatrixXcd* G) const {
  const int n = def_.n();
  const int d = def_.d();
  const int nz = n + d;
  const int N = 2 * nz;
  const VectorXcd z = point.head(n);
  const VectorXcd w = point.segment(n, d);
  const VectorXcd zt = point.segment(nz, n);
  const VectorXcd wt = point.tail(d);

  const auto jet = def_.local_jet(z, w, G != nullptr);
  const MatrixXcd mt = jet.dz.rightCols(d).transpose();  // (M_w)^T
  Eigen::PartialPivLU<MatrixXcd> lu(mt);
  if (!(lu.rcond() > 1e-12)) {
    throw Error(ErrorCode::degenerate_elimination, "conormal elimination degenerate");
  }
  const MatrixXcd mt_inv = lu.inverse();
  const VectorXcd e = mt_inv * wt;
  const MatrixXcd R = jet.dz.leftCols(n);  // d x n
  const VectorXcd q = zt - R.transpose() * e;

  VectorXd rows(N);
  rows.head(d) = jet.r;
  rows.segment(d, n) = 2.0 * q.real();
  rows.segment(d + n, n) = -2.0 * q.imag();
  rows.tail(d) = -(std::conj(zeta) * e).imag();

  if (G) {
    // Holomorphic (De) and antiholomorphic (Dbe) derivatives over the N lift variables.
    MatrixXcd De = MatrixXcd::Zero(d, N), Dbe = MatrixXcd::Zero(d, N);
    for (int a = 0; a < nz; ++a) {
      VectorXcd v = VectorXcd::Zero(d), vb = VectorXcd::Zero(d);
      for (int l = 0; l < d; ++l) {
        for (int j = 0; j < d; ++j) {
          v(l) += jet.d2[static_cast<std::size_t>(j)](n + l, a) * e(j);
          vb(l) += jet.d2m[static_cast<std::size_t>(j)](n + l, a) * e(j);
        }
      }
      De.col(a) = -mt_inv * v;
      Dbe.col(a) = -mt_inv * vb;
    }
    De.rightCols(d) = mt_inv;

    MatrixXcd Dq = MatrixXcd::Zero(n, N), Dbq = MatrixXcd::Zero(n, N);
    for (int k = 0; k < n; ++k) {
      for (int a = 0; a < nz; ++a) {
        cplx s(0.0), sb(0.0);
        for (int j = 0; j < d; ++j) {
          const auto& d2 = jet.d2[static_cast<std::size_t>(j)];
          const auto& d2m = jet.d2m[static_cast<std::size_t>(j)];
          s += De(j, a) * R(j, k) + e(j) * d2(k, a);
          sb += Dbe(j, a) * R(j, k) + e(j) * d2m(k, a);
        }
        Dq(k, a) = -s;
        Dbq(k, a) = -sb;
      }
      Dq(k, nz + k) = 1.0;
    }
    Dq.rightCols(d) = -R.transpose() * mt_inv;

    G->setZero(N, N);
    G->block(0, 0, d, nz) = jet.dzbar;
    G->middleRows(d, n) = Dbq + Dq.conjugate();
    G->middleRows(d + n, n) = kI * (Dbq - Dq.conjugate());
    G->bottomRows(d) = (0.5 * kI) * (std::conj(zeta) * Dbe - zeta * De.conjugate());
  }
  return rows;
}

MatrixXd ConormalSystem::eval_samples(const MatrixXcd& samples) const {
  if (samples.rows() != size()) throw Error(ErrorCode::invalid_input, "lift size mismatch");
  const int M = static_cast<int>(samples.cols());
  const VectorXcd grid = unit_grid(M);
  MatrixXd out(size(), M);
  for (int k = 0; k < M; ++k) out.col(k) = rows_at(samples.col(k), grid(k));
  return out;
}

MatrixXd ConormalSystem::eval(const LiftedDisc& lift, int M) const {
  if (lift.n() != def_.n() || lift.d() != def_.d()) {
    throw Error(ErrorCode::invalid_input, "lift dimensions do not match the defining function");
  }
  return eval_samples(lift.all().boundary(M));
}

MatrixXd eval_conormal(const ConormalSystem& system, const LiftedDisc& lift, int M) {
  return system.eval(lift, M);
}

LiftedDisc build_quadric_lift(const HermitianPencil& pencil, const VectorXcd& V,
                              const VectorXcd& W, const VectorXd& c, const VectorXd& y) {
  const int n = pencil.n();
  const int d = pencil.d();
  if (V.size() != n || W.size() != n || y.size() != d) {
    throw Error(ErrorCode::invalid_input, "V, W must have length n and y length d");
  }
  if (W.norm() == 0.0) throw Error(ErrorCode::invalid_input, "W = 0 gives a constant disc");
  const MatrixXcd A = sum_combination(pencil, c);

  AnalyticDisc h(n, 1), g(d, 1), ht(n, 1), gt(d, 1);
  h.coefficients().col(0) = V;
  h.coefficients().col(1) = W;
  for (int j = 0; j < d; ++j) {
    const MatrixXcd& Aj = pencil[j];
    g.coefficients()(j, 0) = V.dot(Aj * V) + W.dot(Aj * W) + cplx(0.0, y(j));
    g.coefficients()(j, 1) = 2.0 * V.dot(Aj * W);
  }
  ht.coefficients().col(0) = -(A.transpose() * W.conjugate());
  ht.coefficients().col(1) = -(A.transpose() * V.conjugate());
  gt.coefficients().col(1) = 0.5 * c.cast<cplx>();
  return LiftedDisc(h, g, ht, gt);
}

ConstrainedLift build_initial_lift(const HermitianPencil& pencil, const VectorXcd& V,
                                   const VectorXd& c) {
  const int n = pencil.n();
  const int d = pencil.d();
  if (V.size() != n) throw Error(ErrorCode::invalid_input, "V must have length n");
  if (V.norm() == 0.0) throw Error(ErrorCode::invalid_input, "V = 0 gives a constant disc");
  const MatrixXcd A = sum_combination(pencil, c);
  AnalyticDisc u(2 * n + 2 * d, 0);
  auto& col = u.coefficients();
  col.block(0, 0, n, 1) = V;
  for (int j = 0; j < d; ++j) col(n + j, 0) = 2.0 * V.dot(pencil[j] * V);
  col.block(n + d, 0, n, 1) = A.transpose() * V.conjugate();
  return ConstrainedLift(n, d, std::move(u), c);
}

StationaryReport verify_stationary_samples(const DefiningFunction& def, const MatrixXcd& samples,
                                           double tol) {
  const int n = def.n();
  const int d = def.d();
  const int nz = n + d;
  if (samples.rows() != 2 * nz) throw Error(ErrorCode::invalid_input, "lift size mismatch");
  const int M = static_cast<int>(samples.cols());
  const VectorXcd grid = unit_grid(M);

  StationaryReport rep;
  rep.c_of_zeta.resize(d, M);
  rep.min_abs_c = std::numeric_limits<double>::infinity();
  double equation = 0.0;
  MatrixXcd implied(nz, M);
  for (int k = 0; k < M; ++k) {
    const VectorXcd p = samples.col(k);
    const auto jet = def.local_jet(p.head(n), p.segment(n, d), false);
    rep.attachment_sup = std::max(rep.attachment_sup, jet.r.cwiseAbs().maxCoeff());
    Eigen::PartialPivLU<MatrixXcd> lu(jet.dz.rightCols(d).transpose());
    if (!(lu.rcond() > 1e-12)) {
      throw Error(ErrorCode::degenerate_elimination, "conormal elimination degenerate");
    }
    const VectorXcd c = std::conj(grid(k)) * lu.solve(VectorXcd(p.tail(d)));
    rep.c_of_zeta.col(k) = c.real();
    rep.realness_defect = std::max(rep.realness_defect, c.imag().cwiseAbs().maxCoeff());
    rep.min_abs_c = std::min(rep.min_abs_c, c.norm());
    implied.col(k) = grid(k) * (jet.dz.transpose() * c.real().cast<cplx>());
    equation = std::max(equation, (p.tail(nz) - implied.col(k)).cwiseAbs().maxCoeff());
  }
  rep.lift_defect = std::max({equation, negative_mode_defect(samples), negative_mode_defect(implied)});
  rep.nonvanishing = rep.min_abs_c > kNonvanishingThreshold;
  rep.stationary = rep.attachment_sup < tol && rep.lift_defect < tol &&
                   rep.realness_defect < tol && rep.nonvanishing;
  return rep;
}

StationaryReport verify_stationary(const DefiningFunction& def, const LiftedDisc& lift, double tol,
                                   int M) {
  if (lift.n() != def.n() || lift.d() != def.d()) {
    throw Error(ErrorCode::invalid_input, "lift dimensions do not match the defining function");
  }
  return verify_stationary_samples(def, lift.all().boundary(M), tol);
}

}  // namespace statdisc
