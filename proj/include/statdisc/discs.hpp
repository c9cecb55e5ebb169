#pragma once

// Vector-valued analytic discs stored as truncated power series in zeta,
// sampled on the uniform grid zeta_k = exp(2 pi i k / M).

#include <vector>

#include "statdisc/types.hpp"

namespace statdisc {

inline constexpr int kDefaultTruncation = 64;
inline constexpr int kDefaultGrid = 256;
inline constexpr double kDefaultAlpha = 0.5;

// zeta_k = exp(2 pi i k / M), k = 0..M-1
VectorXcd unit_grid(int M);

class AnalyticDisc {
 public:
  AnalyticDisc() = default;
  AnalyticDisc(int m, int nf);
  explicit AnalyticDisc(MatrixXcd coefficients);

  // Disc with a single coefficient column (constant).
  static AnalyticDisc constant(const VectorXcd& v, int nf = 0);

  int m() const { return static_cast<int>(coef_.rows()); }
  int nf() const { return static_cast<int>(coef_.cols()) - 1; }
  const MatrixXcd& coefficients() const { return coef_; }
  MatrixXcd& coefficients() { return coef_; }

  VectorXcd eval(cplx zeta) const;
  AnalyticDisc derivative() const;
  // Zero-padded or truncated copy with new degree bound.
  AnalyticDisc resized(int nf) const;
  // Rows [first, first + count).
  AnalyticDisc block(int first, int count) const;

  // m x M boundary samples on the uniform grid.
  MatrixXcd boundary(int M) const;
  // Projection of boundary samples onto modes 0..nf (discrete Fourier transform).
  static AnalyticDisc from_boundary(const MatrixXcd& samples, int nf);

  // Exact coefficient-space product by (1 - zeta); raises the degree by one.
  AnalyticDisc times_one_minus_zeta() const;
  // Exact product by zeta.
  AnalyticDisc times_zeta() const;

  AnalyticDisc operator+(const AnalyticDisc& o) const;
  AnalyticDisc operator-(const AnalyticDisc& o) const;
  AnalyticDisc operator*(cplx a) const;

 private:
  MatrixXcd coef_;
};

// Discrete Fourier coefficients a_0..a_{M-1} of each row: a_j = (1/M) sum_k f_k zeta_k^{-j}.
MatrixXcd dft(const MatrixXcd& samples);

// l2 mass of the Fourier modes with negative index (indices M/2..M-1 of the DFT).
double negative_mode_defect(const MatrixXcd& samples);

// Discrete C^{k,alpha} norm on the boundary grid (k in {0, 1}). The order-one
// part uses the angular derivative d/dtheta = i zeta d/dzeta.
double holder_norm(const AnalyticDisc& disc, int k, double alpha, int M = kDefaultGrid);

// The disc (1 - zeta) u.
struct FactoredDisc {
  AnalyticDisc u;
  AnalyticDisc realized() const { return u.times_one_minus_zeta(); }
};

// Norm of (1 - zeta) u is the C^{1,alpha} norm of u.
double factored_norm(const FactoredDisc& fd, double alpha, int M = kDefaultGrid);

// Lift (h, g, h~, g~) of dimensions (n, d, n, d), stored as one disc with
// 2n + 2d rows in that order.
class LiftedDisc {
 public:
  LiftedDisc() = default;
  LiftedDisc(int n, int d, AnalyticDisc all);
  LiftedDisc(const AnalyticDisc& h, const AnalyticDisc& g, const AnalyticDisc& ht,
             const AnalyticDisc& gt);

  int n() const { return n_; }
  int d() const { return d_; }
  int size() const { return 2 * n_ + 2 * d_; }
  int nf() const { return all_.nf(); }

  const AnalyticDisc& all() const { return all_; }
  AnalyticDisc& all() { return all_; }
  AnalyticDisc h() const { return all_.block(0, n_); }
  AnalyticDisc g() const { return all_.block(n_, d_); }
  AnalyticDisc ht() const { return all_.block(n_ + d_, n_); }
  AnalyticDisc gt() const { return all_.block(2 * n_ + d_, d_); }

  LiftedDisc resized(int nf) const { return LiftedDisc(n_, d_, all_.resized(nf)); }

 private:
  int n_ = 0;
  int d_ = 0;
  AnalyticDisc all_;
};

// Lift ((1-zeta) h', (1-zeta) g', (1-zeta) h~', (1-zeta) g~' + (zeta/2) c).
class ConstrainedLift {
 public:
  ConstrainedLift() = default;
  ConstrainedLift(int n, int d, AnalyticDisc cofactor, VectorXd c);

  int n() const { return n_; }
  int d() const { return d_; }
  int size() const { return 2 * n_ + 2 * d_; }
  int nf() const { return cofactor_.nf(); }
  const AnalyticDisc& cofactor() const { return cofactor_; }
  AnalyticDisc& cofactor() { return cofactor_; }
  const VectorXd& c() const { return c_; }

  // Degree nf + 1 realization.
  LiftedDisc realized() const;

 private:
  int n_ = 0;
  int d_ = 0;
  AnalyticDisc cofactor_;
  VectorXd c_;
};

// (f(1), f'(1)) with components ordered (h, g, h~, g~).
VectorXcd jet1_at_one(const LiftedDisc& lift);

}  // namespace statdisc
