#pragma once

// Linearized Riemann-Hilbert problem f -> 2 Re[conj(G) f] on the unit circle:
// the boundary matrix, its indices and kernel bases.

#include <functional>
#include <optional>
#include <vector>

#include "statdisc/conormal.hpp"
#include "statdisc/discs.hpp"
#include "statdisc/geometry.hpp"

namespace statdisc {

inline constexpr double kKernelGapRatio = 1e3;
inline constexpr int kMaxWindingGrid = 1 << 14;

// Block form of G for a quadric base lift whose g~ equals zeta c / 2:
//
//   [ 1/2 I_d   B(zeta)   0       ]
//   [ 0         G2(zeta)  C(zeta) ]
//   [ 0         0         -i zeta I_d ]
//
// each block stored as a matrix polynomial (coefficient k multiplies zeta^k).
struct StructuredG {
  int n = 0;
  int d = 0;
  std::vector<MatrixXcd> g1, b, g2, c, g3;
  MatrixXcd A;  // sum c_j A_j

  MatrixXcd at(cplx zeta) const;
};

class BoundaryMatrix {
 public:
  BoundaryMatrix(int n, int d, std::function<MatrixXcd(cplx)> evaluator, int M,
                 std::optional<StructuredG> structured = std::nullopt);

  int n() const { return n_; }
  int d() const { return d_; }
  int size() const { return 2 * n_ + 2 * d_; }
  int grid() const { return static_cast<int>(samples_.size()); }
  const std::vector<MatrixXcd>& samples() const { return samples_; }
  const std::optional<StructuredG>& structured() const { return structured_; }
  double min_abs_det() const { return min_abs_det_; }

  // G at an arbitrary boundary point (columns and rows in block order).
  MatrixXcd at(cplx zeta) const { return eval_(zeta); }

  // Same operator with samples taken on a different grid.
  BoundaryMatrix resampled(int M) const;

 private:
  int n_, d_;
  std::function<MatrixXcd(cplx)> eval_;
  std::vector<MatrixXcd> samples_;
  std::optional<StructuredG> structured_;
  double min_abs_det_ = 0.0;
};

// Rows in conormal order, columns reordered to (w, z, z~, w~). The block form is
// attached when def is a quadric and the base g~ is zeta c / 2.
BoundaryMatrix assemble_G(const DefiningFunction& def, const LiftedDisc& base, int M = kDefaultGrid);

// Winding number of det(-conj(G)^{-1} G) with grid doubling up to 2^14 points.
int maslov_index(const std::function<MatrixXcd(cplx)>& G, int M0 = kDefaultGrid);
int maslov_index(const BoundaryMatrix& G);

struct IndexData {
  std::vector<int> partial_indices;
  int maslov = 0;
};

// Indices from the block reduction; throws ErrorCode::unstructured otherwise.
IndexData partial_indices_structured(const BoundaryMatrix& G);

// Birkhoff factorization of a 2 x 2 symbol that is an antidiagonal or diagonal
// matrix of monomials a zeta^k. The block is given as polynomial coefficients.
struct Birkhoff2x2 {
  Eigen::Matrix2cd b_plus;
  int kappa1 = 0;
  int kappa2 = 0;
  Eigen::Matrix2cd b_minus;
  double residual = 0.0;  // sup over test points of |B+ diag B- - P|
};
Birkhoff2x2 birkhoff_factor_2x2(const std::vector<Eigen::Matrix2cd>& block);

// -conj(R)^{-1} R for R(zeta) = [[zeta, 1], [i zeta, -i]], as a polynomial.
std::vector<Eigen::Matrix2cd> r_block_symbol();

// 2 Re[conj(G) f] on the grid of G (f in lift order, permuted internally).
MatrixXd linear_operator(const BoundaryMatrix& G, const LiftedDisc& f);

struct KernelBasis {
  bool constrained = false;
  int dim = 0;
  int nf = 0;
  std::vector<LiftedDisc> elements;  // realized discs
  std::vector<AnalyticDisc> cofactors;  // u with element = (1 - zeta) u (constrained only)
  MatrixXd coords;  // realified coefficient vectors of the realized discs, one per column
  VectorXd singular_values;
  double gap_ratio = 0.0;
};

// Real coefficient vector (Re, Im interleaved per coefficient, component-major)
// of a lift padded to degree nf.
VectorXd realify(const LiftedDisc& lift, int nf);
LiftedDisc unrealify(int n, int d, const VectorXd& x, int nf);

// Real matrix of f -> 2 Re[conj(G) f] on discs of degree <= nf (constrained:
// (1 - zeta) u, deg u <= nf), G sampled on the uniform grid with columns in
// lift order. Rows (k N + r) are scaled by `scale`.
MatrixXd realified_operator(const std::vector<MatrixXcd>& g_lift, bool constrained, int nf,
                            double scale);

// Null space of the real-ified operator on discs of degree <= nf (constrained:
// discs (1 - zeta) u with deg u <= nf).
KernelBasis numeric_kernel(const BoundaryMatrix& G, bool constrained, int nf = kDefaultTruncation);

// Closed-form kernel of the constrained problem at the quadric initial lift,
// parameterized by (Re a_j, Im a_j) for j < d then (y_k, y~_k) for k < n.
KernelBasis explicit_kernel_basis(const HermitianPencil& pencil, const VectorXcd& V,
                                  const VectorXd& c);

// Largest principal angle between the spans of the columns of X and Y.
double max_principal_angle(const MatrixXd& X, const MatrixXd& Y);

struct GramD {
  MatrixXcd D1;  // d x n, conjugate transpose of D2
  MatrixXcd D2;  // n x d, column j = A_j V
  MatrixXcd gram;
  double min_eigenvalue = 0.0;
  bool positive_definite = false;
};
GramD gram_D(const HermitianPencil& pencil, const VectorXcd& V);

// Invertibility of G(1) at the point (0, 0, 0, c/2).
bool check_totally_real_conormal(const HermitianPencil& pencil, const VectorXd& c);

}  // namespace statdisc
