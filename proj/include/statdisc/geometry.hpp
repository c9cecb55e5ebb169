#pragma once

// Generic real submanifolds of C^{n+d} in normalized coordinates
//
//   r_j(z, w) = Re w_j - conj(z)^T A_j z + t * p_j(Re z, Im z, Im w),   j = 1..d,
//
// with A_j Hermitian and p_j a real polynomial of weighted degree >= 3
// (z of weight one, Im w of weight two), plus the four non-degeneracy tests
// on the pencil (A_1, ..., A_d).

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "statdisc/types.hpp"

namespace statdisc {

inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr int kDefaultWitnessTrials = 64;
inline constexpr double kRankTolerance = 1e-8;

class HermitianPencil {
 public:
  explicit HermitianPencil(std::vector<MatrixXcd> matrices, double hermitian_tol = 1e-12);

  int n() const { return n_; }
  int d() const { return static_cast<int>(matrices_.size()); }
  const MatrixXcd& operator[](int j) const { return matrices_[static_cast<std::size_t>(j)]; }
  const std::vector<MatrixXcd>& matrices() const { return matrices_; }

  // sum_j c_j A_j
  MatrixXcd combination(const VectorXd& c) const;

  // The C^8 quadric (n = d = 4) that is Levi non-degenerate but fails (f).
  static HermitianPencil c8_example();

 private:
  int n_ = 0;
  std::vector<MatrixXcd> matrices_;
};

struct Monomial {
  int component = 0;  // 0-based index j of r_j
  double coefficient = 0.0;
  std::vector<int> re_z;  // exponents of Re z_k, length n
  std::vector<int> im_z;  // exponents of Im z_k, length n
  std::vector<int> im_w;  // exponents of Im w_l, length d

  int weighted_degree() const;
};

// Real polynomial remainder. Local variable layout is
// (Re z_1..Re z_n, Im z_1..Im z_n, Im w_1..Im w_d).
class PerturbationPolynomial {
 public:
  PerturbationPolynomial() = default;
  PerturbationPolynomial(int n, int d, std::vector<Monomial> terms = {}, int max_degree = 6);

  int n() const { return n_; }
  int d() const { return d_; }
  int max_degree() const { return max_degree_; }
  int variable_count() const { return 2 * n_ + d_; }
  bool empty() const { return terms_.empty(); }
  const std::vector<Monomial>& terms() const { return terms_; }

  // value: d entries. grad: d x nv. hess (optional): d matrices nv x nv.
  void evaluate(const VectorXd& vars, VectorXd& value, MatrixXd& grad,
                std::vector<MatrixXd>* hess) const;

  // Coefficient of a term of weighted degree m multiplied by lambda^(m-2).
  PerturbationPolynomial rescaled_by_weight(double lambda) const;

 private:
  int n_ = 0;
  int d_ = 0;
  int max_degree_ = 6;
  std::vector<Monomial> terms_;
};

class DefiningFunction {
 public:
  explicit DefiningFunction(HermitianPencil pencil, PerturbationPolynomial perturbation = {},
                            double scale = 0.0);

  int n() const { return pencil_.n(); }
  int d() const { return pencil_.d(); }
  const HermitianPencil& pencil() const { return pencil_; }
  const PerturbationPolynomial& perturbation() const { return perturbation_; }
  double scale() const { return scale_; }
  bool is_quadric() const { return scale_ == 0.0 || perturbation_.empty(); }

  DefiningFunction with_scale(double t) const;

  // Derivatives with respect to Z = (z, w) in Wirtinger form.
  struct LocalJet {
    VectorXd r;                   // d
    MatrixXcd dz;                 // d x (n+d): dr_j / dZ_a
    MatrixXcd dzbar;              // d x (n+d): dr_j / dconj(Z_a)
    std::vector<MatrixXcd> d2;    // per j: d^2 r_j / dZ_a dZ_b
    std::vector<MatrixXcd> d2m;   // per j: d^2 r_j / dZ_a dconj(Z_b)
  };

  LocalJet local_jet(const VectorXcd& z, const VectorXcd& w, bool second_order) const;

  VectorXd eval_r(const VectorXcd& z, const VectorXcd& w) const;
  // d x (n+d) matrix whose row j is the (1,0)-form dr_j = (d_z r_j, d_w r_j).
  MatrixXcd eval_grad_r(const VectorXcd& z, const VectorXcd& w) const;

 private:
  HermitianPencil pencil_;
  PerturbationPolynomial perturbation_;
  double scale_ = 0.0;
};

struct NonDegeneracyReport {
  bool cond_a = false;
  int pencil_rank = 0;
  bool cond_b = false;
  int common_kernel_dim = 0;
  bool cond_f = false;
  std::optional<VectorXcd> full_witness;
  bool cond_t = false;
  std::optional<VectorXd> invertible_combination;
  // Deterministic decision of (t) when n, d <= 2.
  std::optional<bool> cond_t_exact;
  bool beloshapka = false;
  bool fully = false;
  int trials = kDefaultWitnessTrials;
  std::uint64_t seed = kDefaultSeed;
};

// Rank from singular values with relative tolerance rel_tol * sigma_max.
int numeric_rank(const MatrixXcd& m, double rel_tol = kRankTolerance);

std::pair<bool, int> check_linear_independence(const HermitianPencil& pencil);
int common_kernel_dimension(const HermitianPencil& pencil);

// [A_1 V | ... | A_d V]
MatrixXcd witness_matrix(const HermitianPencil& pencil, const VectorXcd& v);

std::optional<VectorXcd> find_full_witness(const HermitianPencil& pencil,
                                           int trials = kDefaultWitnessTrials,
                                           std::uint64_t seed = kDefaultSeed);

std::optional<VectorXd> find_invertible_combination(const HermitianPencil& pencil,
                                                    int trials = kDefaultWitnessTrials,
                                                    std::uint64_t seed = kDefaultSeed);

// det(sum c_j A_j) is a homogeneous real polynomial of degree n in c; for
// n, d <= 2 its coefficients are recovered by interpolation and (t) holds iff
// it is not identically zero. nullopt outside that range.
std::optional<bool> decide_invertible_combination_exact(const HermitianPencil& pencil);

NonDegeneracyReport analyze_nondegeneracy(const HermitianPencil& pencil,
                                          int trials = kDefaultWitnessTrials,
                                          std::uint64_t seed = kDefaultSeed);

}  // namespace statdisc
