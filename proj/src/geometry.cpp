#include "statdisc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace statdisc {
namespace {

double pow_int(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

std::vector<int> flat_exponents(const Monomial& m) {
  std::vector<int> e;
  e.reserve(m.re_z.size() + m.im_z.size() + m.im_w.size());
  e.insert(e.end(), m.re_z.begin(), m.re_z.end());
  e.insert(e.end(), m.im_z.begin(), m.im_z.end());
  e.insert(e.end(), m.im_w.begin(), m.im_w.end());
  return e;
}

VectorXcd random_complex_normal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

double pencil_scale(const HermitianPencil& pencil) {
  double s = 0.0;
  for (const auto& a : pencil.matrices()) s = std::max(s, a.operatorNorm());
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianPencil

HermitianPencil::HermitianPencil(std::vector<MatrixXcd> matrices, double hermitian_tol)
    : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw Error(ErrorCode::invalid_input, "pencil must contain d >= 1 matrices");
  n_ = static_cast<int>(matrices_.front().rows());
  if (n_ < 1) throw Error(ErrorCode::invalid_input, "pencil matrices must be at least 1x1");
  for (std::size_t j = 0; j < matrices_.size(); ++j) {
    const auto& a = matrices_[j];
    if (a.rows() != n_ || a.cols() != n_) {
      throw Error(ErrorCode::invalid_input, "pencil matrix " + std::to_string(j) + " is not n x n");
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol * scale) {
      throw Error(ErrorCode::invalid_input, "pencil matrix " + std::to_string(j) + " is not Hermitian");
    }
  }
}

MatrixXcd HermitianPencil::combination(const VectorXd& c) const {
  if (c.size() != d()) throw Error(ErrorCode::invalid_input, "combination vector must have length d");
  MatrixXcd out = MatrixXcd::Zero(n_, n_);
  for (int j = 0; j < d(); ++j) out += c(j) * matrices_[static_cast<std::size_t>(j)];
  return out;
}

HermitianPencil HermitianPencil::c8_example() {
  std::vector<MatrixXcd> a(4, MatrixXcd::Zero(4, 4));
  a[0] = MatrixXcd::Identity(4, 4);
  a[1](0, 0) = 1.0;
  a[2](1, 1) = 1.0;
  // |z_1|^2 + Re(conj(z_1) z_2)
  a[3](0, 0) = 1.0;
  a[3](0, 1) = 0.5;
  a[3](1, 0) = 0.5;
  return HermitianPencil(std::move(a));
}

// ---------------------------------------------------------------------------
// PerturbationPolynomial

int Monomial::weighted_degree() const {
  const int z = std::accumulate(re_z.begin(), re_z.end(), 0) +
                std::accumulate(im_z.begin(), im_z.end(), 0);
  return z + 2 * std::accumulate(im_w.begin(), im_w.end(), 0);
}

PerturbationPolynomial::PerturbationPolynomial(int n, int d, std::vector<Monomial> terms,
                                               int max_degree)
    : n_(n), d_(d), max_degree_(max_degree), terms_(std::move(terms)) {
  for (const auto& m : terms_) {
    if (m.component < 0 || m.component >= d_) {
      throw Error(ErrorCode::invalid_input, "perturbation term component out of range");
    }
    if (static_cast<int>(m.re_z.size()) != n_ || static_cast<int>(m.im_z.size()) != n_ ||
        static_cast<int>(m.im_w.size()) != d_) {
      throw Error(ErrorCode::invalid_input, "perturbation exponent vectors must have lengths (n, n, d)");
    }
    for (int e : flat_exponents(m)) {
      if (e < 0) throw Error(ErrorCode::invalid_input, "negative exponent in perturbation term");
    }
    const int wd = m.weighted_degree();
    if (wd < 3) throw Error(ErrorCode::invalid_input, "perturbation term has weighted degree < 3");
    if (wd > max_degree_) {
      throw Error(ErrorCode::invalid_input, "perturbation term exceeds the maximal weighted degree");
    }
  }
}

void PerturbationPolynomial::evaluate(const VectorXd& vars, VectorXd& value, MatrixXd& grad,
                                      std::vector<MatrixXd>* hess) const {
  const int nv = variable_count();
  value = VectorXd::Zero(d_);
  grad = MatrixXd::Zero(d_, nv);
  if (hess) hess->assign(static_cast<std::size_t>(d_), MatrixXd::Zero(nv, nv));

  std::vector<int> active;
  for (const auto& m : terms_) {
    const auto e = flat_exponents(m);
    active.clear();
    for (int i = 0; i < nv; ++i) {
      if (e[static_cast<std::size_t>(i)] > 0) active.push_back(i);
    }
    const int j = m.component;
    // product over active variables, skipping up to two of them
    auto partial = [&](int skip_a, int drop_a, int skip_b, int drop_b) {
      double p = m.coefficient;
      for (int i : active) {
        int ei = e[static_cast<std::size_t>(i)];
        if (i == skip_a) ei -= drop_a;
        if (i == skip_b) ei -= drop_b;
        if (ei < 0) return 0.0;
        p *= pow_int(vars(i), ei);
      }
      return p;
    };
    value(j) += partial(-1, 0, -1, 0);
    for (int a : active) {
      const int ea = e[static_cast<std::size_t>(a)];
      grad(j, a) += ea * partial(a, 1, -1, 0);
      if (!hess) continue;
      auto& h = (*hess)[static_cast<std::size_t>(j)];
      if (ea >= 2) h(a, a) += ea * (ea - 1) * partial(a, 2, -1, 0);
      for (int b : active) {
        if (b == a) continue;
        const int eb = e[static_cast<std::size_t>(b)];
        h(a, b) += ea * eb * partial(a, 1, b, 1);
      }
    }
  }
}

PerturbationPolynomial PerturbationPolynomial::rescaled_by_weight(double lambda) const {
  std::vector<Monomial> terms = terms_;
  for (auto& m : terms) m.coefficient *= std::pow(lambda, m.weighted_degree() - 2);
  return PerturbationPolynomial(n_, d_, std::move(terms), max_degree_);
}

// ---------------------------------------------------------------------------
// DefiningFunction

DefiningFunction::DefiningFunction(HermitianPencil pencil, PerturbationPolynomial perturbation,
                                   double scale)
    : pencil_(std::move(pencil)), perturbation_(std::move(perturbation)), scale_(scale) {
  if (scale_ < 0.0) throw Error(ErrorCode::invalid_input, "perturbation scale must be >= 0");
  if (perturbation_.n() == 0 && perturbation_.d() == 0) {
    perturbation_ = PerturbationPolynomial(pencil_.n(), pencil_.d());
  }
  if (perturbation_.n() != pencil_.n() || perturbation_.d() != pencil_.d()) {
    throw Error(ErrorCode::invalid_input, "perturbation dimensions do not match the pencil");
  }
}

DefiningFunction DefiningFunction::with_scale(double t) const {
  return DefiningFunction(pencil_, perturbation_, t);
}

DefiningFunction::LocalJet DefiningFunction::local_jet(const VectorXcd& z, const VectorXcd& w,
                                                       bool second_order) const {
  const int n = this->n();
  const int d = this->d();
  const int nz = n + d;
  LocalJet jet;
  jet.r.resize(d);
  jet.dz = MatrixXcd::Zero(d, nz);
  jet.dzbar = MatrixXcd::Zero(d, nz);
  if (second_order) {
    jet.d2.assign(static_cast<std::size_t>(d), MatrixXcd::Zero(nz, nz));
    jet.d2m.assign(static_cast<std::size_t>(d), MatrixXcd::Zero(nz, nz));
  }

  const VectorXcd zbar = z.conjugate();
  for (int j = 0; j < d; ++j) {
    const MatrixXcd& a = pencil_[j];
    jet.r(j) = w(j).real() - z.dot(a * z).real();
    const VectorXcd az = a * z;
    const VectorXcd atzbar = a.transpose() * zbar;
    for (int k = 0; k < n; ++k) {
      jet.dz(j, k) = -atzbar(k);
      jet.dzbar(j, k) = -az(k);
    }
    jet.dz(j, n + j) = 0.5;
    jet.dzbar(j, n + j) = 0.5;
    if (second_order) {
      // d/dz_a d/dconj(z_b) of -conj(z)^T A z = -A_{ba}
      for (int a_ = 0; a_ < n; ++a_) {
        for (int b = 0; b < n; ++b) jet.d2m[static_cast<std::size_t>(j)](a_, b) = -a(b, a_);
      }
    }
  }

  if (is_quadric()) return jet;

  // Real variables (x, y, v); the polynomial does not depend on Re w.
  const int nv = perturbation_.variable_count();
  VectorXd vars(nv);
  for (int k = 0; k < n; ++k) {
    vars(k) = z(k).real();
    vars(n + k) = z(k).imag();
  }
  for (int l = 0; l < d; ++l) vars(2 * n + l) = w(l).imag();

  VectorXd pv;
  MatrixXd pg;
  std::vector<MatrixXd> ph;
  perturbation_.evaluate(vars, pv, pg, second_order ? &ph : nullptr);

  // Index of the real and imaginary part of Z_a in the variable layout (-1: absent).
  auto re_index = [&](int a_) { return a_ < n ? a_ : -1; };
  auto im_index = [&](int a_) { return a_ < n ? n + a_ : 2 * n + (a_ - n); };
  auto entry = [](const MatrixXd& m, int r, int c) { return (r < 0 || c < 0) ? 0.0 : m(r, c); };
  auto gentry = [&](int j, int i) { return i < 0 ? 0.0 : pg(j, i); };

  const double t = scale_;
  for (int j = 0; j < d; ++j) {
    jet.r(j) += t * pv(j);
    for (int a_ = 0; a_ < nz; ++a_) {
      const double gx = gentry(j, re_index(a_));
      const double gy = gentry(j, im_index(a_));
      jet.dz(j, a_) += t * 0.5 * cplx(gx, -gy);
      jet.dzbar(j, a_) += t * 0.5 * cplx(gx, gy);
    }
    if (!second_order) continue;
    const MatrixXd& h = ph[static_cast<std::size_t>(j)];
    for (int a_ = 0; a_ < nz; ++a_) {
      const int xa = re_index(a_), ya = im_index(a_);
      for (int b = 0; b < nz; ++b) {
        const int xb = re_index(b), yb = im_index(b);
        const double hxx = entry(h, xa, xb), hxy = entry(h, xa, yb);
        const double hyx = entry(h, ya, xb), hyy = entry(h, ya, yb);
        jet.d2[static_cast<std::size_t>(j)](a_, b) += t * 0.25 * cplx(hxx - hyy, -hxy - hyx);
        jet.d2m[static_cast<std::size_t>(j)](a_, b) += t * 0.25 * cplx(hxx + hyy, hxy - hyx);
      }
    }
  }
  return jet;
}

VectorXd DefiningFunction::eval_r(const VectorXcd& z, const VectorXcd& w) const {
  return local_jet(z, w, false).r;
}

MatrixXcd DefiningFunction::eval_grad_r(const VectorXcd& z, const VectorXcd& w) const {
  return local_jet(z, w, false).dz;
}

// ---------------------------------------------------------------------------
// Non-degeneracy

int numeric_rank(const MatrixXcd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

std::pair<bool, int> check_linear_independence(const HermitianPencil& pencil) {
  const int n = pencil.n();
  MatrixXcd flat(n * n, pencil.d());
  for (int j = 0; j < pencil.d(); ++j) {
    flat.col(j) = Eigen::Map<const VectorXcd>(pencil[j].data(), n * n);
  }
  const int rank = numeric_rank(flat);
  return {rank == pencil.d(), rank};
}

int common_kernel_dimension(const HermitianPencil& pencil) {
  const int n = pencil.n();
  MatrixXcd stacked(pencil.d() * n, n);
  for (int j = 0; j < pencil.d(); ++j) stacked.middleRows(j * n, n) = pencil[j];
  return n - numeric_rank(stacked);
}

MatrixXcd witness_matrix(const HermitianPencil& pencil, const VectorXcd& v) {
  MatrixXcd m(pencil.n(), pencil.d());
  for (int j = 0; j < pencil.d(); ++j) m.col(j) = pencil[j] * v;
  return m;
}

std::optional<VectorXcd> find_full_witness(const HermitianPencil& pencil, int trials,
                                           std::uint64_t seed) {
  if (pencil.d() > pencil.n()) return std::nullopt;
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    VectorXcd v = random_complex_normal(pencil.n(), rng);
    if (numeric_rank(witness_matrix(pencil, v)) == pencil.d()) return v;
  }
  return std::nullopt;
}

std::optional<VectorXd> find_invertible_combination(const HermitianPencil& pencil, int trials,
                                                    std::uint64_t seed) {
  const int d = pencil.d();
  const double scale = pencil_scale(pencil);
  if (scale == 0.0) return std::nullopt;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  VectorXd best;
  double best_det = -1.0;
  auto consider = [&](const VectorXd& c) {
    const double det = std::abs(pencil.combination(c).determinant());
    if (det > best_det) {
      best_det = det;
      best = c;
    }
  };
  for (int j = 0; j < d; ++j) consider(VectorXd::Unit(d, j));
  for (int trial = 0; trial < trials; ++trial) {
    VectorXd c(d);
    for (int j = 0; j < d; ++j) c(j) = normal(rng);
    const double norm = c.norm();
    if (norm == 0.0) continue;
    consider(c / norm);
  }
  if (best_det > kRankTolerance * std::pow(scale, pencil.n())) return best;
  return std::nullopt;
}

std::optional<bool> decide_invertible_combination_exact(const HermitianPencil& pencil) {
  const int n = pencil.n();
  const int d = pencil.d();
  if (n > 2 || d > 2) return std::nullopt;
  const double scale = pencil_scale(pencil);
  if (scale == 0.0) return false;
  if (d == 1) return std::abs(pencil[0].determinant()) > kRankTolerance * std::pow(scale, n);

  // d == 2: det(c1 A1 + c2 A2) = sum_{k=0}^{n} coef_k c1^(n-k) c2^k.
  MatrixXd vander(n + 1, n + 1);
  VectorXd values(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double phi = M_PI * (i + 0.5) / (n + 1);
    const double c1 = std::cos(phi), c2 = std::sin(phi);
    for (int k = 0; k <= n; ++k) vander(i, k) = std::pow(c1, n - k) * std::pow(c2, k);
    VectorXd c(2);
    c << c1, c2;
    values(i) = pencil.combination(c).determinant().real();
  }
  const VectorXd coef = vander.fullPivLu().solve(values);
  return coef.cwiseAbs().maxCoeff() > kRankTolerance * std::pow(scale, n);
}

NonDegeneracyReport analyze_nondegeneracy(const HermitianPencil& pencil, int trials,
                                          std::uint64_t seed) {
  NonDegeneracyReport rep;
  rep.trials = trials;
  rep.seed = seed;
  std::tie(rep.cond_a, rep.pencil_rank) = check_linear_independence(pencil);
  rep.common_kernel_dim = common_kernel_dimension(pencil);
  rep.cond_b = rep.common_kernel_dim == 0;
  rep.full_witness = find_full_witness(pencil, trials, seed);
  rep.cond_f = rep.full_witness.has_value();
  rep.invertible_combination = find_invertible_combination(pencil, trials, seed);
  rep.cond_t = rep.invertible_combination.has_value();
  rep.cond_t_exact = decide_invertible_combination_exact(pencil);
  rep.beloshapka = rep.cond_a && rep.cond_b;
  rep.fully = rep.cond_f && rep.cond_t;
  return rep;
}

}  // namespace statdisc
