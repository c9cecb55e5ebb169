#include "statdisc/discs.hpp"

#include <algorithm>
#include <cmath>

#include "statdisc/simd/kernels.hpp"

namespace statdisc {
namespace {

struct Split {
  std::vector<double> re, im;
  explicit Split(std::size_t n) : re(n), im(n) {}
};

Split split_row(const MatrixXcd& m, int row) {
  Split s(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    s.re[static_cast<std::size_t>(k)] = m(row, k).real();
    s.im[static_cast<std::size_t>(k)] = m(row, k).imag();
  }
  return s;
}

Split split_vector(const VectorXcd& v) {
  Split s(static_cast<std::size_t>(v.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    s.re[static_cast<std::size_t>(k)] = v(k).real();
    s.im[static_cast<std::size_t>(k)] = v(k).imag();
  }
  return s;
}

// out(row, p) = sum_k coef(row, k) x_p^k
MatrixXcd evaluate_rows(const MatrixXcd& coef, const VectorXcd& x) {
  const auto& kt = simd::kernels();
  const Split xs = split_vector(x);
  const std::size_t npts = static_cast<std::size_t>(x.size());
  MatrixXcd out(coef.rows(), x.size());
  Split o(npts);
  for (int r = 0; r < coef.rows(); ++r) {
    const Split c = split_row(coef, r);
    kt.horner(c.re.data(), c.im.data(), c.re.size(), xs.re.data(), xs.im.data(), npts,
              o.re.data(), o.im.data());
    for (std::size_t p = 0; p < npts; ++p) out(r, static_cast<Eigen::Index>(p)) = cplx(o.re[p], o.im[p]);
  }
  return out;
}

}  // namespace

VectorXcd unit_grid(int M) {
  if (M < 1) throw Error(ErrorCode::invalid_input, "grid size must be positive");
  VectorXcd z(M);
  for (int k = 0; k < M; ++k) {
    const double th = 2.0 * M_PI * k / M;
    z(k) = cplx(std::cos(th), std::sin(th));
  }
  return z;
}

// ---------------------------------------------------------------------------
// AnalyticDisc

AnalyticDisc::AnalyticDisc(int m, int nf) : coef_(MatrixXcd::Zero(m, nf + 1)) {
  if (m < 0 || nf < 0) throw Error(ErrorCode::invalid_input, "disc dimensions must be nonnegative");
}

AnalyticDisc::AnalyticDisc(MatrixXcd coefficients) : coef_(std::move(coefficients)) {
  if (coef_.cols() < 1) throw Error(ErrorCode::invalid_input, "disc needs at least one coefficient");
}

AnalyticDisc AnalyticDisc::constant(const VectorXcd& v, int nf) {
  AnalyticDisc out(static_cast<int>(v.size()), nf);
  out.coef_.col(0) = v;
  return out;
}

VectorXcd AnalyticDisc::eval(cplx zeta) const {
  if (std::abs(zeta) > 1.0 + 1e-12) {
    throw Error(ErrorCode::invalid_input, "discs are evaluated on the closed unit disc only");
  }
  VectorXcd x(1);
  x(0) = zeta;
  return evaluate_rows(coef_, x).col(0);
}

AnalyticDisc AnalyticDisc::derivative() const {
  const int deg = nf();
  MatrixXcd d = MatrixXcd::Zero(m(), std::max(deg, 1));
  for (int k = 1; k <= deg; ++k) d.col(k - 1) = static_cast<double>(k) * coef_.col(k);
  return AnalyticDisc(std::move(d));
}

AnalyticDisc AnalyticDisc::resized(int new_nf) const {
  AnalyticDisc out(m(), new_nf);
  const int keep = std::min(nf(), new_nf) + 1;
  out.coef_.leftCols(keep) = coef_.leftCols(keep);
  return out;
}

AnalyticDisc AnalyticDisc::block(int first, int count) const {
  return AnalyticDisc(MatrixXcd(coef_.middleRows(first, count)));
}

MatrixXcd AnalyticDisc::boundary(int M) const { return evaluate_rows(coef_, unit_grid(M)); }

AnalyticDisc AnalyticDisc::from_boundary(const MatrixXcd& samples, int nf) {
  const MatrixXcd a = dft(samples);
  AnalyticDisc out(static_cast<int>(samples.rows()), nf);
  const int keep = std::min<int>(nf + 1, static_cast<int>(a.cols()));
  out.coef_.leftCols(keep) = a.leftCols(keep);
  return out;
}

AnalyticDisc AnalyticDisc::times_one_minus_zeta() const {
  MatrixXcd out = MatrixXcd::Zero(m(), coef_.cols() + 1);
  out.leftCols(coef_.cols()) = coef_;
  out.rightCols(coef_.cols()) -= coef_;
  return AnalyticDisc(std::move(out));
}

AnalyticDisc AnalyticDisc::times_zeta() const {
  MatrixXcd out = MatrixXcd::Zero(m(), coef_.cols() + 1);
  out.rightCols(coef_.cols()) = coef_;
  return AnalyticDisc(std::move(out));
}

AnalyticDisc AnalyticDisc::operator+(const AnalyticDisc& o) const {
  if (o.m() != m()) throw Error(ErrorCode::invalid_input, "disc component counts differ");
  const int deg = std::max(nf(), o.nf());
  AnalyticDisc out = resized(deg);
  out.coef_.leftCols(o.coef_.cols()) += o.coef_;
  return out;
}

AnalyticDisc AnalyticDisc::operator-(const AnalyticDisc& o) const { return *this + o * cplx(-1.0); }

AnalyticDisc AnalyticDisc::operator*(cplx a) const { return AnalyticDisc(MatrixXcd(coef_ * a)); }

// ---------------------------------------------------------------------------
// Transforms and norms

MatrixXcd dft(const MatrixXcd& samples) {
  const int M = static_cast<int>(samples.cols());
  const VectorXcd x = unit_grid(M).conjugate();
  return evaluate_rows(samples, x) / static_cast<double>(M);
}

double negative_mode_defect(const MatrixXcd& samples) {
  const MatrixXcd a = dft(samples);
  const int M = static_cast<int>(a.cols());
  const int first = M / 2 + (M % 2);
  double mass = 0.0;
  for (int j = std::max(first, 1); j < M; ++j) mass += a.col(j).squaredNorm();
  return std::sqrt(mass);
}

double holder_norm(const AnalyticDisc& disc, int k, double alpha, int M) {
  if (k != 0 && k != 1) throw Error(ErrorCode::invalid_input, "holder_norm supports k = 0 or 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::invalid_input, "alpha must lie in (0, 1)");
  if (M < 64) throw Error(ErrorCode::invalid_input, "holder_norm needs at least 64 grid points");

  const MatrixXcd f = disc.boundary(M);
  double total = f.colwise().norm().maxCoeff();
  MatrixXcd top = f;
  if (k == 1) {
    // d/dtheta f(e^{i theta}) = i zeta f'(zeta)
    const VectorXcd z = unit_grid(M);
    top = disc.derivative().boundary(M) * (z * kI).asDiagonal();
    total += top.colwise().norm().maxCoeff();
  }

  const auto& kt = simd::kernels();
  std::vector<Split> rows;
  rows.reserve(static_cast<std::size_t>(top.rows()));
  for (int r = 0; r < top.rows(); ++r) rows.push_back(split_row(top, r));
  std::vector<double> acc(static_cast<std::size_t>(M));
  double quotient = 0.0;
  for (int s = 1; s <= M / 2; ++s) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& row : rows) {
      kt.accumulate_shift_diff(row.re.data(), row.im.data(), static_cast<std::size_t>(M),
                               static_cast<std::size_t>(s), acc.data());
    }
    const double diff = std::sqrt(std::max(0.0, kt.max_value(acc.data(), acc.size())));
    const double dist = 2.0 * std::sin(M_PI * s / M);
    quotient = std::max(quotient, diff / std::pow(dist, alpha));
  }
  return total + quotient;
}

double factored_norm(const FactoredDisc& fd, double alpha, int M) {
  return holder_norm(fd.u, 1, alpha, M);
}

// ---------------------------------------------------------------------------
// Lifts

LiftedDisc::LiftedDisc(int n, int d, AnalyticDisc all) : n_(n), d_(d), all_(std::move(all)) {
  if (all_.m() != 2 * n + 2 * d) {
    throw Error(ErrorCode::invalid_input, "lift must have 2n + 2d components");
  }
}

LiftedDisc::LiftedDisc(const AnalyticDisc& h, const AnalyticDisc& g, const AnalyticDisc& ht,
                       const AnalyticDisc& gt)
    : n_(h.m()), d_(g.m()) {
  if (ht.m() != n_ || gt.m() != d_) {
    throw Error(ErrorCode::invalid_input, "lift components have inconsistent dimensions");
  }
  const int deg = std::max({h.nf(), g.nf(), ht.nf(), gt.nf()});
  MatrixXcd all(2 * n_ + 2 * d_, deg + 1);
  all << h.resized(deg).coefficients(), g.resized(deg).coefficients(),
      ht.resized(deg).coefficients(), gt.resized(deg).coefficients();
  all_ = AnalyticDisc(std::move(all));
}

ConstrainedLift::ConstrainedLift(int n, int d, AnalyticDisc cofactor, VectorXd c)
    : n_(n), d_(d), cofactor_(std::move(cofactor)), c_(std::move(c)) {
  if (cofactor_.m() != 2 * n + 2 * d || c_.size() != d) {
    throw Error(ErrorCode::invalid_input, "constrained lift dimensions do not match (n, d)");
  }
}

LiftedDisc ConstrainedLift::realized() const {
  AnalyticDisc all = cofactor_.times_one_minus_zeta();
  for (int j = 0; j < d_; ++j) all.coefficients()(2 * n_ + d_ + j, 1) += 0.5 * c_(j);
  return LiftedDisc(n_, d_, std::move(all));
}

VectorXcd jet1_at_one(const LiftedDisc& lift) {
  const int N = lift.size();
  VectorXcd out(2 * N);
  out.head(N) = lift.all().eval(1.0);
  out.tail(N) = lift.all().derivative().eval(1.0);
  return out;
}

}  // namespace statdisc
