#include "statdisc/rh_linear.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "statdisc/simd/kernels.hpp"

namespace statdisc {
namespace {

MatrixXcd poly_at(const std::vector<MatrixXcd>& p, cplx zeta) {
  MatrixXcd out = p.back();
  for (std::size_t k = p.size() - 1; k-- > 0;) out = out * zeta + p[k];
  return out;
}

// Index of the only nonzero coefficient of a matrix polynomial, or -1.
int single_monomial(const std::vector<MatrixXcd>& p, double tol) {
  int found = -1;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].cwiseAbs().maxCoeff() > tol) {
      if (found >= 0) return -1;
      found = static_cast<int>(k);
    }
  }
  return found;
}

// Indices of a block kappa zeta^m K with K constant invertible: 2m each.
std::vector<int> monomial_block_indices(const std::vector<MatrixXcd>& p, const char* name) {
  const int m = single_monomial(p, 1e-12);
  if (m < 0) {
    throw Error(ErrorCode::unstructured, std::string("block ") + name + " is not a monomial");
  }
  const MatrixXcd& K = p[static_cast<std::size_t>(m)];
  if (numeric_rank(K) < K.rows()) {
    throw Error(ErrorCode::unstructured, std::string("block ") + name + " is singular");
  }
  return std::vector<int>(static_cast<std::size_t>(K.rows()), 2 * m);
}

// Laurent coefficients of a 2x2 symbol sampled on a small grid; returns the
// polynomial part and fails if negative modes are present.
std::vector<Eigen::Matrix2cd> symbol_polynomial(const std::function<Eigen::Matrix2cd(cplx)>& f,
                                                int max_degree) {
  const int M = 4 * (max_degree + 1);
  const VectorXcd grid = unit_grid(M);
  MatrixXcd samples(4, M);
  for (int k = 0; k < M; ++k) {
    const Eigen::Matrix2cd v = f(grid(k));
    samples.col(k) << v(0, 0), v(0, 1), v(1, 0), v(1, 1);
  }
  if (negative_mode_defect(samples) > 1e-12) {
    throw Error(ErrorCode::unstructured, "symbol has negative Fourier modes");
  }
  const MatrixXcd a = dft(samples);
  std::vector<Eigen::Matrix2cd> out;
  for (int k = 0; k <= max_degree; ++k) {
    Eigen::Matrix2cd m;
    m << a(0, k), a(1, k), a(2, k), a(3, k);
    m = m.unaryExpr([](cplx x) { return std::abs(x) < 1e-14 ? cplx(0.0) : x; });
    out.push_back(m);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Boundary matrix

MatrixXcd StructuredG::at(cplx zeta) const {
  const int N = 2 * n + 2 * d;
  MatrixXcd G = MatrixXcd::Zero(N, N);
  G.block(0, 0, d, d) = poly_at(g1, zeta);
  G.block(0, d, d, 2 * n) = poly_at(b, zeta);
  G.block(d, d, 2 * n, 2 * n) = poly_at(g2, zeta);
  G.block(d, d + 2 * n, 2 * n, d) = poly_at(c, zeta);
  G.block(d + 2 * n, d + 2 * n, d, d) = poly_at(g3, zeta);
  return G;
}

BoundaryMatrix::BoundaryMatrix(int n, int d, std::function<MatrixXcd(cplx)> evaluator, int M,
                               std::optional<StructuredG> structured)
    : n_(n), d_(d), eval_(std::move(evaluator)), structured_(std::move(structured)) {
  const VectorXcd grid = unit_grid(M);
  samples_.reserve(static_cast<std::size_t>(M));
  min_abs_det_ = std::numeric_limits<double>::infinity();
  for (int k = 0; k < M; ++k) {
    samples_.push_back(eval_(grid(k)));
    min_abs_det_ = std::min(min_abs_det_, std::abs(samples_.back().determinant()));
  }
}

BoundaryMatrix BoundaryMatrix::resampled(int M) const {
  return BoundaryMatrix(n_, d_, eval_, M, structured_);
}

BoundaryMatrix assemble_G(const DefiningFunction& def, const LiftedDisc& base, int M) {
  const int n = def.n();
  const int d = def.d();
  const int N = 2 * n + 2 * d;
  if (base.n() != n || base.d() != d) {
    throw Error(ErrorCode::invalid_input, "base lift dimensions do not match the defining function");
  }
  const auto perm = block_order(n, d);
  auto system = std::make_shared<ConormalSystem>(def);
  auto disc = std::make_shared<AnalyticDisc>(base.all());
  auto evaluator = [system, disc, perm, N](cplx zeta) {
    MatrixXcd Gl;
    system->rows_at(disc->eval(zeta / std::max(1.0, std::abs(zeta))), zeta, &Gl);
    MatrixXcd G(N, N);
    for (int p = 0; p < N; ++p) G.col(p) = Gl.col(perm[static_cast<std::size_t>(p)]);
    return G;
  };

  std::optional<StructuredG> structured;
  const MatrixXcd gt = base.gt().coefficients();
  bool shift_form = def.is_quadric() && gt.cols() >= 2;
  VectorXd c(d);
  if (shift_form) {
    for (int k = 0; k < gt.cols(); ++k) {
      if (k == 1) continue;
      if (gt.col(k).cwiseAbs().maxCoeff() > 1e-14) shift_form = false;
    }
    if (gt.col(1).imag().cwiseAbs().maxCoeff() > 1e-14) shift_form = false;
    c = 2.0 * gt.col(1).real();
  }
  if (shift_form) {
    const HermitianPencil& pencil = def.pencil();
    StructuredG s;
    s.n = n;
    s.d = d;
    s.A = pencil.combination(c);
    const MatrixXcd H = base.h().coefficients();
    const int deg = static_cast<int>(H.cols());
    s.g1 = {0.5 * MatrixXcd::Identity(d, d)};
    s.g3 = {MatrixXcd::Zero(d, d), -kI * MatrixXcd::Identity(d, d)};
    MatrixXcd g20 = MatrixXcd::Zero(2 * n, 2 * n), g21 = MatrixXcd::Zero(2 * n, 2 * n);
    g20.block(0, n, n, n) = MatrixXcd::Identity(n, n);
    g20.block(n, n, n, n) = -kI * MatrixXcd::Identity(n, n);
    g21.block(0, 0, n, n) = s.A.transpose();
    g21.block(n, 0, n, n) = kI * s.A.transpose();
    s.g2 = {g20, g21};
    for (int k = 0; k < deg; ++k) {
      MatrixXcd bk = MatrixXcd::Zero(d, 2 * n), ck = MatrixXcd::Zero(2 * n, d);
      for (int j = 0; j < d; ++j) {
        const VectorXcd ah = pencil[j] * H.col(k);
        bk.block(j, 0, 1, n) = -ah.transpose();
        ck.block(0, j, n, 1) = 2.0 * ah;
        ck.block(n, j, n, 1) = -2.0 * kI * ah;
      }
      s.b.push_back(bk);
      s.c.push_back(ck);
    }
    structured = std::move(s);
  }
  return BoundaryMatrix(n, d, evaluator, M, std::move(structured));
}

// ---------------------------------------------------------------------------
// Indices

int maslov_index(const std::function<MatrixXcd(cplx)>& G, int M0) {
  for (int M = std::max(M0, 8); M <= kMaxWindingGrid; M *= 2) {
    const VectorXcd grid = unit_grid(M);
    std::vector<cplx> phi(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
      const MatrixXcd g = G(grid(k));
      const cplx det = g.determinant();
      if (std::abs(det) == 0.0) throw Error(ErrorCode::invalid_input, "G is singular on the grid");
      // det(-conj(G)^{-1} G) = (-1)^N det G / conj(det G)
      cplx v = det / std::conj(det);
      if (g.rows() % 2 == 1) v = -v;
      phi[static_cast<std::size_t>(k)] = v;
    }
    double total = 0.0;
    double worst = 0.0;
    for (int k = 0; k < M; ++k) {
      const double inc = std::arg(phi[static_cast<std::size_t>((k + 1) % M)] / phi[static_cast<std::size_t>(k)]);
      worst = std::max(worst, std::abs(inc));
      total += inc;
    }
    if (worst < M_PI / 2) return static_cast<int>(std::lround(total / (2.0 * M_PI)));
  }
  throw Error(ErrorCode::winding_unresolved, "winding unresolved");
}

int maslov_index(const BoundaryMatrix& G) {
  return maslov_index([&G](cplx z) { return G.at(z); }, G.grid());
}

std::vector<Eigen::Matrix2cd> r_block_symbol() {
  auto P = [](cplx z) {
    Eigen::Matrix2cd R;
    R << z, 1.0, kI * z, -kI;
    return Eigen::Matrix2cd(-R.conjugate().inverse() * R);
  };
  return symbol_polynomial(P, 2);
}

Birkhoff2x2 birkhoff_factor_2x2(const std::vector<Eigen::Matrix2cd>& block) {
  const double tol = 1e-12;
  auto entry_monomial = [&](int r, int c, cplx& coef) {
    int found = -1;
    for (std::size_t k = 0; k < block.size(); ++k) {
      if (std::abs(block[k](r, c)) > tol) {
        if (found >= 0) return -2;
        found = static_cast<int>(k);
        coef = block[k](r, c);
      }
    }
    return found;
  };
  cplx a00, a01, a10, a11;
  const int k00 = entry_monomial(0, 0, a00), k01 = entry_monomial(0, 1, a01);
  const int k10 = entry_monomial(1, 0, a10), k11 = entry_monomial(1, 1, a11);

  Birkhoff2x2 out;
  out.b_minus = Eigen::Matrix2cd::Identity();
  if (k00 == -1 && k11 == -1 && k01 >= 0 && k01 == k10) {
    out.b_plus << 0.0, a01, a10, 0.0;
    out.kappa1 = out.kappa2 = k01;
  } else if (k01 == -1 && k10 == -1 && k00 >= 0 && k11 >= 0) {
    out.b_plus << a00, 0.0, 0.0, a11;
    out.kappa1 = k00;
    out.kappa2 = k11;
  } else {
    throw Error(ErrorCode::unstructured, "2x2 block is not of monomial antidiagonal/diagonal type");
  }
  const VectorXcd grid = unit_grid(16);
  for (int k = 0; k < grid.size(); ++k) {
    const cplx z = grid(k);
    Eigen::Matrix2cd P = Eigen::Matrix2cd::Zero();
    for (std::size_t j = block.size(); j-- > 0;) P = P * z + block[j];
    Eigen::Matrix2cd mid = Eigen::Matrix2cd::Zero();
    mid(0, 0) = std::pow(z, out.kappa1);
    mid(1, 1) = std::pow(z, out.kappa2);
    out.residual = std::max(out.residual, (out.b_plus * mid * out.b_minus - P).cwiseAbs().maxCoeff());
  }
  return out;
}

IndexData partial_indices_structured(const BoundaryMatrix& G) {
  if (!G.structured()) {
    throw Error(ErrorCode::unstructured, "G carries no block structure; use maslov_index");
  }
  const StructuredG& s = *G.structured();
  const int n = s.n;
  IndexData out;
  const auto i1 = monomial_block_indices(s.g1, "G1");
  out.partial_indices.insert(out.partial_indices.end(), i1.begin(), i1.end());

  // G2 diag(A^{-T}, I) must equal [[zeta I, I], [i zeta I, -i I]].
  MatrixXcd right = MatrixXcd::Identity(2 * n, 2 * n);
  Eigen::FullPivLU<MatrixXcd> lu(s.A.transpose());
  if (!lu.isInvertible()) throw Error(ErrorCode::unstructured, "sum c_j A_j is singular");
  right.topLeftCorner(n, n) = lu.inverse();
  const auto reduced = [&](cplx z) { return MatrixXcd(poly_at(s.g2, z) * right); };
  const VectorXcd probe = unit_grid(8);
  for (int k = 0; k < probe.size(); ++k) {
    const cplx z = probe(k);
    MatrixXcd expect(2 * n, 2 * n);
    const MatrixXcd I = MatrixXcd::Identity(n, n);
    expect << z * I, I, kI * z * I, -kI * I;
    if ((reduced(z) - expect).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error(ErrorCode::unstructured, "G2 block does not reduce to R blocks");
    }
  }
  for (int k = 0; k < n; ++k) {
    // Rows/columns (k, n + k) of the reduced block form one R(zeta).
    auto P = [&](cplx z) {
      const MatrixXcd g = reduced(z);
      Eigen::Matrix2cd R;
      R << g(k, k), g(k, n + k), g(n + k, k), g(n + k, n + k);
      return Eigen::Matrix2cd(-R.conjugate().inverse() * R);
    };
    const Birkhoff2x2 f = birkhoff_factor_2x2(symbol_polynomial(P, 2));
    out.partial_indices.push_back(f.kappa1);
    out.partial_indices.push_back(f.kappa2);
  }
  const auto i3 = monomial_block_indices(s.g3, "G3");
  out.partial_indices.insert(out.partial_indices.end(), i3.begin(), i3.end());
  for (int k : out.partial_indices) out.maslov += k;
  return out;
}

// ---------------------------------------------------------------------------
// Linear operator and kernels

MatrixXd linear_operator(const BoundaryMatrix& G, const LiftedDisc& f) {
  const int N = G.size();
  const int M = G.grid();
  const auto perm = block_order(G.n(), G.d());
  const MatrixXcd fl = f.all().boundary(M);
  MatrixXd out(N, M);
  for (int k = 0; k < M; ++k) {
    VectorXcd fp(N);
    for (int p = 0; p < N; ++p) fp(p) = fl(perm[static_cast<std::size_t>(p)], k);
    out.col(k) = 2.0 * (G.samples()[static_cast<std::size_t>(k)].conjugate() * fp).real();
  }
  return out;
}

VectorXd realify(const LiftedDisc& lift, int nf) {
  const int N = lift.size();
  const MatrixXcd c = lift.all().resized(nf).coefficients();
  VectorXd x(2 * N * (nf + 1));
  for (int a = 0; a < N; ++a) {
    for (int j = 0; j <= nf; ++j) {
      x(2 * (a * (nf + 1) + j)) = c(a, j).real();
      x(2 * (a * (nf + 1) + j) + 1) = c(a, j).imag();
    }
  }
  return x;
}

LiftedDisc unrealify(int n, int d, const VectorXd& x, int nf) {
  const int N = 2 * n + 2 * d;
  if (x.size() != 2 * N * (nf + 1)) throw Error(ErrorCode::invalid_input, "coordinate size mismatch");
  AnalyticDisc disc(N, nf);
  for (int a = 0; a < N; ++a) {
    for (int j = 0; j <= nf; ++j) {
      disc.coefficients()(a, j) = cplx(x(2 * (a * (nf + 1) + j)), x(2 * (a * (nf + 1) + j) + 1));
    }
  }
  return LiftedDisc(n, d, std::move(disc));
}

MatrixXd realified_operator(const std::vector<MatrixXcd>& g_lift, bool constrained, int nf,
                            double scale) {
  const int M = static_cast<int>(g_lift.size());
  const int N = static_cast<int>(g_lift.front().rows());
  const int nc = nf + 1;
  const int cols = 2 * N * nc;
  const VectorXcd grid = unit_grid(M);
  const auto& kt = simd::kernels();
  std::vector<double> er(static_cast<std::size_t>(nc)), ei(static_cast<std::size_t>(nc));
  MatrixXd J(N * M, cols);
  Eigen::Matrix<double, 1, Eigen::Dynamic> rowbuf(cols);
  for (int k = 0; k < M; ++k) {
    const cplx z = grid(k);
    cplx e = constrained ? (1.0 - z) : cplx(1.0);
    for (int j = 0; j < nc; ++j) {
      er[static_cast<std::size_t>(j)] = e.real();
      ei[static_cast<std::size_t>(j)] = e.imag();
      e *= z;
    }
    const MatrixXcd& g = g_lift[static_cast<std::size_t>(k)];
    for (int r = 0; r < N; ++r) {
      for (int a = 0; a < N; ++a) {
        const cplx coef = 2.0 * scale * std::conj(g(r, a));
        kt.scale_realify(coef.real(), coef.imag(), er.data(), ei.data(),
                         static_cast<std::size_t>(nc), rowbuf.data() + 2 * a * nc);
      }
      J.row(k * N + r) = rowbuf;
    }
  }
  return J;
}

KernelBasis numeric_kernel(const BoundaryMatrix& G, bool constrained, int nf) {
  const int n = G.n();
  const int d = G.d();
  const int N = G.size();
  const int M = std::max(G.grid(), 4 * (nf + 2));
  const BoundaryMatrix Gm = M == G.grid() ? G : G.resampled(M);
  const auto perm = block_order(n, d);
  std::vector<MatrixXcd> g_lift;
  g_lift.reserve(static_cast<std::size_t>(M));
  for (const auto& g : Gm.samples()) {
    MatrixXcd gl(N, N);
    for (int p = 0; p < N; ++p) gl.col(perm[static_cast<std::size_t>(p)]) = g.col(p);
    g_lift.push_back(std::move(gl));
  }
  const int cols = 2 * N * (nf + 1);
  const MatrixXd J = realified_operator(g_lift, constrained, nf, 1.0 / std::sqrt(static_cast<double>(M)));

  Eigen::HouseholderQR<MatrixXd> qr(J);
  const MatrixXd R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<MatrixXd> svd(R, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();

  KernelBasis out;
  out.constrained = constrained;
  out.singular_values = sv;
  const double smax = sv(0);
  int rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-8 * smax) ++rank;
  out.dim = static_cast<int>(sv.size()) - rank;
  out.gap_ratio = out.dim == 0 ? std::numeric_limits<double>::infinity()
                  : sv(rank) == 0.0 ? std::numeric_limits<double>::infinity()
                                    : sv(rank - 1) / sv(rank);
  if (out.dim > 0 && rank > 0 && out.gap_ratio < kKernelGapRatio) {
    throw Error(ErrorCode::kernel_ambiguous, "kernel dimension ambiguous");
  }
  out.nf = constrained ? nf + 1 : nf;
  out.coords.resize(2 * N * (out.nf + 1), out.dim);
  for (int i = 0; i < out.dim; ++i) {
    const VectorXd x = svd.matrixV().col(rank + i);
    LiftedDisc lift = unrealify(n, d, x, nf);
    if (constrained) {
      out.cofactors.push_back(lift.all());
      lift = LiftedDisc(n, d, lift.all().times_one_minus_zeta());
    }
    out.coords.col(i) = realify(lift, out.nf);
    out.elements.push_back(std::move(lift));
  }
  return out;
}

KernelBasis explicit_kernel_basis(const HermitianPencil& pencil, const VectorXcd& V,
                                  const VectorXd& c) {
  const int n = pencil.n();
  const int d = pencil.d();
  const int N = 2 * n + 2 * d;
  if (V.size() != n || c.size() != d) throw Error(ErrorCode::invalid_input, "V or c has wrong length");
  const MatrixXcd A = pencil.combination(c);
  Eigen::FullPivLU<MatrixXcd> lu(A);
  if (numeric_rank(A) < n) throw Error(ErrorCode::invalid_input, "sum c_j A_j is not invertible");
  const MatrixXcd D = gram_D(pencil, V).D2;
  const MatrixXcd Dh = D.adjoint();
  const MatrixXcd Dc = D.conjugate();

  KernelBasis out;
  out.constrained = true;
  out.nf = 2;
  out.dim = N;
  out.coords.resize(2 * N * 3, N);
  for (int idx = 0; idx < N; ++idx) {
    VectorXcd a = VectorXcd::Zero(d);
    VectorXd y = VectorXd::Zero(n), yt = VectorXd::Zero(n);
    if (idx < 2 * d) {
      a(idx / 2) = idx % 2 == 0 ? cplx(1.0) : kI;
    } else {
      const int k = (idx - 2 * d) / 2;
      (idx % 2 == 0 ? y : yt)(k) = 1.0;
    }
    const VectorXcd re_a = a.real().cast<cplx>();
    const VectorXcd k0 = 2.0 * D * re_a + 0.5 * (yt.cast<cplx>() + kI * y.cast<cplx>());
    const VectorXcd X = lu.solve(k0);
    const VectorXcd Y = lu.solve(VectorXcd(-2.0 * D * a.conjugate()));

    AnalyticDisc u(N, 1);
    auto& cf = u.coefficients();
    cf.block(0, 0, n, 1) = X;
    cf.block(0, 1, n, 1) = Y;
    cf.block(n, 0, d, 1) = (4.0 * (Dh * X).real()).cast<cplx>() - 2.0 * Dh * Y;
    cf.block(n, 1, d, 1) = 2.0 * Dh * Y;
    cf.block(n + d, 0, n, 1) = k0.conjugate() - 4.0 * Dc * re_a;
    cf.block(n + d, 1, n, 1) = 2.0 * Dc * a.conjugate();
    cf.block(2 * n + d, 0, d, 1) = a;
    cf.block(2 * n + d, 1, d, 1) = -a.conjugate();
    LiftedDisc lift(n, d, u.times_one_minus_zeta());
    out.cofactors.push_back(u);
    out.coords.col(idx) = realify(lift, out.nf);
    out.elements.push_back(std::move(lift));
  }
  return out;
}

double max_principal_angle(const MatrixXd& X, const MatrixXd& Y) {
  if (X.rows() != Y.rows()) throw Error(ErrorCode::invalid_input, "subspaces live in different spaces");
  if (X.cols() == 0 || Y.cols() == 0) return X.cols() == Y.cols() ? 0.0 : M_PI / 2;
  const MatrixXd Qx = Eigen::HouseholderQR<MatrixXd>(X).householderQ() *
                      MatrixXd::Identity(X.rows(), X.cols());
  const MatrixXd Qy = Eigen::HouseholderQR<MatrixXd>(Y).householderQ() *
                      MatrixXd::Identity(Y.rows(), Y.cols());
  Eigen::JacobiSVD<MatrixXd> svd(Qx.transpose() * Qy);
  const VectorXd s = svd.singularValues();
  double worst = 0.0;
  const Eigen::Index m = std::max(X.cols(), Y.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double si = i < s.size() ? std::min(1.0, s(i)) : 0.0;
    // asin of the complementary sine is accurate for small angles
    worst = std::max(worst, std::asin(std::sqrt(std::max(0.0, 1.0 - si * si))));
  }
  return worst;
}

GramD gram_D(const HermitianPencil& pencil, const VectorXcd& V) {
  if (V.size() != pencil.n()) throw Error(ErrorCode::invalid_input, "V must have length n");
  GramD out;
  out.D2 = witness_matrix(pencil, V);
  out.D1 = out.D2.adjoint();
  out.gram = out.D1 * out.D2;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(out.gram, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues();
  out.min_eigenvalue = ev(0);
  const double top = std::max(ev(ev.size() - 1), 0.0);
  out.positive_definite = top > 0.0 && ev(0) > 1e-12 * top;
  return out;
}

bool check_totally_real_conormal(const HermitianPencil& pencil, const VectorXd& c) {
  const int n = pencil.n();
  const int d = pencil.d();
  if (c.size() != d) throw Error(ErrorCode::invalid_input, "c must have length d");
  ConormalSystem system{DefiningFunction(pencil)};
  VectorXcd point = VectorXcd::Zero(2 * n + 2 * d);
  point.tail(d) = 0.5 * c.cast<cplx>();
  MatrixXcd G;
  system.rows_at(point, 1.0, &G);
  return numeric_rank(G) == 2 * n + 2 * d;
}

}  // namespace statdisc
