#include "doctest.h"
#include "statdisc/conormal.hpp"
#include "test_helpers.hpp"

using namespace statdisc;
using namespace statdisc::testing;

namespace {

// The quadric system written out term by term, independent of the elimination code.
VectorXd quadric_rows_transcribed(const HermitianPencil& p, const VectorXcd& pt, cplx zeta) {
  const int n = p.n(), d = p.d();
  const VectorXcd z = pt.head(n), w = pt.segment(n, d), zt = pt.segment(n + d, n), wt = pt.tail(d);
  VectorXd rows(2 * n + 2 * d);
  for (int j = 0; j < d; ++j) rows(j) = ((w(j) + std::conj(w(j))) / 2.0 - z.dot(p[j] * z)).real();
  for (int l = 0; l < n; ++l) {
    cplx a = zt(l);
    for (int j = 0; j < d; ++j) a += 2.0 * wt(j) * z.dot(p[j].col(l));  // 2 conj(z)^T w~_j (A_j)_l
    rows(d + l) = (a + std::conj(a)).real();
    rows(d + n + l) = (kI * a - kI * std::conj(a)).real();
  }
  for (int j = 0; j < d; ++j) rows(d + 2 * n + j) = (kI * wt(j) / zeta - kI * zeta * std::conj(wt(j))).real();
  return rows;
}

DefiningFunction perturbed(const HermitianPencil& p, double t) {
  const int n = p.n(), d = p.d();
  std::vector<Monomial> terms;
  for (int j = 0; j < d; ++j) {
    Monomial m;
    m.component = j;
    m.coefficient = 0.8 - 0.3 * j;
    m.re_z.assign(n, 0);
    m.im_z.assign(n, 0);
    m.im_w.assign(d, 0);
    m.re_z[0] = 2;
    m.im_w[static_cast<std::size_t>(d - 1 - j)] = 1;
    terms.push_back(m);
    Monomial c3 = m;
    c3.re_z[0] = 0;
    c3.im_w[static_cast<std::size_t>(d - 1 - j)] = 0;
    c3.im_z[static_cast<std::size_t>(n - 1)] = 3;
    c3.coefficient = 0.5;
    terms.push_back(c3);
  }
  return DefiningFunction(p, PerturbationPolynomial(n, d, terms), t);
}

}  // namespace

TEST_CASE("explicit quadric lift for n = d = 1") {
  VectorXcd V(1), W(1);
  V << 1.0;
  W << -1.0;
  const VectorXd c = VectorXd::Ones(1);
  const LiftedDisc f = build_quadric_lift(scalar_pencil(1.0), V, W, c, VectorXd::Zero(1));
  const MatrixXcd& C = f.all().coefficients();
  CHECK(C(0, 0) == cplx(1.0));
  CHECK(C(0, 1) == cplx(-1.0));
  CHECK(C(1, 0) == cplx(2.0));
  CHECK(C(1, 1) == cplx(-2.0));
  CHECK(C(2, 0) == cplx(1.0));
  CHECK(C(2, 1) == cplx(-1.0));
  CHECK(C(3, 0) == cplx(0.0));
  CHECK(C(3, 1) == cplx(0.5));
  const VectorXcd grid = unit_grid(64);
  for (int k = 0; k < 64; ++k) {
    const VectorXcd v = f.all().eval(grid(k));
    CHECK(std::abs(v(1).real() - std::norm(v(0))) < 1e-14);
  }
  VectorXd y(1);
  y << 1.0;
  const LiftedDisc fy = build_quadric_lift(scalar_pencil(1.0), V, W, c, y);
  CHECK(fy.all().coefficients()(1, 0) == cplx(2.0, 1.0));
  CHECK(verify_stationary(DefiningFunction(scalar_pencil(1.0)), fy, 1e-12, 64).stationary);
}

TEST_CASE("explicit quadric lift with vanishing cross term") {
  VectorXcd V(2), W(2);
  V << 1.0, 0.0;
  W << 0.0, 1.0;
  const HermitianPencil p({MatrixXcd::Identity(2, 2)});
  const LiftedDisc f = build_quadric_lift(p, V, W, VectorXd::Ones(1), VectorXd::Zero(1));
  CHECK(f.g().coefficients()(0, 0) == cplx(2.0));
  CHECK(std::abs(f.g().coefficients()(0, 1)) == 0.0);
}

TEST_CASE("initial lift examples") {
  const ConstrainedLift f0 = build_initial_lift(scalar_pencil(1.0), VectorXcd::Ones(1), VectorXd::Ones(1));
  const MatrixXcd C = f0.realized().all().coefficients();
  const cplx expected[4][3] = {{1.0, -1.0, 0.0}, {2.0, -2.0, 0.0}, {1.0, -1.0, 0.0}, {0.0, 0.5, 0.0}};
  for (int a = 0; a < 4; ++a)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(C(a, j) - expected[a][j]) < 1e-15);
  CHECK_THROWS_AS(build_initial_lift(scalar_pencil(1.0), VectorXcd::Zero(1), VectorXd::Ones(1)), Error);
  CHECK_THROWS_AS(build_quadric_lift(scalar_pencil(1.0), VectorXcd::Ones(1), VectorXcd::Zero(1),
                                     VectorXd::Ones(1), VectorXd::Zero(1)),
                  Error);
  CHECK_THROWS_AS(build_initial_lift(scalar_pencil(0.0), VectorXcd::Ones(1), VectorXd::Ones(1)), Error);
}

TEST_CASE("initial lift is the quadric lift with W = -V") {
  std::mt19937_64 rng(3);
  const HermitianPencil p = random_pencil(3, 2, rng);
  const VectorXcd V = random_cvector(3, rng);
  const VectorXd c = random_rvector(2, rng);
  const LiftedDisc a = build_initial_lift(p, V, c).realized();
  const LiftedDisc b = build_quadric_lift(p, V, -V, c, VectorXd::Zero(2));
  const int nf = std::max(a.nf(), b.nf());
  CHECK((a.resized(nf).all().coefficients() - b.resized(nf).all().coefficients()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("quadric lifts satisfy the boundary identities") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3, d = 1 + trial % 2;
    const HermitianPencil p = random_pencil(n, d, rng);
    const VectorXcd V = random_cvector(n, rng), W = random_cvector(n, rng);
    const VectorXd c = random_rvector(d, rng), y = random_rvector(d, rng);
    const LiftedDisc f = build_quadric_lift(p, V, W, c, y);
    const MatrixXcd A = p.combination(c);
    const VectorXcd grid = unit_grid(32);
    for (int k = 0; k < 32; ++k) {
      const VectorXcd h = f.h().eval(grid(k)), g = f.g().eval(grid(k)), ht = f.ht().eval(grid(k));
      for (int j = 0; j < d; ++j) CHECK(std::abs(g(j).real() - h.dot(p[j] * h).real()) < 1e-12);
      const VectorXcd formula = -grid(k) * (A.transpose() * h.conjugate());
      CHECK((ht - formula).norm() < 1e-12);
    }
    const StationaryReport r = verify_stationary(DefiningFunction(p), f, 1e-11, 64);
    CHECK(r.stationary);
    for (int j = 0; j < d; ++j) CHECK((r.c_of_zeta.row(j).array() - c(j)).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("elimination rows match the transcribed quadric system") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 3, d = 1 + trial % 2;
    const HermitianPencil p = random_pencil(n, d, rng);
    const ConormalSystem sys{DefiningFunction(p)};
    const VectorXcd grid = unit_grid(16);
    for (int k = 0; k < 16; ++k) {
      const VectorXcd pt = random_cvector(2 * n + 2 * d, rng);
      const VectorXd mine = sys.rows_at(pt, grid(k));
      const VectorXd ref = quadric_rows_transcribed(p, pt, grid(k));
      CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + ref.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("residual examples") {
  const HermitianPencil p = scalar_pencil(1.0);
  const ConormalSystem sys{DefiningFunction(p)};
  const LiftedDisc f0 = build_initial_lift(p, VectorXcd::Ones(1), VectorXd::Ones(1)).realized();
  CHECK(eval_conormal(sys, f0, 64).cwiseAbs().maxCoeff() < 1e-12);

  // g~ = zeta^2 c / 2: attachment still holds, the multiplier rows do not.
  MatrixXcd C = f0.resized(3).all().coefficients();
  C(3, 1) = 0.0;
  C(3, 2) = 0.5;
  const MatrixXd bad = eval_conormal(sys, LiftedDisc(1, 1, AnalyticDisc(C)), 64);
  CHECK(bad.row(3).cwiseAbs().maxCoeff() > 0.4);
  CHECK(bad.row(0).cwiseAbs().maxCoeff() < 1e-12);

  const LiftedDisc zero(1, 1, AnalyticDisc(4, 2));
  CHECK(eval_conormal(sys, zero, 64).cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(verify_stationary(DefiningFunction(p), zero, 1e-10, 64).nonvanishing);
}

TEST_CASE("tampered cotangent component is detected") {
  const HermitianPencil p = scalar_pencil(1.0);
  const LiftedDisc f0 = build_initial_lift(p, VectorXcd::Ones(1), VectorXd::Ones(1)).realized();
  MatrixXcd S = f0.all().boundary(64);
  const VectorXcd grid = unit_grid(64);
  for (int k = 0; k < 64; ++k) S(2, k) *= std::conj(grid(k));
  const StationaryReport r = verify_stationary_samples(DefiningFunction(p), S, 1e-10);
  CHECK(r.lift_defect > 0.1);
  CHECK_FALSE(r.stationary);
}

TEST_CASE("degenerate elimination is reported") {
  // d = 2 with M_w = [[1/2, -i x/2], [i x/2, 1/2]], singular at x = 1.
  Monomial a{0, 1.0, {1}, {0}, {0, 1}};
  Monomial b{1, -1.0, {1}, {0}, {1, 0}};
  const HermitianPencil p({MatrixXcd::Identity(1, 1), MatrixXcd::Identity(1, 1) * 2.0});
  const ConormalSystem sys{DefiningFunction(p, PerturbationPolynomial(1, 2, {a, b}), 1.0)};
  VectorXcd pt = VectorXcd::Zero(6);
  pt(0) = 1.0;
  try {
    sys.rows_at(pt, 1.0);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_elimination);
  }
}

TEST_CASE("analytic G matches finite differences for a perturbed surface") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 1 + trial % 2, d = 1 + trial / 2;
    const HermitianPencil p = random_pencil(n, d, rng);
    const ConormalSystem sys{perturbed(p, 0.3)};
    const int N = 2 * n + 2 * d;
    const cplx zeta = std::polar(1.0, 0.4 + trial);
    const VectorXcd pt = 0.4 * random_cvector(N, rng);
    MatrixXcd G;
    sys.rows_at(pt, zeta, &G);
    const double h = 1e-6;
    for (int a = 0; a < N; ++a) {
      for (cplx dir : {cplx(1, 0), cplx(0, 1)}) {
        VectorXcd delta = VectorXcd::Zero(N);
        delta(a) = dir;
        const VectorXd fd = (sys.rows_at(pt + h * delta, zeta) - sys.rows_at(pt - h * delta, zeta)) / (2 * h);
        const VectorXd lin = 2.0 * (G.conjugate() * delta).real();
        CHECK((fd - lin).cwiseAbs().maxCoeff() < 1e-6);
      }
    }
  }
}

TEST_CASE("recovered multipliers have Fourier support in {-1, 0, 1}") {
  std::mt19937_64 rng(7);
  const HermitianPencil p = random_pencil(2, 1, rng);
  const VectorXcd V = random_cvector(2, rng), W = random_cvector(2, rng);
  const LiftedDisc f = build_quadric_lift(p, V, W, VectorXd::Ones(1), VectorXd::Zero(1));
  const StationaryReport r = verify_stationary(DefiningFunction(p), f, 1e-11, 64);
  const MatrixXcd coeffs = dft(r.c_of_zeta.cast<cplx>());
  for (int k = 2; k < 63; ++k) CHECK(std::abs(coeffs(0, k)) < 1e-12);
}
