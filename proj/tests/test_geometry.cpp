#include "doctest.h"
#include "statdisc/rh_linear.hpp"
#include "test_helpers.hpp"

using namespace statdisc;
using namespace statdisc::testing;

namespace {
MatrixXcd diag2(double a, double b) {
  MatrixXcd m = MatrixXcd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}
}  // namespace

TEST_CASE("pencil validation") {
  MatrixXcd bad(2, 2);
  bad << 1.0, cplx(0, 1), cplx(0, 1), 1.0;  // symmetric, not Hermitian
  CHECK_THROWS_AS(HermitianPencil({bad}), Error);
  CHECK_THROWS_AS(HermitianPencil({MatrixXcd::Identity(2, 2), MatrixXcd::Identity(3, 3)}), Error);
  CHECK_THROWS_AS(HermitianPencil(std::vector<MatrixXcd>{}), Error);
}

TEST_CASE("linear independence examples") {
  auto r1 = check_linear_independence(HermitianPencil({MatrixXcd::Identity(2, 2)}));
  CHECK(r1.first);
  CHECK(r1.second == 1);
  auto r2 = check_linear_independence(HermitianPencil::c8_example());
  CHECK(r2.first);
  CHECK(r2.second == 4);
  auto r3 = check_linear_independence(HermitianPencil({MatrixXcd::Identity(2, 2), MatrixXcd::Identity(2, 2)}));
  CHECK_FALSE(r3.first);
  CHECK(r3.second == 1);
}

TEST_CASE("common kernel examples") {
  CHECK(common_kernel_dimension(HermitianPencil({MatrixXcd::Identity(3, 3)})) == 0);
  CHECK(common_kernel_dimension(HermitianPencil::c8_example()) == 0);
  CHECK(common_kernel_dimension(HermitianPencil({diag2(1, 0)})) == 1);
}

TEST_CASE("full witness examples") {
  auto v = find_full_witness(HermitianPencil({MatrixXcd::Identity(3, 3)}));
  REQUIRE(v);
  CHECK(v->norm() > 0.0);
  CHECK_FALSE(find_full_witness(HermitianPencil::c8_example(), 256));
  const HermitianPencil p({diag2(1, 0), diag2(0, 1)});
  CHECK(find_full_witness(p));
  VectorXcd ones(2);
  ones << 1.0, 1.0;
  CHECK(numeric_rank(witness_matrix(p, ones)) == 2);
}

TEST_CASE("invertible combination examples") {
  auto c1 = find_invertible_combination(HermitianPencil({MatrixXcd::Identity(2, 2)}));
  REQUIRE(c1);
  const HermitianPencil c8 = HermitianPencil::c8_example();
  auto c2 = find_invertible_combination(c8);
  REQUIRE(c2);
  CHECK(std::abs(c8.combination(*c2).determinant()) > 1e-8);
  VectorXd e0 = VectorXd::Zero(4);
  e0(0) = 1.0;
  CHECK(std::abs(c8.combination(e0).determinant() - 1.0) < 1e-14);
  MatrixXcd off = MatrixXcd::Zero(2, 2);
  off(0, 1) = off(1, 0) = 1.0;
  const HermitianPencil p({diag2(1, 0), off});
  CHECK(find_invertible_combination(p));
  VectorXd c11 = VectorXd::Ones(2);
  CHECK(std::abs(p.combination(c11).determinant() - cplx(-1.0)) < 1e-14);
}

TEST_CASE("exact decision of (t) for small pencils") {
  CHECK(decide_invertible_combination_exact(HermitianPencil({diag2(1, 0), diag2(0, 1)})).value());
  CHECK_FALSE(decide_invertible_combination_exact(HermitianPencil({diag2(1, 0), diag2(2, 0)})).value());
  CHECK_FALSE(decide_invertible_combination_exact(HermitianPencil::c8_example()).has_value());
}

TEST_CASE("totally real conormal examples") {
  CHECK(check_totally_real_conormal(scalar_pencil(1.0), VectorXd::Ones(1)));
  CHECK_FALSE(check_totally_real_conormal(scalar_pencil(0.0), VectorXd::Ones(1)));
  VectorXd c(2);
  c << 0.0, 1.0;
  CHECK(check_totally_real_conormal(HermitianPencil({diag2(1, -1), diag2(1, 1)}), c));
}

TEST_CASE("defining function examples") {
  const DefiningFunction q(scalar_pencil(1.0));
  VectorXcd z(1), w(1);
  z << 0.0;
  w << 0.0;
  CHECK(q.eval_r(z, w)(0) == 0.0);
  const MatrixXcd g0 = q.eval_grad_r(z, w);
  CHECK(g0(0, 0) == cplx(0.0));
  CHECK(g0(0, 1) == cplx(0.5));
  z << 1.0;
  w << 2.0;
  CHECK(q.eval_r(z, w)(0) == doctest::Approx(1.0));
  Monomial m{0, 1.0, {3}, {0}, {0}};
  const DefiningFunction cubic(scalar_pencil(1.0), PerturbationPolynomial(1, 1, {m}), 1.0);
  w << 1.0;
  CHECK(cubic.eval_r(z, w)(0) == doctest::Approx(1.0));
}

TEST_CASE("perturbation terms need weighted degree at least three") {
  Monomial low{0, 1.0, {2}, {0}, {0}};
  CHECK_THROWS_AS(PerturbationPolynomial(1, 1, {low}), Error);
  Monomial mixed{0, 1.0, {1}, {0}, {1}};
  CHECK(mixed.weighted_degree() == 3);
  CHECK_NOTHROW(PerturbationPolynomial(1, 1, {mixed}));
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937_64 rng(11);
  const HermitianPencil p = random_pencil(2, 2, rng);
  std::vector<Monomial> terms{{0, 0.7, {1, 0}, {0, 2}, {0, 0}}, {1, -0.4, {0, 1}, {0, 0}, {1, 0}},
                              {1, 0.3, {2, 1}, {0, 0}, {0, 0}}};
  const DefiningFunction def(p, PerturbationPolynomial(2, 2, terms), 0.5);
  const VectorXcd z = random_cvector(2, rng) * 0.3, w = random_cvector(2, rng) * 0.3;
  const auto jet = def.local_jet(z, w, true);
  const double h = 1e-6;
  for (int a = 0; a < 4; ++a) {
    for (int part = 0; part < 2; ++part) {
      VectorXcd Z(4);
      Z << z, w;
      const cplx dir = part == 0 ? cplx(1, 0) : cplx(0, 1);
      VectorXcd Zp = Z, Zm = Z;
      Zp(a) += h * dir;
      Zm(a) -= h * dir;
      const VectorXd fd = (def.eval_r(Zp.head(2), Zp.tail(2)) - def.eval_r(Zm.head(2), Zm.tail(2))) / (2 * h);
      for (int j = 0; j < 2; ++j) {
        // d/dx = dz + dzbar, d/dy = i (dz - dzbar)
        const cplx expected = dir * jet.dz(j, a) + std::conj(dir) * jet.dzbar(j, a);
        CHECK(std::abs(fd(j) - expected.real()) < 1e-7);
      }
    }
  }
}

TEST_CASE("randomized properties of the non-degeneracy tests") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const int d = 1 + (trial / 4) % 4;
    const HermitianPencil p = random_pencil(n, d, rng);
    const NonDegeneracyReport r = analyze_nondegeneracy(p, 16, 100 + trial);
    if (r.cond_f) {
      CHECK(r.cond_a);
      CHECK(d <= n);
      CHECK(numeric_rank(witness_matrix(p, *r.full_witness)) == d);
    }
    if (d > n) CHECK_FALSE(r.cond_f);
    if (r.cond_t) CHECK(std::abs(p.combination(*r.invertible_combination).determinant()) > 1e-12);
    CHECK(r.beloshapka == (r.cond_a && r.cond_b));
    CHECK(r.fully == (r.cond_f && r.cond_t));

    const VectorXcd z = random_cvector(n, rng), w = random_cvector(d, rng);
    CHECK(DefiningFunction(p).eval_r(z, w).allFinite());

    const VectorXd c = random_rvector(d, rng);
    const bool invertible = numeric_rank(p.combination(c)) == n;
    CHECK(check_totally_real_conormal(p, c) == invertible);
  }
}

TEST_CASE("the C8 example is Beloshapka but not fully non-degenerate") {
  const NonDegeneracyReport r = analyze_nondegeneracy(HermitianPencil::c8_example());
  CHECK(r.beloshapka);
  CHECK_FALSE(r.fully);
  CHECK_FALSE(r.cond_f);
  CHECK(r.cond_t);
}

TEST_CASE("Hermitian form is real") {
  std::mt19937_64 rng(8);
  const HermitianPencil p = random_pencil(3, 2, rng);
  for (int k = 0; k < 20; ++k) {
    const VectorXcd z = random_cvector(3, rng);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(z.dot(p[j] * z).imag()) < 1e-12 * (1 + z.squaredNorm()));
  }
}
