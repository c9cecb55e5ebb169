#include "doctest.h"
#include "statdisc/analysis.hpp"
#include "statdisc/scenario.hpp"
#include "test_helpers.hpp"

using namespace statdisc;
using namespace statdisc::testing;

namespace {

SolverConfig quadric_config(int nf = 8) {
  SolverConfig c;
  c.nf = nf;
  c.grid = 4 * nf;
  return c;
}

FamilyChart quadric11_chart(double a = 1.0) {
  return FamilyChart::build(DefiningFunction(scalar_pencil(a)), VectorXcd::Ones(1), VectorXd::Ones(1), std::nullopt,
                            quadric_config());
}

VectorXcd point(std::initializer_list<cplx> v) {
  VectorXcd p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (cplx x : v) p(i++) = x;
  return p;
}

}  // namespace

TEST_CASE("center of the initial disc") {
  for (double a : {1.0, 2.5}) {
    const FamilyChart chart = quadric11_chart(a);
    const VectorXcd c0 = center_map(chart, VectorXd::Zero(4));
    CHECK(std::abs(c0(0) - 1.0) < 1e-13);
    CHECK(std::abs(c0(1) - 2.0 * a) < 1e-13);
  }
}

TEST_CASE("rank report") {
  MatrixXd J = MatrixXd::Identity(3, 3);
  J(2, 2) = 1e-9;
  const RankReport r = rank_report(J, 3);
  CHECK(r.rank == 2);
  CHECK_FALSE(r.full);
  CHECK(rank_report(MatrixXd::Identity(3, 3), 3).full);
}

TEST_CASE("center and jet maps have full rank for n = d = 1") {
  const FamilyChart chart = quadric11_chart();
  const RankReport c = center_jacobian(chart);
  CHECK(c.full);
  CHECK(c.rank == 4);
  CHECK(c.singular_values.minCoeff() > 1e-3);
  const RankReport j = jet_jacobian(chart);
  CHECK(j.full);
  CHECK(j.rank == 4);
}

TEST_CASE("center rank follows positivity of the Gram matrix") {
  // A_1 V and A_2 V are parallel for V = e_1: the Gram matrix is singular.
  MatrixXcd a1 = MatrixXcd::Identity(2, 2), a2 = MatrixXcd::Identity(2, 2);
  a2(1, 1) = -1.0;
  const DefiningFunction def(HermitianPencil({a1, a2}));
  VectorXd c(2);
  c << 1.0, 0.5;
  VectorXcd bad(2), good(2);
  bad << 1.0, 0.0;
  good << 1.0, 1.0;
  CHECK_FALSE(gram_D(def.pencil(), bad).positive_definite);
  CHECK(gram_D(def.pencil(), good).positive_definite);

  const RankReport full = center_jacobian(make_analysis_chart(def, good, c, quadric_config()));
  CHECK(full.full);
  const RankReport deficient = center_jacobian(make_analysis_chart(def, bad, c, quadric_config(), 8));
  CHECK_FALSE(deficient.full);
  CHECK(deficient.rank < deficient.expected);
}

TEST_CASE("the C8 example has a rank-deficient center map") {
  const HermitianPencil p = HermitianPencil::c8_example();
  const DefiningFunction def(p);
  std::mt19937_64 rng(11);
  const VectorXcd V = random_cvector(p.n(), rng);
  VectorXd c = VectorXd::Zero(p.d());
  c(0) = 1.0;
  const FamilyChart chart = make_analysis_chart(def, V, c, quadric_config());
  CHECK(chart.is_synthetic());
  const RankReport r = center_jacobian(chart);
  CHECK(r.expected == 16);
  CHECK(r.rank == 14);
  CHECK(r.singular_values(r.rank - 1) / r.singular_values(r.rank) > 1e4);
}

TEST_CASE("jet recovery round trips") {
  const FamilyChart chart = quadric11_chart();
  RecoveryOptions opt;
  opt.restarts = 2;
  CHECK(recover_from_jet(chart, jet_map(chart, VectorXd::Zero(4)), VectorXd::Zero(4), opt).s.norm() < 1e-12);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 4; ++k) {
    VectorXd s = random_rvector(4, rng);
    s *= 0.5 * chart.radius() / s.norm();
    const RecoveryResult r = recover_from_jet(chart, jet_map(chart, s), VectorXd::Zero(4), opt);
    CHECK((r.s - s).norm() < 1e-8);
    CHECK(r.jet_residual < opt.tol);
  }
}

TEST_CASE("dilation of the defining function") {
  const DefiningFunction quad(scalar_pencil(1.0));
  const DefiningFunction cubic(scalar_pencil(1.0), PerturbationPolynomial(1, 1, {Monomial{0, 1.0, {3}, {0}, {0}}}),
                               0.4);
  const VectorXcd z = point({cplx(0.3, -0.2)});
  const VectorXcd w = point({cplx(0.1, 0.7)});
  CHECK((dilate(quad, 0.25).eval_r(z, w) - quad.eval_r(z, w)).norm() < 1e-14);
  CHECK((dilate(cubic, 0.25).eval_r(z, w) - cubic.with_scale(0.1).eval_r(z, w)).norm() < 1e-14);
  CHECK((dilate(dilate(cubic, 0.5), 0.5).eval_r(z, w) - dilate(cubic, 0.25).eval_r(z, w)).norm() < 1e-14);
  CHECK_THROWS_AS(dilate(quad, 0.0), Error);
}

TEST_CASE("polynomial automorphisms") {
  const auto id = PolynomialAutomorphism::identity(1, 1);
  const auto rot = PolynomialAutomorphism::rotation(1, 1, 0.7);
  const auto dil = PolynomialAutomorphism::dilation(1, 1, 1.5);
  const auto cub = PolynomialAutomorphism::identity_plus(1, 1, AutTerm{0, 1.0, {3, 0}}, "cubic");
  const auto quad = PolynomialAutomorphism::identity_plus(1, 1, AutTerm{0, 1.0, {2, 0}}, "quadratic");
  CHECK(id.has_trivial_2jet());
  CHECK(cub.has_trivial_2jet());
  CHECK_FALSE(rot.has_trivial_2jet());
  CHECK_FALSE(dil.has_trivial_2jet());
  CHECK_FALSE(quad.has_trivial_2jet());

  const VectorXcd Z = point({cplx(0.2, 0.1), cplx(-0.3, 0.4)});
  CHECK(std::abs(rot.eval(Z)(0) - std::polar(1.0, 0.7) * Z(0)) < 1e-15);
  CHECK(std::abs(dil.eval(Z)(1) - 2.25 * Z(1)) < 1e-15);
  const VectorXcd conj = cub.conjugated_by_dilation(0.5).eval(Z);
  CHECK(std::abs(conj(0) - (Z(0) + 0.25 * Z(0) * Z(0) * Z(0))) < 1e-15);
  CHECK(std::abs(conj(1) - Z(1)) < 1e-15);
  const double h = 1e-6;
  VectorXcd e = VectorXcd::Zero(2);
  e(0) = h;
  CHECK((cub.jacobian(Z).col(0) - (cub.eval(Z + e) - cub.eval(Z - e)) / (2 * h)).norm() < 1e-8);

  CHECK_THROWS_AS(PolynomialAutomorphism::dilation(1, 1, 0.0), Error);
  CHECK_THROWS_AS(PolynomialAutomorphism(1, 1, {AutTerm{0, 1.0, {0, 0}}}), Error);
}

TEST_CASE("preservation of the quadric") {
  const DefiningFunction def(scalar_pencil(1.0));
  for (const auto& F : automorphism_corpus(1, 1)) {
    const double r = preservation_residual(def, F);
    if (F.name() == "cubic_z" || F.name() == "cubic_w")
      CHECK(r > 1e-4);
    else
      CHECK(r < 1e-12);
  }
}

TEST_CASE("push-forward examples") {
  const FamilyChart chart = quadric11_chart();
  const LiftedDisc f = chart.base().realized();
  const int M = 64;
  const Pushforward same = pushforward(PolynomialAutomorphism::identity(1, 1), f, M);
  CHECK((same.lift.resized(f.nf()).all().coefficients() - f.all().coefficients()).norm() < 1e-13);

  const double theta = 0.7;
  const cplx u = std::polar(1.0, theta);
  const Pushforward rot = pushforward(PolynomialAutomorphism::rotation(1, 1, theta), f, M);
  const int nf = f.nf();
  CHECK((rot.lift.resized(nf).h().coefficients() - u * f.h().coefficients()).norm() < 1e-13);
  CHECK((rot.lift.resized(nf).ht().coefficients() - std::conj(u) * f.ht().coefficients()).norm() < 1e-13);
  CHECK(verify_stationary(DefiningFunction(scalar_pencil(1.0)), rot.lift, 1e-10, M).stationary);

  const Pushforward dil = pushforward(PolynomialAutomorphism::dilation(1, 1, 1.5), f, M);
  const VectorXcd c = dil.lift.all().eval(0.0);
  CHECK(std::abs(c(0) - 1.5) < 1e-13);
  CHECK(std::abs(c(1) - 2.25 * 2.0) < 1e-13);
  CHECK(dil.negative_mode_defect < 1e-13);

  // Jacobian 1 - z^2 / 4 vanishes at z = 2, which the initial disc reaches at zeta = -1.
  const auto sing = PolynomialAutomorphism::identity_plus(1, 1, AutTerm{0, -1.0 / 12.0, {3, 0}}, "singular");
  try {
    pushforward(sing, f, M);
    FAIL("expected singular_jacobian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_jacobian);
  }
}

TEST_CASE("determination experiment on the quadric") {
  const DefiningFunction def(scalar_pencil(1.0));
  ExperimentConfig cfg;
  cfg.grid_points = 3;
  cfg.recovery.restarts = 1;
  const FamilyChart chart = FamilyChart::build(dilate(def, cfg.t_dil), VectorXcd::Ones(1), VectorXd::Ones(1),
                                               std::nullopt, quadric_config());
  const ExperimentReport id = jet_determination_experiment(def, PolynomialAutomorphism::identity(1, 1), chart, cfg);
  CHECK(id.accepted);
  CHECK(id.records.size() == 9);
  CHECK(id.max_fixed_point_defect < 1e-12);
  for (const auto& r : id.records) CHECK(r.status == "ok");

  const auto corpus = automorphism_corpus(1, 1);
  for (const auto& F : corpus) {
    if (F.name() == "identity") continue;
    const ExperimentReport rep = jet_determination_experiment(def, F, chart, cfg);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.records.empty());
    if (F.has_trivial_2jet())
      CHECK(rep.rejection == "not an automorphism");
    else
      CHECK(rep.rejection == "2-jet at 0 is not trivial");
  }
}
