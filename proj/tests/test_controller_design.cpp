#include <doctest.h>

#include <cmath>
#include <random>

#include "afc/controller_design.hpp"
#include "afc/errors.hpp"
#include "afc/fixtures.hpp"
#include "support.hpp"

using namespace afc;
using afc::test::max_real_eigenvalue;
using afc::test::sym_eigs;

namespace {

PlantModel case1_plant() { return fixture("case1-nominal").plant; }
PlantModel case2_plant() { return fixture("case2-nominal").plant; }

double riccati_residual(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P) {
  return (P * A + A.transpose() * P - P * B * B.transpose() * P + R).norm();
}

}  // namespace

TEST_SUITE("controller_design") {

TEST_CASE("published gains for the ten-agent plant") {
  const PlantModel plant = case1_plant();
  const StateFeedbackDesign d = design_state_feedback(plant, Matrix::Identity(3, 3));
  Matrix p(3, 3), k(3, 3);
  p << 2.20, 0.57, -0.35, 0.56, 1.98, -0.94, -0.35, -0.94, 1.52;
  k << 0.21, 1.04, 0.58, -1.85, 0.39, -1.18, 0.35, 0.94, -1.52;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      if ((i == 0 && j == 1) || (i == 1 && j == 0)) {
        CHECK(std::min(std::abs(d.P(i, j) - 0.57), std::abs(d.P(i, j) - 0.56)) <= 0.02);
      } else {
        CHECK(std::abs(d.P(i, j) - p(i, j)) <= 0.02);
      }
      CHECK(std::abs(d.K(i, j) - k(i, j)) <= 0.02);
    }
  }
  CHECK(riccati_residual(plant.A, plant.B, Matrix::Identity(3, 3), d.P) <= 1e-8);
  CHECK((d.P - d.P.transpose()).norm() <= 1e-10);
  CHECK((d.K + plant.B.transpose() * d.P).norm() < 1e-12);
  CHECK(max_real_eigenvalue(plant.A + plant.B * d.K) < 0);
}

TEST_CASE("scalar closed forms") {
  const Matrix I3 = Matrix::Identity(3, 3);
  const Matrix P = solve_care(-I3, I3, I3);
  CHECK((P - (std::sqrt(2.0) - 1) * I3).cwiseAbs().maxCoeff() < 1e-12);

  const Matrix one = Matrix::Ones(1, 1);
  CHECK(solve_care(Matrix::Zero(1, 1), one, one)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("already stable plant stays stable") {
  Matrix A(2, 2);
  A << -1, 2, 0, -3;
  const PlantModel plant{A, Matrix::Identity(2, 2), Matrix()};
  const StateFeedbackDesign d = design_state_feedback(plant, Matrix::Identity(2, 2));
  CHECK(max_real_eigenvalue(A + d.K) < 0);
}

TEST_CASE("random stabilizable plant gets a Hurwitz closed loop") {
  std::mt19937_64 rng(42);
  const Matrix A = afc::test::random_matrix(rng, 4, 4, -2, 2);
  const Matrix B = afc::test::random_matrix(rng, 4, 2, -1, 1);
  REQUIRE(is_stabilizable(A, B));
  const StateFeedbackDesign d = design_state_feedback({A, B, Matrix()}, Matrix::Identity(4, 4));
  CHECK(max_real_eigenvalue(A + B * d.K) < 0);
  CHECK(riccati_residual(A, B, Matrix::Identity(4, 4), d.P) <= 1e-8);
}

TEST_CASE("uncontrollable unstable mode is reported") {
  Matrix A(2, 2);
  A << 1, 0, 0, -1;
  Matrix B(2, 1);
  B << 0, 1;
  // PBH at the unstable eigenvalue: [A - I, B] has a zero first row.
  Matrix pbh(2, 3);
  pbh << A - Matrix::Identity(2, 2), B;
  CHECK(afc::test::svd_rank(pbh, 1e-12) < 2);
  CHECK_FALSE(is_stabilizable(A, B));
  CHECK_THROWS_AS(solve_care(A, B, Matrix::Identity(2, 2)), NotStabilizable);
  CHECK_THROWS_AS(design_state_feedback({A, B, Matrix()}, Matrix::Identity(2, 2)), NotStabilizable);
}

TEST_CASE("state weight must be positive definite") {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  Matrix B(2, 1);
  B << 0, 1;
  CHECK_THROWS_AS(solve_care(A, B, Matrix::Zero(2, 2)), DimensionMismatch);
}

TEST_CASE("observer for the planar double integrator") {
  const PlantModel plant = case2_plant();
  const Matrix R2 = Matrix::Identity(4, 4);
  const ObserverDesign o = design_observer(plant, R2, 1.0);
  CHECK(sym_eigs(o.Q)(0) > 0);
  const Matrix& A = plant.A;
  const Matrix& C = plant.C;
  CHECK((o.Q * A.transpose() + A * o.Q - o.Q * C.transpose() * C * o.Q + R2).norm() <= 1e-8);
  CHECK((o.F + o.Q * C.transpose()).norm() < 1e-12);
  CHECK(max_real_eigenvalue(A + o.F * C) < 0);
  CHECK(o.warnings.empty());
}

TEST_CASE("observer closed forms") {
  const Matrix I2 = Matrix::Identity(2, 2);
  const ObserverDesign o = design_observer({-I2, I2, I2}, I2, 1.0);
  const double q = std::sqrt(2.0) - 1;
  CHECK((o.Q - q * I2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((o.F + q * I2).cwiseAbs().maxCoeff() < 1e-12);

  Matrix A(3, 3);
  A << -1, 4, 0, 0, -2, 1, 0, 0, -0.5;
  Matrix C(3, 3);
  C << 1, 2, 0, 0, 1, 0, 1, 0, 3;
  const ObserverDesign o2 = design_observer({A, Matrix::Identity(3, 3), C}, Matrix::Identity(3, 3), 1.0);
  CHECK(max_real_eigenvalue(A + o2.F * C) < 0);
}

TEST_CASE("undetectable pair and weak state weight") {
  Matrix A(2, 2);
  A << 1, 0, 0, -1;
  Matrix C(1, 2);
  C << 0, 1;
  CHECK_FALSE(is_detectable(A, C));
  CHECK_THROWS_AS(design_observer({A, Matrix::Identity(2, 2), C}, Matrix::Identity(2, 2), 1.0), NotDetectable);

  const ObserverDesign o = design_observer(case2_plant(), Matrix::Identity(4, 4), 0.5);
  CHECK_FALSE(o.warnings.empty());
}

TEST_CASE("plant shape and rank checks") {
  PlantModel bad{Matrix::Identity(3, 3), Matrix::Ones(3, 2), Matrix()};
  CHECK_THROWS_AS(bad.validate(), DimensionMismatch);
  PlantModel ragged{Matrix::Identity(3, 3), Matrix::Ones(2, 1), Matrix()};
  CHECK_THROWS_AS(ragged.validate(), DimensionMismatch);
  CHECK_NOTHROW(case1_plant().validate());
  CHECK_NOTHROW(case2_plant().validate());
}

TEST_CASE("compensation with an invertible input matrix") {
  const PlantModel plant = case1_plant();
  const StateFeedbackDesign d = design_state_feedback(plant, Matrix::Identity(3, 3));
  const Matrix targets = case1_formation().positions().topRows(4);
  const Compensation c = compensation_terms(plant, d.K, targets);
  CHECK(c.mode == CompensationMode::FullRowRank);
  const Matrix closed = plant.A + plant.B * d.K;
  for (int i = 0; i < 4; ++i) {
    const Vector p = targets.row(i).transpose();
    const Vector expect = -plant.B.inverse() * closed * p;
    CHECK((c.v.row(i).transpose() - expect).norm() < 1e-10);
    CHECK((closed * p + plant.B * c.v.row(i).transpose()).norm() <= 1e-10);
  }
}

TEST_CASE("compensation with a tall input matrix") {
  const PlantModel plant = case2_plant();
  const StateFeedbackDesign d = design_state_feedback(plant, Matrix::Identity(4, 4));
  Matrix targets(3, 4);
  targets << -1, 0, 1, 0, -1, 0, -1, 0, 0, 0, -1, 0;
  const Compensation c = compensation_terms(plant, d.K, targets);
  CHECK(c.mode == CompensationMode::FullColumnRank);
  const Matrix closed = plant.A + plant.B * d.K;
  Matrix u1(2, 4);
  u1 << 0, 1, 0, 0, 0, 0, 0, 1;
  for (int i = 0; i < 3; ++i) {
    const Vector p = targets.row(i).transpose();
    CHECK((c.v.row(i).transpose() + u1 * closed * p).norm() < 1e-10);
    CHECK((closed * p + plant.B * c.v.row(i).transpose()).norm() <= 1e-8);
    CHECK(c.residuals[i] < 1e-12);
  }

  targets(1, 1) = 0.3;
  targets(1, 3) = -0.4;
  const Compensation bad = assess_compensation(plant, d.K, targets);
  CHECK(bad.mode == CompensationMode::Infeasible);
  try {
    compensation_terms(plant, d.K, targets);
    FAIL("expected InfeasibleTarget");
  } catch (const InfeasibleTarget& e) {
    REQUIRE(e.offenders().size() == 1);
    CHECK(e.offenders()[0].first == 1);
    // U2 A p* picks out the two velocity slots.
    CHECK(e.offenders()[0].second == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("full controller design bundles every piece") {
  const PlantModel plant = case2_plant();
  Matrix targets(3, 4);
  targets << -1, 0, 1, 0, -1, 0, -1, 0, 0, 0, -1, 0;
  const ControllerDesign d =
      design_controller(plant, Matrix::Identity(4, 4), Matrix::Identity(4, 4), targets);
  REQUIRE(d.Q.has_value());
  REQUIRE(d.F.has_value());
  CHECK(d.mode == CompensationMode::FullColumnRank);
  CHECK((d.gain_gram() - d.P * plant.B * plant.B.transpose() * d.P).norm() < 1e-12);
  CHECK(compensation_mode_from_string(to_string(d.mode)) == d.mode);

  const ControllerDesign s = design_controller(case1_plant(), Matrix::Identity(3, 3), std::nullopt,
                                               case1_formation().positions().topRows(4));
  CHECK_FALSE(s.Q.has_value());
}

}
