#include "sdae/simulator.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace sdae {
namespace {

using testing::example1_system;
using testing::example2_system;
using testing::random_vector;

TEST(SolveHomogeneous, OdeModesStayContinuous) {
  std::mt19937_64 rng(1);
  Matrix a0 = testing::random_matrix(rng, 3, 3, 0.5);
  Matrix a1 = testing::random_matrix(rng, 3, 3, 0.5);
  const Matrix c = testing::random_matrix(rng, 1, 3);
  std::vector<Mode> pool{Mode::autonomous(Matrix::Identity(3, 3), a0, c),
                         Mode::autonomous(Matrix::Identity(3, 3), a1, c)};
  const SwitchedSystem sys =
      SwitchedSystem::periodic(pool, {{0, 0.7}, {1, 0.5}}, 3);
  const Vector x0 = random_vector(rng, 3);
  const SimResult res = solve_homogeneous(sys, x0, 0.0, sys.horizon());
  EXPECT_TRUE(res.x.impulses().empty());
  for (int k = 1; k < sys.interval_count(); ++k) {
    const double t = sys.boundary(k);
    EXPECT_LT((res.x.eval_left(t) - res.x.eval_right(t)).norm(), 1e-10);
  }
  EXPECT_LT((res.x.eval_right(0.0) - x0).norm(), 1e-12);
}

// e3(3^-) = e^{-1} e3(0) + (1 - e^{-1}) e2(0) for the three-state error flow.
TEST(SolveHomogeneous, ErrorPropagationIdentity) {
  const SwitchedSystem sys = example1_system(1);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Vector e0(3);
    e0 << 0.0, random_vector(rng, 1)(0), random_vector(rng, 1)(0);
    const SimResult res = solve_homogeneous(sys, e0, 0.0, 3.0);
    const double expected =
        std::exp(-1.0) * e0(2) + (1.0 - std::exp(-1.0)) * e0(1);
    EXPECT_NEAR(res.x.eval_left(3.0)(2), expected, 1e-9);
  }
}

TEST(SolveHomogeneous, ImpulseCarriesPreSwitchState) {
  const SwitchedSystem sys = example2_system(2);
  Vector x0(4);
  x0 << 0.4, -0.3, 0.8, 1.2;  // x1(0) nonzero on purpose
  const SimResult res = solve_homogeneous(sys, x0, 0.0, sys.horizon());
  // State impulse lives in x2 with magnitude -x1(t^-).
  const ImpulseRecord xi = res.x.impulse_at(1.0);
  ASSERT_FALSE(xi.empty());
  const double x1_left = res.x.eval_left(1.0)(0);
  EXPECT_NEAR(xi.coeffs[0](1), -x1_left, 1e-12);
  EXPECT_NEAR(xi.coeffs[0](0), 0.0, 1e-12);
  EXPECT_NEAR(xi.coeffs[0](2), 0.0, 1e-12);
  EXPECT_NEAR(xi.coeffs[0](3), 0.0, 1e-12);
  // At t = 3 the output impulse reads x3(0) since x1(2^-) = 0.
  const ImpulseRecord yi = res.y.impulse_at(3.0);
  ASSERT_FALSE(yi.empty());
  EXPECT_NEAR(yi.coeffs[0](0), -x0(2), 1e-9);
}

TEST(SolveHomogeneous, EmptyWindowRejected) {
  const SwitchedSystem sys = example1_system(1);
  EXPECT_THROW(solve_homogeneous(sys, Vector::Zero(3), 1.0, 1.0),
               InvalidArgumentError);
}

TEST(SwitchedSystemConstruction, ZeroDurationIntervalsRejected) {
  std::mt19937_64 rng(9);
  std::vector<Mode> pool{Mode::autonomous(
      Matrix::Identity(2, 2), testing::random_matrix(rng, 2, 2),
      testing::random_matrix(rng, 1, 2))};
  EXPECT_THROW(SwitchedSystem(pool, {0, 0}, {0.0, 1.0, 1.0}),
               InvalidArgumentError);
  EXPECT_THROW(SwitchedSystem(pool, {0, 0}, {0.0, 1.0, 0.5}),
               InvalidArgumentError);
  EXPECT_THROW(SwitchedSystem::periodic(pool, {{0, 0.0}}, 2),
               InvalidArgumentError);
}

TEST(SolveWithInput, ZeroInputReducesToHomogeneous) {
  const SwitchedSystem sys = example2_system(1);
  std::mt19937_64 rng(3);
  const Vector x0 = random_vector(rng, 4);
  const SimResult hom = solve_homogeneous(sys, x0, 0.0, sys.horizon());
  // u has width 0; supply an empty-input signal on the same domain.
  const PwsTrajectory u(
      0,
      {Segment::closed_form(0.0, sys.horizon(),
                            {FlowTerm{Matrix::Zero(0, 0), Matrix::Zero(0, 0),
                                      Vector(0), 0.0}})},
      {});
  const SimResult driven = solve_with_input(sys, x0, u, 0.0, sys.horizon(), 1e-3);
  for (double t = 0.0; t < sys.horizon(); t += 0.1)
    EXPECT_LT((driven.x.eval_right(t) - hom.x.eval_right(t)).norm(), 1e-9);
  EXPECT_LT(
      (driven.x.eval_left(sys.horizon()) - hom.x.eval_left(sys.horizon())).norm(),
      1e-9);
}

TEST(SolveWithInput, ConstantInputQuadrature) {
  Matrix e = Matrix::Identity(1, 1), a = Matrix::Zero(1, 1), b(1, 1), c(1, 1),
         d(1, 1);
  b << 1;
  c << 1;
  d << 0;
  std::vector<Mode> pool{Mode(e, a, b, c, d)};
  const SwitchedSystem sys = SwitchedSystem::periodic(pool, {{0, 1.0}}, 1);
  const PwsTrajectory u(
      1,
      {Segment::closed_form(0.0, 1.0,
                            {FlowTerm{Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                      Vector::Ones(1), 0.0}})},
      {});
  Vector x0(1);
  x0 << 0.25;
  const SimResult res = solve_with_input(sys, x0, u, 0.0, 1.0, 1e-3);
  EXPECT_NEAR(res.x.eval_left(1.0)(0), x0(0) + 1.0, 1e-9);
}

TEST(SolveWithInput, ImpulsiveInputRejected) {
  Matrix em = Matrix::Identity(2, 2), am = Matrix::Zero(2, 2), bm(2, 1), cm(1, 2),
         dm(1, 1);
  bm << 1, 0;
  cm << 1, 0;
  dm << 0;
  std::vector<Mode> pool{Mode(em, am, bm, cm, dm)};
  const SwitchedSystem sys2 = SwitchedSystem::periodic(pool, {{0, 1.0}}, 2);
  ImpulseRecord rec = ImpulseRecord::empty_at(1.0, 1);
  rec.coeffs.push_back(Vector::Ones(1));
  const FlowTerm constant{Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                          Vector::Ones(1), 0.0};
  const PwsTrajectory u(1,
                        {Segment::closed_form(0.0, 1.0, {constant}),
                         Segment::closed_form(1.0, 2.0, {constant})},
                        {rec});
  EXPECT_THROW(solve_with_input(sys2, Vector::Zero(2), u, 0.0, 2.0, 1e-3),
               InvalidArgumentError);
}

TEST(BruteForceOracle, AgreesWithClosedFormOnWorkedSystems) {
  for (int which = 0; which < 2; ++which) {
    const SwitchedSystem sys =
        which == 0 ? example1_system(2) : example2_system(3);
    std::mt19937_64 rng(10 + which);
    const Vector x0 = random_vector(rng, sys.n());
    const SimResult exact = solve_homogeneous(sys, x0, 0.0, sys.horizon());
    const SimResult oracle =
        brute_force_oracle(sys, x0, 0.0, sys.horizon(), 1e-3);
    double worst = 0.0;
    for (const auto& seg : oracle.x.segments()) {
      for (double t = seg.begin(); t < seg.end(); t += 7e-3) {
        worst = std::max(worst,
                         (oracle.x.eval_right(t) - exact.x.eval_right(t)).norm());
      }
    }
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(BruteForceOracle, OdeAgainstMatrixExponential) {
  std::mt19937_64 rng(5);
  const Matrix a = testing::random_matrix(rng, 3, 3, 0.5);
  std::vector<Mode> pool{
      Mode::autonomous(Matrix::Identity(3, 3), a, Matrix::Zero(1, 3))};
  const SwitchedSystem sys = SwitchedSystem::periodic(pool, {{0, 2.0}}, 1);
  const Vector x0 = random_vector(rng, 3);
  const SimResult oracle = brute_force_oracle(sys, x0, 0.0, 2.0, 1e-3);
  for (double t : {0.5, 1.0, 1.9}) {
    const Vector expected = expm(a, t) * x0;
    EXPECT_LT((oracle.x.eval_right(t) - expected).norm(), 1e-8);
  }
}

TEST(BruteForceOracle, ZeroInitialStateStaysZero) {
  const SwitchedSystem sys = example2_system(2);
  const SimResult res =
      brute_force_oracle(sys, Vector::Zero(4), 0.0, sys.horizon(), 1e-3);
  for (double t = 0.0; t < sys.horizon(); t += 0.25)
    EXPECT_LT(res.x.eval_right(t).norm(), 1e-14);
  EXPECT_TRUE(res.x.impulses().empty());
  EXPECT_THROW(brute_force_oracle(sys, Vector::Zero(4), 0.0, 1.0, -1.0),
               InvalidArgumentError);
}

TEST(Invariants, StateStaysInConsistencySpace) {
  const SwitchedSystem sys = example2_system(3);
  std::mt19937_64 rng(6);
  const Vector x0 = random_vector(rng, 4);
  const SimResult res = solve_homogeneous(sys, x0, 0.0, sys.horizon());
  for (int k = 0; k < sys.interval_count(); ++k) {
    const auto& dec = sys.mode(k).decomposition();
    for (double frac : {0.25, 0.5, 0.95}) {
      const double t = sys.boundary(k) + frac * sys.duration(k);
      const Vector x = res.x.eval_right(t);
      EXPECT_LT((x - dec.Pi * x).norm(), 1e-9 * std::max(1.0, x.norm()));
    }
  }
}

TEST(Invariants, SemigroupProperty) {
  const SwitchedSystem sys = example2_system(3);
  std::mt19937_64 rng(7);
  const Vector x0 = random_vector(rng, 4);
  const SimResult whole = solve_homogeneous(sys, x0, 0.0, 5.0);
  const SimResult first = solve_homogeneous(sys, x0, 0.0, 2.5);
  const Vector handover = first.x.eval_left(2.5);
  const SimResult second = solve_homogeneous(sys, handover, 2.5, 5.0);
  for (double t = 2.6; t < 5.0; t += 0.2)
    EXPECT_LT((second.x.eval_right(t) - whole.x.eval_right(t)).norm(), 1e-11);
}

TEST(Invariants, LinearityInInitialValue) {
  const SwitchedSystem sys = example2_system(2);
  std::mt19937_64 rng(8);
  const Vector xa = random_vector(rng, 4);
  const Vector xb = random_vector(rng, 4);
  const double al = 0.7, be = -1.3;
  const SimResult ra = solve_homogeneous(sys, xa, 0.0, sys.horizon());
  const SimResult rb = solve_homogeneous(sys, xb, 0.0, sys.horizon());
  const SimResult rc =
      solve_homogeneous(sys, Vector(al * xa + be * xb), 0.0, sys.horizon());
  for (double t = 0.05; t < sys.horizon(); t += 0.3) {
    const Vector combo = al * ra.x.eval_right(t) + be * rb.x.eval_right(t);
    EXPECT_LT((rc.x.eval_right(t) - combo).norm(), 1e-10);
  }
  // Impulse coefficients are linear as well.
  const ImpulseRecord ia = ra.x.impulse_at(1.0);
  const ImpulseRecord ib = rb.x.impulse_at(1.0);
  const ImpulseRecord ic = rc.x.impulse_at(1.0);
  const Vector combo = al * ia.stacked(1) + be * ib.stacked(1);
  EXPECT_LT((ic.stacked(1) - combo).norm(), 1e-10);
}

}  // namespace
}  // namespace sdae
