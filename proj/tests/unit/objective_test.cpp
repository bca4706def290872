#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ledcma/objective.hpp"
#include "test_support.hpp"

namespace ledcma {
namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

TEST(IntrinsicFunction, OptimaAreZero) {
  EXPECT_DOUBLE_EQ(make_intrinsic(1, 4)(Vector::Zero(4)), 0.0);
  EXPECT_DOUBLE_EQ(make_intrinsic(5, 4)(Vector::Ones(4)), 0.0);
  EXPECT_NEAR(make_intrinsic(4, 4)(Vector::Zero(4)), 0.0, 1e-15);
  EXPECT_NEAR(make_intrinsic(8, 4)(Vector::Zero(4)), 0.0, 1e-15);
  for (int id : {2, 3, 6, 7, 9}) EXPECT_DOUBLE_EQ(make_intrinsic(id, 4)(Vector::Zero(4)), 0.0) << "f" << id;
}

TEST(IntrinsicFunction, HandEvaluatedValues) {
  EXPECT_DOUBLE_EQ(make_intrinsic(2, 2)(vec({1.0, 1.0})), 1000001.0);
  EXPECT_NEAR(make_intrinsic(6, 2)(vec({1.0, -1.0})), 10010.0, 1e-9);
  EXPECT_DOUBLE_EQ(make_intrinsic(7, 2)(vec({2.0, 3.0})), 304.0);
}

TEST(IntrinsicFunction, DifferentPowersAndRastriginAtSimplePoints) {
  // sqrt(|1|^2 + |1|^6) = sqrt(2)
  EXPECT_DOUBLE_EQ(make_intrinsic(3, 2)(vec({1.0, 1.0})), std::sqrt(2.0));
  // integer points: cos(2 pi k) = 1
  EXPECT_NEAR(make_intrinsic(9, 3)(vec({1.0, -2.0, 0.0})), 5.0, 1e-12);
}

TEST(IntrinsicFunction, AllFunctionsNonNegativeOnRandomPoints) {
  RngStream rng(3);
  for (int id = 1; id <= 9; ++id) {
    const IntrinsicFunction f = make_intrinsic(id, 6);
    for (int k = 0; k < 200; ++k) EXPECT_GE(f(rng.uniform_vector(6, -5.0, 5.0)), -1e-12) << "f" << id;
  }
}

TEST(IntrinsicFunction, RejectsInvalidConfiguration) {
  EXPECT_THROW(make_intrinsic(0, 2), ConfigError);
  EXPECT_THROW(make_intrinsic(10, 2), ConfigError);
  EXPECT_THROW(make_intrinsic(2, 1), ConfigError);
  EXPECT_THROW(make_intrinsic(6, 1), ConfigError);
  EXPECT_NO_THROW(make_intrinsic(1, 1));
  EXPECT_NO_THROW(make_intrinsic(9, 1));
}

TEST(RandomRotation, OneDimensionalIsIdentity) {
  RngStream rng(1);
  EXPECT_EQ(random_rotation(1, rng), Matrix::Identity(1, 1));
}

TEST(RandomRotation, IsProperOrthogonal) {
  RngStream rng(2);
  for (int n : {2, 5, 17}) {
    const Matrix r = random_rotation(n, rng);
    EXPECT_LT(testing::max_abs(r * r.transpose() - Matrix::Identity(n, n)), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-10);
  }
}

TEST(RandomRotation, DifferentSeedsGiveDifferentMatrices) {
  RngStream a(1), b(2);
  EXPECT_GT((random_rotation(3, a) - random_rotation(3, b)).norm(), 0.0);
}

TEST(RandomRotation, FirstColumnIsUniformOnTheSphere) {
  // Haar measure: E[q_11^2] = 1/n for every entry.
  RngStream rng(8);
  const int n = 4, draws = 20000;
  double sum = 0.0;
  for (int k = 0; k < draws; ++k) {
    const Matrix q = random_rotation(n, rng);
    sum += q(0, 0) * q(0, 0);
  }
  EXPECT_NEAR(sum / draws, 1.0 / n, 0.01);
}

TEST(LedProblem, RedundantCoordinatesAreIgnored) {
  RngStream rng(1);
  LedProblem p = led_wrap(make_intrinsic(1, 2), 3, rng, 100, true);
  EXPECT_DOUBLE_EQ(p.value(vec({1.0, 2.0, 5.0})), 5.0);
}

TEST(LedProblem, MovingAlongRotatedRedundantAxisKeepsValue) {
  RngStream rng(4);
  LedProblem p = led_wrap(make_intrinsic(5, 3), 7, rng, 100);
  const Vector x = rng.uniform_vector(7, -5.0, 5.0);
  for (int k = 3; k < 7; ++k) {
    Vector e = Vector::Zero(7);
    e(k) = 2.5;
    const Vector shifted = x + p.rotation().transpose() * e;
    EXPECT_NEAR(p.value(shifted), p.value(x), 1e-9 * (1.0 + p.value(x)));
  }
}

TEST(LedProblem, FortyFiveDegreeRotation) {
  Matrix r(2, 2);
  const double c = 1.0 / std::sqrt(2.0);
  r << c, c, -c, c;
  LedProblem p(make_intrinsic(1, 1), r, 10);
  EXPECT_NEAR(p.value(vec({1.0, 1.0})), 2.0, 1e-14);
}

TEST(LedProblem, CountsEvaluationsAndTracksBest) {
  RngStream rng(1);
  LedProblem p = led_wrap(make_intrinsic(1, 1), 1, rng, 10, true);
  p.evaluate(vec({std::sqrt(3.0)}));
  EXPECT_EQ(p.eval_count(), 1);
  p.evaluate(vec({1.0}));
  const double again = p.evaluate(vec({1.0}));
  EXPECT_DOUBLE_EQ(again, p.value(vec({1.0})));
  p.evaluate(vec({std::sqrt(2.0)}));
  EXPECT_EQ(p.eval_count(), 4);
  EXPECT_DOUBLE_EQ(p.best_f(), 1.0);
}

TEST(LedProblem, BudgetIsNeverExceeded) {
  RngStream rng(1);
  LedProblem p = led_wrap(make_intrinsic(1, 2), 2, rng, 3, true);
  for (int i = 0; i < 3; ++i) p.evaluate(Vector::Ones(2));
  EXPECT_THROW(p.evaluate(Vector::Ones(2)), BudgetExhausted);
  EXPECT_EQ(p.eval_count(), 3);
}

TEST(LedProblem, RecordsFirstTargetHit) {
  RngStream rng(1);
  LedProblem p = led_wrap(make_intrinsic(1, 1), 1, rng, 10, true);
  p.set_target(0.5);
  p.evaluate(vec({1.0}));
  EXPECT_FALSE(p.target_hit_at());
  p.evaluate(vec({0.1}));
  p.evaluate(vec({0.0}));
  ASSERT_TRUE(p.target_hit_at());
  EXPECT_EQ(*p.target_hit_at(), 2);
}

TEST(LedProblem, RejectsTooSmallTotalDimension) {
  RngStream rng(1);
  EXPECT_THROW(led_wrap(make_intrinsic(1, 4), 3, rng, 10), ConfigError);
}

TEST(EffectiveAlignment, BasisEqualToRotationTransposeIsExact) {
  RngStream rng(6);
  LedProblem p = led_wrap(make_intrinsic(1, 2), 4, rng, 10);
  const Vector a = effective_alignment_norms(p, p.rotation().transpose());
  EXPECT_NEAR(a(0), 1.0, 1e-12);
  EXPECT_NEAR(a(1), 1.0, 1e-12);
  EXPECT_NEAR(a(2), 0.0, 1e-12);
  EXPECT_NEAR(a(3), 0.0, 1e-12);
}

TEST(EffectiveAlignment, IdentityCase) {
  RngStream rng(1);
  LedProblem p = led_wrap(make_intrinsic(1, 1), 3, rng, 10, true);
  const Vector a = effective_alignment_norms(p, Matrix::Identity(3, 3));
  EXPECT_DOUBLE_EQ(a(0), 1.0);
  EXPECT_DOUBLE_EQ(a(1), 0.0);
  EXPECT_DOUBLE_EQ(a(2), 0.0);
}

TEST(EffectiveAlignment, SquaredNormsSumToEffectiveDimension) {
  RngStream rng(12);
  LedProblem p = led_wrap(make_intrinsic(1, 3), 9, rng, 10);
  const Matrix basis = random_rotation(9, rng);
  EXPECT_NEAR(effective_alignment_norms(p, basis).squaredNorm(), 3.0, 1e-9);
}

}  // namespace
}  // namespace ledcma
