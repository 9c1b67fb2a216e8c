#include "oslsim/spectral_measure.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace osl {
namespace {

using std::numbers::pi;

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

SpectralMeasure random_discrete(Rng& rng, int d, int n) {
  std::vector<Vector> atoms;
  std::vector<double> weights;
  for (int i = 0; i < n; ++i) {
    atoms.push_back(testing::random_unit(rng, d));
    weights.push_back(0.1 + rng.uniform());
  }
  return SpectralMeasure::discrete(atoms, weights);
}

TEST(TotalMass, Examples) {
  EXPECT_EQ(total_mass(SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1})), 2.0);
  EXPECT_EQ(total_mass(SpectralMeasure::uniform(2, 2 * pi)), 2 * pi);
  EXPECT_DOUBLE_EQ(total_mass(SpectralMeasure::discrete({v2(1, 0), v2(0, 1)}, {0.3, 0.7})), 1.0);
}

TEST(Discrete, Validation) {
  EXPECT_THROW(SpectralMeasure::discrete({v2(1, 1e-5)}, {1}), AdmissibilityError);
  EXPECT_THROW(SpectralMeasure::discrete({v2(1, 0)}, {0}), AdmissibilityError);
  EXPECT_THROW(SpectralMeasure::discrete({}, {}), AdmissibilityError);
  EXPECT_THROW(SpectralMeasure::uniform(2, -1), AdmissibilityError);
}

TEST(Discrete, SymmetryDetection) {
  EXPECT_TRUE(SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1}).symmetric());
  EXPECT_FALSE(SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 2}).symmetric());
  EXPECT_FALSE(SpectralMeasure::discrete({v1(1)}, {1}).symmetric());
  EXPECT_TRUE(SpectralMeasure::uniform(3, 1).symmetric());
}

TEST(IntegrateSphere, ConstantGivesMass) {
  for (int d : {1, 2, 3}) {
    const SpectralMeasure u = SpectralMeasure::uniform(d, 1.7);
    const auto s = integrate_sphere(u, [](const Vector&) { return 1.0; }, 1e-10);
    EXPECT_NEAR(s.value, 1.7, 1e-12) << "d=" << d;
  }
}

TEST(IntegrateSphere, CosineSquaredOnCircle) {
  const SpectralMeasure u = SpectralMeasure::uniform(2, 2 * pi);
  const auto s = integrate_sphere(u, [](const Vector& t) { return t(0) * t(0); }, 1e-12);
  EXPECT_NEAR(s.value, pi, 1e-12);
  EXPECT_TRUE(s.converged);
}

TEST(IntegrateSphere, SecondMomentInThreeDimensions) {
  // E[theta_1^2] = 1/3 under the normalised surface measure
  const SpectralMeasure u = SpectralMeasure::uniform(3, 4 * pi);
  const auto s = integrate_sphere(u, [](const Vector& t) { return t(0) * t(0); }, 1e-10);
  EXPECT_NEAR(s.value, 4 * pi / 3, 1e-9);
}

TEST(IntegrateSphere, DiscreteIsExactWeightedSum) {
  const SpectralMeasure s = SpectralMeasure::discrete({v2(1, 0), v2(0, -1)}, {0.25, 2.0});
  const auto r = integrate_sphere(s, [](const Vector& t) { return t(0) + 3 * t(1); }, 1e-8);
  EXPECT_EQ(r.value, 0.25 - 6.0);
  EXPECT_EQ(r.error, 0.0);
}

TEST(IntegrateSphereProperty, NegationCancelsExactly) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 3;
    const Vector c = testing::random_unit(rng, d);
    auto g = [&](const Vector& t) { return std::exp(c.dot(t)) * std::sin(3 * t(0)); };
    auto mg = [&](const Vector& t) { return -g(t); };
    const SpectralMeasure u = SpectralMeasure::uniform(d, 1.0 + trial);
    EXPECT_EQ(integrate_sphere(u, g, 1e-9).value + integrate_sphere(u, mg, 1e-9).value, 0.0);
    const SpectralMeasure s = random_discrete(rng, d, 5);
    EXPECT_EQ(integrate_sphere(s, g, 1e-9).value + integrate_sphere(s, mg, 1e-9).value, 0.0);
  }
}

TEST(IntegrateSphereProperty, OddIntegrandVanishesOnSymmetricMeasures) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 3;
    const Vector c = testing::random_unit(rng, d);
    auto g = [&](const Vector& t) { return std::sinh(2 * c.dot(t)); };
    const double sup = std::sinh(2.0);
    const double tol = 1e-9;
    for (const SpectralMeasure& s :
         {SpectralMeasure::uniform(d, 2.0), symmetrize(random_discrete(rng, d, 4))}) {
      EXPECT_LE(std::abs(integrate_sphere(s, g, tol).value), tol * s.total_mass() * sup);
    }
  }
}

TEST(SampleDirection, SingleAtom) {
  const SpectralMeasure s = SpectralMeasure::discrete({v2(0.6, 0.8)}, {3});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(s.sample_direction(rng), v2(0.6, 0.8));
}

TEST(SampleDirection, TwoAtomFrequency) {
  const SpectralMeasure s = SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1});
  Rng rng(2);
  int plus = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) plus += s.sample_direction(rng)(0) > 0;
  EXPECT_NEAR(plus / double(n), 0.5, 0.01);
}

TEST(SampleDirection, UniformCircleKolmogorovSmirnov) {
  const SpectralMeasure s = SpectralMeasure::uniform(2, 1.0);
  Rng rng(4);
  const int n = 100000;
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) {
    const Vector t = s.sample_direction(rng);
    EXPECT_NEAR(t.norm(), 1.0, 1e-14);
    u[i] = (std::atan2(t(1), t(0)) + pi) / (2 * pi);
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    ks = std::max({ks, (i + 1.0) / n - u[i], u[i] - double(i) / n});
  }
  EXPECT_LT(ks, 1.628 / std::sqrt(double(n)));
}

TEST(SampleDirectionProperty, DiscreteFrequenciesConverge) {
  Rng gen(9);
  const SpectralMeasure s = random_discrete(gen, 3, 6);
  Rng rng(10);
  const int n = 100000;
  std::vector<int> counts(s.atoms().size(), 0);
  for (int i = 0; i < n; ++i) {
    const Vector t = s.sample_direction(rng);
    for (std::size_t k = 0; k < s.atoms().size(); ++k)
      if (t == s.atoms()[k]) ++counts[k];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double p = s.weights()[k] / s.total_mass();
    EXPECT_LE(std::abs(counts[k] / double(n) - p), 3 * std::sqrt(p * (1 - p) / n) + 1e-3);
  }
}

TEST(Symmetrize, AlreadySymmetricUnchanged) {
  const SpectralMeasure s = SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1});
  const SpectralMeasure t = symmetrize(s);
  EXPECT_TRUE(t.symmetric());
  ASSERT_EQ(t.atoms().size(), 2u);
  EXPECT_DOUBLE_EQ(t.weights()[0], 1.0);
  EXPECT_DOUBLE_EQ(t.weights()[1], 1.0);
}

TEST(Symmetrize, SingleAtomSplits) {
  const SpectralMeasure t = symmetrize(SpectralMeasure::discrete({v1(1)}, {2}));
  EXPECT_TRUE(t.symmetric());
  ASSERT_EQ(t.atoms().size(), 2u);
  double plus = 0, minus = 0;
  for (std::size_t k = 0; k < 2; ++k) (t.atoms()[k](0) > 0 ? plus : minus) += t.weights()[k];
  EXPECT_EQ(plus, 1.0);
  EXPECT_EQ(minus, 1.0);
}

TEST(SymmetrizeProperty, PreservesMass) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const SpectralMeasure s = random_discrete(rng, 1 + trial % 4, 1 + trial % 7);
    const SpectralMeasure t = symmetrize(s);
    EXPECT_NEAR(t.total_mass(), s.total_mass(), 1e-12 * s.total_mass());
    EXPECT_TRUE(t.symmetric());
  }
}

TEST(IntegrateSphereAligned, MatchesPlainRuleForSmoothIntegrand) {
  const SpectralMeasure u = SpectralMeasure::uniform(3, 2.0);
  auto g = [](const Vector& t) { return Estimate{t(0) * t(0) + t(1) * t(2) + 1.0, 0.0}; };
  const auto a = integrate_sphere_aligned(u, Matrix::Identity(3, 3), g, 1e-12);
  EXPECT_NEAR(a.value, 2.0 * (1.0 / 3.0 + 1.0), 1e-11);
}

}  // namespace
}  // namespace osl
