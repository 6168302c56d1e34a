#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "ipdsaw/free_energy.hpp"

using namespace ipdsaw;

namespace {

const ConcaveEntropy& converged_entropy(double beta) {
  static std::map<double, ConcaveEntropy> cache;
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, SpectralEntropy(beta).curve(32.0)).first;
  return it->second;
}

double beta_c(ModelKind m) { return critical_point(m).beta_c; }

}  // namespace

TEST(FiniteSize, LengthTwoUniformIsZero) {
  for (double beta : {0.5, 1.0, 2.0}) EXPECT_NEAR(finite_size_free_energy(2, beta, ModelKind::uniform).f, 0.0, 1e-15);
}

TEST(FiniteSize, LengthTwoNonUniform) {
  const auto p = finite_size_free_energy(2, 1.0, ModelKind::non_uniform);
  EXPECT_NEAR(p.f, 0.5 * std::log(4.0 / 9.0), 1e-15);
  EXPECT_FALSE(p.phase.has_value());
  ASSERT_TRUE(p.length.has_value());
  EXPECT_EQ(*p.length, 2);
}

TEST(FiniteSize, NondecreasingAlongDoubling) {
  const double f8 = finite_size_free_energy(8, 1.0, ModelKind::non_uniform).f;
  const double f16 = finite_size_free_energy(16, 1.0, ModelKind::non_uniform).f;
  const double f32 = finite_size_free_energy(32, 1.0, ModelKind::non_uniform).f;
  EXPECT_GE(f16, f8 - 1e-12);
  EXPECT_GE(f32, f16 - 1e-12);
}

TEST(FiniteSize, NeverExceedsBeta) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform})
    for (double beta : {0.1, 0.6, 1.0, 2.0, 4.0})
      for (int L : {1, 5, 17, 64, 128}) EXPECT_LE(finite_size_free_energy(L, beta, m).f, beta);
}

TEST(Variational, FullDensityEndpoint) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform}) {
    const double beta = 0.8;
    const double expected =
        static_cast<double>(log_gamma(m, beta)) - static_cast<double>(GeometricLaw::make(beta).log_c);
    EXPECT_NEAR(variational_objective(1.0, beta, m, converged_entropy(beta)), expected, 1e-13);
  }
}

TEST(Variational, ZeroDensityEndpoint) {
  EXPECT_EQ(variational_objective(0.0, 0.8, ModelKind::uniform, converged_entropy(0.8)), 0.0);
  EXPECT_THROW(variational_objective(1.5, 0.8, ModelKind::uniform, converged_entropy(0.8)), std::invalid_argument);
}

TEST(Variational, NonPositiveAtCriticalPoint) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform}) {
    const double b = beta_c(m);
    const auto g = SpectralEntropy(b).curve(32.0);
    for (int i = 0; i <= 200; ++i) ASSERT_LE(variational_objective(i / 200.0, b, m, g), 1e-15);
  }
}

TEST(ExcessFreeEnergy, ZeroAboveCriticalPoint) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform}) {
    const double beta = beta_c(m) + 0.5;
    const auto p = excess_free_energy(beta, m, converged_entropy(beta));
    EXPECT_LE(p.f_excess, 1e-9);
    EXPECT_GE(p.f_excess, 0.0);
    EXPECT_EQ(p.phase, Phase::collapsed);
    EXPECT_NEAR(p.f, collapse_free_energy(m, beta), 1e-9);
  }
}

TEST(ExcessFreeEnergy, PositiveBelowCriticalPoint) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform}) {
    const double beta = beta_c(m) - 0.3;
    const auto p = excess_free_energy(beta, m, converged_entropy(beta));
    EXPECT_GT(p.f_excess, 1e-6);
    EXPECT_EQ(p.phase, Phase::extended);
    EXPECT_FALSE(p.length.has_value());
  }
}

TEST(ExcessFreeEnergy, FiniteSizeUpperBound) {
  // (1/L) log Z_{L-1} - (1/L) log Phi_{L-1} <= f~ + (1/L) log(c L / Gamma).
  const int L = 64;
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform})
    for (double eps : {0.2, 0.5}) {
      const double beta = beta_c(m) - eps;
      const auto p = excess_free_energy(beta, m, converged_entropy(beta));
      const double lhs = (partition_representation(L - 1, beta, m) - log_phi(m, beta, L - 1)) / L;
      const double slack =
          (static_cast<double>(GeometricLaw::make(beta).log_c - log_gamma(m, beta)) + std::log(L)) / L;
      EXPECT_LE(lhs, p.f_excess + slack) << to_string(m) << " beta=" << beta;
    }
}

TEST(ExcessFreeEnergy, MaximizerBoundedAwayFromZero) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform})
    for (double eps : {0.2, 0.3, 0.5}) {
      const double beta = beta_c(m) - eps;
      const auto p = excess_free_energy(beta, m, converged_entropy(beta));
      EXPECT_GT(p.alpha_star, 0.01);
      EXPECT_GE(p.argmax_diameter, 0.0);
      EXPECT_LT(p.argmax_diameter, 0.01);
    }
}

TEST(ExcessFreeEnergy, NonNegativeOnGrid) {
  for (double beta = 0.2; beta <= 3.0; beta += 0.2) {
    const auto p = excess_free_energy(beta, ModelKind::non_uniform, converged_entropy(beta));
    EXPECT_GE(p.f_excess, 0.0);
  }
}

TEST(ExcessFreeEnergy, FiniteSizeGapShrinks) {
  const ModelKind m = ModelKind::non_uniform;
  for (double beta : {0.6, beta_c(m), 2.0}) {
    const auto& g = converged_entropy(beta);
    const double limit = excess_free_energy(beta, m, g).f;
    const double gap48 = std::abs(finite_size_free_energy(48, beta, m).f - limit);
    const double gap96 = std::abs(finite_size_free_energy(96, beta, m).f - limit);
    EXPECT_LT(gap96, gap48) << "beta=" << beta;
  }
}

TEST(ExcessFreeEnergy, FiniteNEntropyGivesLowerBound) {
  const ModelKind m = ModelKind::non_uniform;
  const double beta = beta_c(m) - 0.2;
  const auto low = excess_free_energy(beta, m, finite_n_entropy(64)(beta));
  const auto conv = excess_free_energy(beta, m, converged_entropy(beta));
  EXPECT_GT(low.f_excess, 0.0);
  EXPECT_LE(low.f_excess, conv.f_excess);
}

TEST(Phase, Classification) {
  EXPECT_EQ(classify_phase(0.0), Phase::collapsed);
  EXPECT_EQ(classify_phase(5e-10), Phase::collapsed);
  EXPECT_EQ(classify_phase(5e-9), Phase::critical_window);
  EXPECT_EQ(classify_phase(1e-6), Phase::extended);
  EXPECT_EQ(to_string(Phase::critical_window), "critical-window");
}

TEST(CriticalPoint, NonUniformNearOne) {
  const auto cp = critical_point(ModelKind::non_uniform);
  EXPECT_NEAR(cp.beta_c, 1.0, 0.05);
  EXPECT_LT(cp.residual, 1e-12);
  EXPECT_NEAR(std::exp(static_cast<double>(log_gamma(ModelKind::non_uniform, cp.beta_c))), 1.0, 1e-12);
}

TEST(CriticalPoint, NonUniformRoutesAgree) {
  EXPECT_NEAR(critical_point(ModelKind::non_uniform).beta_c, critical_point_cubic(ModelKind::non_uniform), 1e-10);
}

TEST(CriticalPoint, UniformMatchesIndependentBisection) {
  // c_beta = e^beta solved directly in double precision.
  double lo = 0.1, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = std::exp(-mid / 2);
    ((1 + r) / (1 - r) > std::exp(mid) ? lo : hi) = mid;
  }
  const auto cp = critical_point(ModelKind::uniform);
  EXPECT_NEAR(cp.beta_c, lo, 1e-3);
  EXPECT_NEAR(cp.beta_c, 1.2188, 1e-3);
  EXPECT_LT(cp.residual, 1e-12);
  EXPECT_NEAR(cp.beta_c, critical_point_cubic(ModelKind::uniform), 1e-10);
}

TEST(TransitionOrder, ConvergedSlopeInBracket) {
  const std::vector<double> eps{0.1, 0.15, 0.2, 0.3, 0.4};
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform}) {
    const auto fit = transition_order_fit(m, eps, spectral_entropy());
    EXPECT_GE(fit.slope, 1.3) << to_string(m);
    EXPECT_LE(fit.slope, 1.7) << to_string(m);
    for (std::size_t i = 1; i < fit.f_excess.size(); ++i) EXPECT_GT(fit.f_excess[i], fit.f_excess[i - 1]);
  }
}

TEST(TransitionOrder, RefusesValuesAtTheFloor) {
  const std::vector<double> eps{0.1, 0.2};
  const EntropyFactory hopeless = [](double beta) { return ConcaveEntropy::majorant({{0.0, -100.0}}, beta); };
  EXPECT_THROW(transition_order_fit(ModelKind::non_uniform, eps, hopeless), NotConverged);
}

TEST(TransitionOrder, RejectsEpsOutsideRange) {
  const std::vector<double> eps{0.01, 0.2};
  EXPECT_THROW(transition_order_fit(ModelKind::non_uniform, eps, spectral_entropy()), std::invalid_argument);
}
