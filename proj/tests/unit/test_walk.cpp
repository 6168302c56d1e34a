#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <unistd.h>

#include "ipdsaw/walk.hpp"
#include "oracles.hpp"

using namespace ipdsaw;

namespace {

const double kTwoLn2 = 2.0 * std::numbers::ln2;

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ipdsaw_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(GeometricLaw, RejectsNonPositiveBeta) {
  EXPECT_THROW(GeometricLaw::make(0.0), std::invalid_argument);
  EXPECT_THROW(GeometricLaw::make(-1.0), std::invalid_argument);
}

TEST(GeometricLaw, NormalizationConstant) {
  EXPECT_NEAR(static_cast<double>(GeometricLaw::make(kTwoLn2).c()), 3.0, 1e-15);
  for (double beta : {0.01, 0.3, 1.0, 5.0}) {
    const double r = std::exp(-beta / 2);
    EXPECT_NEAR(static_cast<double>(GeometricLaw::make(beta).c()), (1 + r) / (1 - r), 1e-12 * (1 + r) / (1 - r));
  }
}

TEST(IncrementLaw, ZeroStepAtTwoLogTwo) {
  EXPECT_NEAR(increment_log_prob(GeometricLaw::make(kTwoLn2), 0), std::log(1.0 / 3.0), 1e-15);
}

TEST(IncrementLaw, UnitStepsAtTwoLogTwo) {
  const auto law = GeometricLaw::make(kTwoLn2);
  EXPECT_NEAR(increment_log_prob(law, 1), std::log(1.0 / 6.0), 1e-15);
  EXPECT_NEAR(increment_log_prob(law, -1), std::log(1.0 / 6.0), 1e-15);
}

TEST(IncrementLaw, SumsToOne) {
  for (double beta : {1.0, kTwoLn2, 3.0}) {
    const auto law = GeometricLaw::make(beta);
    double total = 0.0;
    for (int k = -60; k <= 60; ++k) total += std::exp(increment_log_prob(law, k));
    // Tail beyond 60 is 2 r^61 / ((1 - r) c) < 1e-12 for beta >= 1.
    EXPECT_NEAR(total, 1.0, 1e-12) << "beta=" << beta;
  }
}

TEST(StretchToWalk, SevenStretchExample) {
  const StretchConfig cfg({3, -4, 3, 2, 0, -2, 3}, 24);
  const auto v = stretch_to_walk(cfg);
  EXPECT_EQ(v, (std::vector<int>{3, 1, -1, -5, 2, 2, 1, -3}));
  const auto pos = walk_positions(v);
  EXPECT_EQ(pos.back(), 0);
  long area = 0;
  for (long p : pos) area += std::abs(p);
  EXPECT_EQ(area, 17);
}

TEST(StretchToWalk, ZeroStretches) {
  EXPECT_EQ(stretch_to_walk(StretchConfig({0, 0, 0})), (std::vector<int>{0, 0, 0, 0}));
}

TEST(StretchToWalk, RoundTripAndAreaOnAllConfigsUpToTen) {
  for (int L = 1; L <= 10; ++L)
    for_each_stretch_config(L, [&](const std::vector<int>& l) {
      const StretchConfig cfg(l, L);
      const auto v = stretch_to_walk(cfg);
      const auto pos = walk_positions(v);
      ASSERT_EQ(pos.back(), 0);
      long area = 0;
      for (std::size_t n = 1; n < pos.size(); ++n) area += std::abs(pos[n]);
      ASSERT_EQ(area, L - cfg.size());
      for (int n = 1; n <= cfg.size(); ++n) ASSERT_EQ(std::abs(pos[static_cast<std::size_t>(n)]), std::abs(l[static_cast<std::size_t>(n - 1)]));
      ASSERT_EQ(walk_to_stretches(v), cfg);
    });
}

TEST(StretchToWalk, RejectsNonReturningWalk) {
  EXPECT_THROW(walk_to_stretches(std::vector<int>{1, 0}), std::invalid_argument);
}

TEST(BuildTable, SingleStep) {
  const auto law = GeometricLaw::make(1.3);
  const auto t = build_table(law, 3, 9);
  for (int v = -9; v <= 9; ++v) EXPECT_NEAR(t.logp(1, v, std::abs(v)), increment_log_prob(law, v), 1e-13);
  EXPECT_TRUE(is_log_zero(t.logp(1, 2, 3)));
}

TEST(BuildTable, StartsAtOriginAndRespectsAreaBound) {
  const auto t = build_table(GeometricLaw::make(0.8), 5, 10);
  EXPECT_EQ(t.logp(0, 0, 0), 0.0);
  for (int n = 0; n <= 5; ++n)
    for (int a = 0; a <= 10; ++a)
      for (int v = -10; v <= 10; ++v)
        if (std::abs(v) > a) {
          ASSERT_TRUE(is_log_zero(t.logp(n, v, a)));
        }
}

TEST(BuildTable, TotalMassAtMostOne) {
  const auto t = build_table(GeometricLaw::make(0.6), 8, 12);
  for (int n = 0; n <= 8; ++n) {
    double total = 0.0;
    for (int a = 0; a <= 12; ++a)
      for (int v = -12; v <= 12; ++v) total += std::exp(t.logp(n, v, a));
    EXPECT_LE(total, 1.0 + 1e-12);
    if (n >= 1) {
      EXPECT_LT(total, 1.0);
    }
  }
}

TEST(BuildTable, TwoStepReturnAtTwoLogTwo) {
  const auto t = build_table(GeometricLaw::make(kTwoLn2), 2, 4);
  EXPECT_NEAR(std::exp(t.logp(2, 0, 0)), 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(std::exp(constrained_return_prob(t, 2, 1)), 1.0 / 18.0, 1e-15);
}

TEST(BuildTable, MatchesNaiveRecursion) {
  for (double beta : {0.05, 0.3, 1.0, kTwoLn2, 3.0, 9.0}) {
    const int n_max = 7, k_max = 11;
    const auto fast = build_table(GeometricLaw::make(beta), n_max, k_max);
    const auto slow = oracle::naive_table(beta, n_max, k_max);
    for (int n = 0; n <= n_max; ++n)
      for (int v = -k_max; v <= k_max; ++v)
        for (int a = 0; a <= k_max; ++a) {
          const double want = slow[static_cast<std::size_t>(n)][static_cast<std::size_t>(v + k_max)][static_cast<std::size_t>(a)];
          const double got = fast.logp(n, v, a);
          if (is_log_zero(want)) {
            ASSERT_TRUE(is_log_zero(got)) << beta << " " << n << " " << v << " " << a;
          } else {
            ASSERT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want))) << beta << " " << n << " " << v << " " << a;
          }
        }
  }
}

TEST(BuildTable, MarginalMatchesConvolution) {
  for (double beta : {1.0, 2.0}) {
    const int k_max = 400;
    const auto t = build_table(GeometricLaw::make(beta), 6, k_max);
    for (int n = 1; n <= 6; ++n) {
      double marginal = 0.0;
      for (int a = 0; a <= k_max; ++a) marginal += std::exp(t.log_return_prob(n, a));
      EXPECT_NEAR(marginal, oracle::return_probability_convolution(beta, n, 120), 1e-8) << beta << " " << n;
    }
  }
}

TEST(BuildTable, RefusesOverBudget) {
  EXPECT_THROW(build_table(GeometricLaw::make(1.0), 100, 100, 1000), BudgetExceeded);
  EXPECT_THROW(build_return_profile(GeometricLaw::make(1.0), 100, 100, 1000), BudgetExceeded);
}

TEST(ConstrainedReturn, ZeroAreaIsPowerOfNormalization) {
  for (double beta : {0.4, 1.0, 2.5}) {
    const auto law = GeometricLaw::make(beta);
    const auto t = build_table(law, 10, 6);
    for (int n = 0; n <= 10; ++n)
      EXPECT_NEAR(constrained_return_prob(t, n, 0), -n * static_cast<double>(law.log_c), 1e-13 * (n + 1));
  }
}

TEST(ConstrainedReturn, OutOfRangeThrows) {
  const auto t = build_table(GeometricLaw::make(1.0), 4, 5);
  EXPECT_THROW(constrained_return_prob(t, 5, 0), std::out_of_range);
  EXPECT_THROW(constrained_return_prob(t, 2, 6), std::out_of_range);
  EXPECT_THROW(constrained_return_prob(t, -1, 0), std::out_of_range);
}

TEST(ConstrainedReturn, Superadditive) {
  const auto t = build_table(GeometricLaw::make(0.9), 24, 40);
  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> n_dist(1, 12), k_dist(0, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const int n1 = n_dist(rng), n2 = n_dist(rng), k1 = k_dist(rng), k2 = k_dist(rng);
    const double joint = t.log_return_prob(n1 + n2, k1 + k2);
    const double split = t.log_return_prob(n1, k1) + t.log_return_prob(n2, k2);
    if (is_log_zero(split)) continue;
    ASSERT_GE(joint, split - 1e-12) << n1 << " " << n2 << " " << k1 << " " << k2;
  }
}

TEST(ReturnProfile, MatchesFullTable) {
  const auto law = GeometricLaw::make(1.7);
  const auto t = build_table(law, 20, 30);
  const auto p = build_return_profile(law, 20, 30);
  const auto q = return_profile_from_table(t);
  for (int n = 0; n <= 20; ++n)
    for (int k = 0; k <= 30; ++k) {
      ASSERT_EQ(p.log_return_prob(n, k), t.log_return_prob(n, k));
      ASSERT_EQ(q.log_return_prob(n, k), t.log_return_prob(n, k));
    }
}

TEST(Checkpoint, TableRoundTrip) {
  const auto dir = scratch_dir("table");
  const auto t = build_table(GeometricLaw::make(1.1), 6, 9);
  save_table(t, dir / "t.bin");
  const auto u = load_table(dir / "t.bin");
  EXPECT_EQ(u.beta(), t.beta());
  EXPECT_EQ(u.max_steps(), 6);
  EXPECT_EQ(u.max_area(), 9);
  for (int n = 0; n <= 6; ++n)
    for (int v = -9; v <= 9; ++v)
      for (int a = 0; a <= 9; ++a) ASSERT_EQ(u.logp(n, v, a), t.logp(n, v, a));
  EXPECT_THROW(load_return_profile(dir / "t.bin"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, ProfileRoundTrip) {
  const auto dir = scratch_dir("profile");
  const auto p = build_return_profile(GeometricLaw::make(0.7), 12, 20);
  save_return_profile(p, dir / "p.bin");
  const auto q = load_return_profile(dir / "p.bin");
  for (int n = 0; n <= 12; ++n)
    for (int k = 0; k <= 20; ++k) ASSERT_EQ(q.log_return_prob(n, k), p.log_return_prob(n, k));
  EXPECT_FALSE(std::filesystem::exists(dir / "p.bin.tmp"));
  std::filesystem::remove_all(dir);
}

TEST(Representation, MatchesBruteForce) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform})
    for (double beta : {0.3, 0.5, 1.0, 1.5, 2.0, 3.0})
      for (int L = 2; L <= 12; ++L) {
        const double rep = partition_representation(L, beta, m);
        const double bf = partition_bruteforce(L, beta, m);
        ASSERT_NEAR(rep, bf, 1e-10 * std::max(1.0, std::abs(bf))) << to_string(m) << " beta=" << beta << " L=" << L;
      }
}

TEST(Representation, LengthTwoExamples) {
  EXPECT_NEAR(partition_representation(2, 1.0, ModelKind::non_uniform), std::log(4.0 / 9.0), 1e-14);
  EXPECT_NEAR(partition_representation(2, 1.0, ModelKind::uniform), 0.0, 1e-14);
}

TEST(Representation, RejectsBadArguments) {
  EXPECT_THROW(partition_representation(4, 0.0, ModelKind::uniform), std::invalid_argument);
  EXPECT_THROW(partition_representation(0, 1.0, ModelKind::uniform), std::invalid_argument);
}

TEST(GammaPhi, UniformAtTwoLogTwo) {
  EXPECT_NEAR(gamma_phi(ModelKind::uniform, kTwoLn2, 5).gamma, 0.75, 1e-15);
}

TEST(GammaPhi, NonUniformPhi) {
  for (double beta : {0.5, 2.0})
    EXPECT_NEAR(gamma_phi(ModelKind::non_uniform, beta, 17).log_phi, 17 * (beta - std::numbers::ln2), 1e-12);
}

TEST(GammaPhi, UniformPhiUsesExactCount) {
  EXPECT_NEAR(gamma_phi(ModelKind::uniform, 1.0, 3).log_phi, 3.0 - std::log(7.0), 1e-14);
}

TEST(GammaPhi, StrictlyDecreasingInBeta) {
  for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform}) {
    long double prev = log_gamma(m, 0.1);
    for (int i = 1; i <= 490; ++i) {
      const long double cur = log_gamma(m, 0.1 + 0.01 * i);
      ASSERT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(GammaPhi, RejectsNonPositiveBeta) { EXPECT_THROW(gamma_phi(ModelKind::uniform, 0.0, 3), std::invalid_argument); }
