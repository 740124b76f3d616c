#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "motrl/error.hpp"
#include "motrl/policy.hpp"
#include "motrl/random.hpp"

namespace motrl {
namespace {

RolloutGroup trace_group() {
  RolloutGroup g;
  g.rewards = {1, 2, 4};
  g.logp_new = std::vector<double>{-1, -2, -0.5};
  g.logp_old = std::vector<double>{-1.1, -1.8, -0.5};
  g.logp_ref = std::vector<double>{-1.2, -2.0, -0.4};
  g.logp_masked = std::vector<double>{-2, -2.5, -0.5};
  return g;
}

RolloutGroup random_group(std::mt19937_64& rng, std::size_t g) {
  std::normal_distribution<double> r(0.0, 2.0);
  std::uniform_real_distribution<double> lp(-4.0, -0.1);
  std::uniform_real_distribution<double> drift(-0.3, 0.3);
  RolloutGroup out;
  std::vector<double> n, o, ref, m;
  for (std::size_t i = 0; i < g; ++i) {
    out.rewards.push_back(r(rng));
    const double x = lp(rng);
    n.push_back(x);
    o.push_back(x + drift(rng));
    ref.push_back(x + drift(rng));
    m.push_back(x - std::abs(drift(rng)) * 3);
  }
  out.logp_new = n;
  out.logp_old = o;
  out.logp_ref = ref;
  out.logp_masked = m;
  return out;
}

TEST(Advantages, HandValues) {
  const PolicyConfig cfg;
  const std::vector<double> r{1, 2, 3};
  const auto a = grpo_advantages(r, cfg);
  EXPECT_NEAR(a[0], -1.224744871391589, 1e-12);
  EXPECT_NEAR(a[1], 0.0, 1e-15);
  EXPECT_NEAR(a[2], 1.224744871391589, 1e-12);
}

TEST(Advantages, ZeroMeanUnitVariance) {
  const PolicyConfig cfg;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(2, 16);
  for (int t = 0; t < 1000; ++t) {
    const auto g = random_group(rng, static_cast<std::size_t>(size(rng)));
    const auto a = grpo_advantages(g.rewards, cfg);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    var /= a.size();
    ASSERT_NEAR(mean, 0.0, 1e-9);
    ASSERT_NEAR(var, 1.0, 1e-9);
  }
}

TEST(Advantages, ShiftAndPositiveScaleInvariant) {
  const PolicyConfig cfg;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> shift(-100, 100), scale(0.01, 100);
  for (int t = 0; t < 1000; ++t) {
    const auto g = random_group(rng, 8);
    const double s = shift(rng), k = scale(rng);
    std::vector<double> r2;
    for (double r : g.rewards) r2.push_back(k * r + s);
    const auto a = grpo_advantages(g.rewards, cfg);
    const auto b = grpo_advantages(r2, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-7);
  }
}

TEST(Advantages, DegenerateGroupGetsZeros) {
  const PolicyConfig cfg;
  for (const double v : {0.0, 1.0, 6.0, -3.5, 1e9}) {
    const std::vector<double> r(5, v);
    for (double a : grpo_advantages(r, cfg)) EXPECT_EQ(a, 0.0);
  }
  const std::vector<double> near{0.1 + 0.2, 0.3, 0.3};
  for (double a : grpo_advantages(near, cfg)) EXPECT_EQ(a, 0.0);
}

TEST(Advantages, RejectsBadGroups) {
  const PolicyConfig cfg;
  EXPECT_THROW(grpo_advantages(std::vector<double>{1.0}, cfg), InputError);
  EXPECT_THROW(grpo_advantages(std::vector<double>{}, cfg), InputError);
  EXPECT_THROW(grpo_advantages(std::vector<double>{1.0, NAN}, cfg), InputError);
}

TEST(ClippedSurrogate, HandCases) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, 1.0, 0.2), 0.5);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, -1.0, 0.2), -1.5);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.1, 2.0, 0.2), 2.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.0, 0.0, 0.2), 0.0);
}

TEST(ClippedSurrogate, NeverExceedsUnclippedTerm) {
  for (int i = 0; i < 100; ++i) {
    const double ratio = 0.02 + 0.03 * i;
    for (int j = 0; j < 100; ++j) {
      const double adv = -5.0 + 0.1 * j;
      const double s = clipped_surrogate(ratio, adv, 0.2);
      ASSERT_LE(s, ratio * adv + 1e-12);
      const double clipped = std::clamp(ratio, 0.8, 1.2);
      ASSERT_LE(s, clipped * adv + 1e-12);
    }
  }
}

TEST(KlEstimate, NonnegativeAndZeroAtEquality) {
  EXPECT_EQ(kl_estimate(-1.3, -1.3), 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lp(-10, 0);
  for (int t = 0; t < 10000; ++t) ASSERT_GE(kl_estimate(lp(rng), lp(rng)), 0.0);
  EXPECT_NEAR(kl_estimate(-1.0, -1.2), std::exp(-0.2) + 0.2 - 1.0, 1e-15);
}

TEST(Objectives, ThreeRolloutTrace) {
  const PolicyConfig cfg;
  const auto g = trace_group();
  const auto a = grpo_advantages(g.rewards, cfg);
  EXPECT_NEAR(a[0], -1.0690449676496978, 1e-12);
  EXPECT_NEAR(a[1], -0.2672612419124245, 1e-12);
  EXPECT_NEAR(a[2], 1.3363062095621219, 1e-12);
  EXPECT_NEAR(grpo_objective(g, a, cfg), -0.021368568338243268, 1e-12);
  EXPECT_NEAR(tapo_temporal_loss(g), 0.5, 1e-15);
  EXPECT_NEAR(tapo_objective(g, a, cfg), 0.028631431661756735, 1e-12);
}

TEST(Objectives, GammaZeroIsBitIdenticalToGrpo) {
  PolicyConfig cfg;
  cfg.tapo_gamma = 0.0;
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto g = random_group(rng, 6);
    const auto a = grpo_advantages(g.rewards, cfg);
    const double j = grpo_objective(g, a, cfg);
    const double k = tapo_objective(g, a, cfg);
    ASSERT_EQ(std::memcmp(&j, &k, sizeof j), 0);
  }
}

TEST(Objectives, KlTermOnlyWhenBetaPositive) {
  PolicyConfig cfg;
  cfg.kl_beta = 0.0;
  auto g = trace_group();
  g.logp_ref.reset();
  const auto a = grpo_advantages(g.rewards, cfg);
  EXPECT_NO_THROW(grpo_objective(g, a, cfg));
  cfg.kl_beta = 0.01;
  EXPECT_THROW(grpo_objective(g, a, cfg), InputError);
}

TEST(Objectives, MissingColumnsAndSizeMismatch) {
  const PolicyConfig cfg;
  auto g = trace_group();
  const auto a = grpo_advantages(g.rewards, cfg);
  auto bad = g;
  bad.logp_old.reset();
  EXPECT_THROW(grpo_objective(bad, a, cfg), InputError);
  bad = g;
  bad.logp_new->pop_back();
  EXPECT_THROW(grpo_objective(bad, a, cfg), InputError);
  bad = g;
  bad.logp_masked.reset();
  EXPECT_THROW(tapo_temporal_loss(bad), InputError);
  EXPECT_THROW(grpo_objective(g, std::vector<double>{1.0}, cfg), InputError);
}

TEST(Objectives, RewardKlPenalty) {
  const auto g = trace_group();
  EXPECT_EQ(apply_reward_kl_penalty(g, 0.0), g.rewards);
  const auto r = apply_reward_kl_penalty(g, 0.5);
  EXPECT_NEAR(r[0], 1 - 0.5 * 0.1, 1e-12);
  EXPECT_NEAR(r[1], 2 - 0.5 * 0.2, 1e-12);
  EXPECT_NEAR(r[2], 4 - 0.5 * -0.1, 1e-12);
}

TEST(FrameMaskTest, DeterministicPerSeed) {
  const PolicyConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = build_frame_mask(7, cfg, seed);
    const auto b = build_frame_mask(7, cfg, seed);
    ASSERT_EQ(a.keep, b.keep);
    ASSERT_TRUE(a.keep[0]);
  }
  bool differs = false;
  for (std::uint64_t seed = 1; seed < 50; ++seed) {
    differs |= build_frame_mask(7, cfg, seed).keep != build_frame_mask(7, cfg, 0).keep;
  }
  EXPECT_TRUE(differs);
}

TEST(FrameMaskTest, ExtremeKeepProbabilities) {
  PolicyConfig cfg;
  cfg.tapo_keep_prob = 0.0;
  const auto frozen = build_frame_mask(6, cfg, 3);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(frozen.source_of(t), 0u);
  cfg.tapo_keep_prob = 1.0;
  const auto kept = build_frame_mask(6, cfg, 3);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(kept.source_of(t), t);
}

TEST(FrameMaskTest, KeepRateNearProbability) {
  const PolicyConfig cfg;
  std::size_t kept = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto m = build_frame_mask(7, cfg, seed);
    for (std::size_t t = 1; t < 7; ++t) kept += m.keep[t];
    total += 6;
  }
  EXPECT_NEAR(static_cast<double>(kept) / total, 0.7, 0.02);
}

TEST(FrameMaskTest, RejectsEmpty) {
  EXPECT_THROW(build_frame_mask(0, PolicyConfig{}, 1), InputError);
}

TEST(TapoSchedule, Interval) {
  PolicyConfig cfg;
  EXPECT_TRUE(is_tapo_step(0, cfg));
  EXPECT_FALSE(is_tapo_step(1, cfg));
  EXPECT_TRUE(is_tapo_step(2, cfg));
  cfg.tapo_interval = 1;
  EXPECT_TRUE(is_tapo_step(3, cfg));
}

TEST(PolicyConfigTest, Validation) {
  PolicyConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.tapo_keep_prob = 1.5;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = PolicyConfig{};
  cfg.tapo_interval = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = PolicyConfig{};
  cfg.clip_epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(RngTest, ReproducibleDraws) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    ASSERT_EQ(x, b.uniform());
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    ASSERT_LT(a.below(7), 7u);
    b.below(7);
  }
  std::vector<int> v(20), w;
  std::iota(v.begin(), v.end(), 0);
  w = v;
  Rng(5).shuffle(v);
  Rng(5).shuffle(w);
  EXPECT_EQ(v, w);
  EXPECT_EQ(stable_hash("abc"), stable_hash("abc"));
  EXPECT_NE(stable_hash("abc"), stable_hash("abd"));
  EXPECT_NE(stable_hash("abc", 1), stable_hash("abc", 2));
}

}  // namespace
}  // namespace motrl
