#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace motrl {

enum class CorruptionStrategy { freeze };
enum class DegenerateStdMode { zero_advantages };

struct PolicyConfig {
  double clip_epsilon = 0.2;
  double kl_beta = 5.0e-3;        // reference-KL weight in the surrogate
  double reward_kl_coef = 0.0;    // in-reward KL penalty; off by default
  double tapo_gamma = 0.1;        // temporal loss weight
  CorruptionStrategy tapo_strategy = CorruptionStrategy::freeze;
  double tapo_keep_prob = 0.7;
  int tapo_interval = 2;
  DegenerateStdMode degenerate_std_mode = DegenerateStdMode::zero_advantages;

  void validate() const;  // throws InputError
};

// G rollouts of one input. Optional log-probability columns must have G
// entries when present.
struct RolloutGroup {
  std::vector<double> rewards;
  std::optional<std::vector<double>> logp_new;
  std::optional<std::vector<double>> logp_old;
  std::optional<std::vector<double>> logp_ref;
  std::optional<std::vector<double>> logp_masked;

  std::size_t size() const noexcept { return rewards.size(); }
  void validate() const;  // throws InputError
};

/// (r_i - mean) / std with the population standard deviation. A group whose
/// spread is zero (to rounding) gets all-zero advantages.
/// Throws InputError for fewer than two rewards or a non-finite reward.
std::vector<double> grpo_advantages(std::span<const double> rewards, const PolicyConfig& cfg);

// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A) for one rollout.
double clipped_surrogate(double ratio, double advantage, double clip_epsilon) noexcept;

// exp(d) - d - 1 with d = logp_ref - logp_new; nonnegative, zero iff equal.
double kl_estimate(double logp_new, double logp_ref) noexcept;

/// Group mean of the clipped surrogate minus kl_beta times the mean KL
/// estimate. Requires logp_new and logp_old, and logp_ref when kl_beta > 0.
double grpo_objective(const RolloutGroup& group, std::span<const double> advantages,
                      const PolicyConfig& cfg);

// Mean of logp_new - logp_masked. Requires both columns.
double tapo_temporal_loss(const RolloutGroup& group);

// grpo_objective + tapo_gamma * tapo_temporal_loss; exactly grpo_objective
// when tapo_gamma is 0.
double tapo_objective(const RolloutGroup& group, std::span<const double> advantages,
                      const PolicyConfig& cfg);

// Subtracts coef * (logp_old - logp_ref) from each reward.
std::vector<double> apply_reward_kl_penalty(const RolloutGroup& group, double coef);

struct FrameMask {
  std::vector<bool> keep;  // keep[0] is always true
  CorruptionStrategy strategy = CorruptionStrategy::freeze;

  // Index of the frame shown at position t: t if kept, else 0.
  std::size_t source_of(std::size_t t) const { return keep.at(t) ? t : 0; }
};

/// Frames t >= 1 are kept independently with probability tapo_keep_prob and
/// otherwise replaced by frame 0. Deterministic for a given seed.
FrameMask build_frame_mask(std::size_t num_frames, const PolicyConfig& cfg, std::uint64_t seed);

// True on the training steps where the corruption is applied.
bool is_tapo_step(std::uint64_t step, const PolicyConfig& cfg) noexcept;

}  // namespace motrl
