#include "motrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motrl/error.hpp"
#include "motrl/random.hpp"

namespace motrl {

void PolicyConfig::validate() const {
  if (!(clip_epsilon > 0.0)) {
    throw InputError("clip_epsilon must be positive");
  }
  if (!(kl_beta >= 0.0) || !(reward_kl_coef >= 0.0)) {
    throw InputError("KL coefficients must be nonnegative");
  }
  if (!(tapo_gamma >= 0.0)) {
    throw InputError("tapo_gamma must be nonnegative");
  }
  if (!(tapo_keep_prob >= 0.0 && tapo_keep_prob <= 1.0)) {
    throw InputError("tapo_keep_prob must lie in [0, 1]");
  }
  if (tapo_interval < 1) {
    throw InputError("tapo_interval must be a positive integer");
  }
}

void RolloutGroup::validate() const {
  const auto check = [&](const std::optional<std::vector<double>>& column, const char* name) {
    if (!column) {
      return;
    }
    if (column->size() != rewards.size()) {
      throw InputError(std::string(name) + " has " + std::to_string(column->size()) +
                       " entries for a group of " + std::to_string(rewards.size()));
    }
    for (const double v : *column) {
      if (!std::isfinite(v)) {
        throw InputError(std::string(name) + " contains a non-finite value");
      }
    }
  };
  check(logp_new, "logp_new");
  check(logp_old, "logp_old");
  check(logp_ref, "logp_ref");
  check(logp_masked, "logp_masked");
}

std::vector<double> grpo_advantages(std::span<const double> rewards, const PolicyConfig& cfg) {
  const std::size_t g = rewards.size();
  if (g < 2) {
    throw InputError("advantage normalization needs a group of at least 2 rollouts");
  }
  double sum = 0.0;
  double scale = 0.0;
  for (const double r : rewards) {
    if (!std::isfinite(r)) {
      throw InputError("rewards must be finite");
    }
    sum += r;
    scale = std::max(scale, std::abs(r));
  }
  const double mean = sum / static_cast<double>(g);
  double sq = 0.0;
  for (const double r : rewards) {
    sq += (r - mean) * (r - mean);
  }
  const double stddev = std::sqrt(sq / static_cast<double>(g));

  std::vector<double> adv(g, 0.0);
  // Spread at the level of rounding noise is treated as zero variance.
  if (!(stddev > 1e-12 * std::max(1.0, scale))) {
    switch (cfg.degenerate_std_mode) {
      case DegenerateStdMode::zero_advantages:
        return adv;
    }
  }
  for (std::size_t i = 0; i < g; ++i) {
    adv[i] = (rewards[i] - mean) / stddev;
  }
  return adv;
}

double clipped_surrogate(double ratio, double advantage, double clip_epsilon) noexcept {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_estimate(double logp_new, double logp_ref) noexcept {
  const double d = logp_ref - logp_new;
  return std::exp(d) - d - 1.0;
}

double grpo_objective(const RolloutGroup& group, std::span<const double> advantages,
                      const PolicyConfig& cfg) {
  group.validate();
  const std::size_t g = group.size();
  if (g == 0) {
    throw InputError("empty rollout group");
  }
  if (!group.logp_new || !group.logp_old) {
    throw InputError("grpo objective requires logp_new and logp_old");
  }
  if (cfg.kl_beta > 0.0 && !group.logp_ref) {
    throw InputError("grpo objective requires logp_ref when kl_beta > 0");
  }
  if (advantages.size() != g) {
    throw InputError("advantages and rollouts differ in count");
  }
  double surrogate = 0.0;
  double kl = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const double ratio = std::exp((*group.logp_new)[i] - (*group.logp_old)[i]);
    surrogate += clipped_surrogate(ratio, advantages[i], cfg.clip_epsilon);
    if (cfg.kl_beta > 0.0) {
      kl += kl_estimate((*group.logp_new)[i], (*group.logp_ref)[i]);
    }
  }
  const double n = static_cast<double>(g);
  if (cfg.kl_beta > 0.0) {
    return surrogate / n - cfg.kl_beta * (kl / n);
  }
  return surrogate / n;
}

double tapo_temporal_loss(const RolloutGroup& group) {
  group.validate();
  if (!group.logp_new || !group.logp_masked) {
    throw InputError("temporal loss requires logp_new and logp_masked");
  }
  if (group.size() == 0) {
    throw InputError("empty rollout group");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    sum += (*group.logp_new)[i] - (*group.logp_masked)[i];
  }
  return sum / static_cast<double>(group.size());
}

double tapo_objective(const RolloutGroup& group, std::span<const double> advantages,
                      const PolicyConfig& cfg) {
  const double j_grpo = grpo_objective(group, advantages, cfg);
  if (cfg.tapo_gamma == 0.0) {
    return j_grpo;
  }
  return j_grpo + cfg.tapo_gamma * tapo_temporal_loss(group);
}

std::vector<double> apply_reward_kl_penalty(const RolloutGroup& group, double coef) {
  std::vector<double> out = group.rewards;
  if (coef == 0.0) {
    return out;
  }
  group.validate();
  if (!group.logp_old || !group.logp_ref) {
    throw InputError("reward KL penalty requires logp_old and logp_ref");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] -= coef * ((*group.logp_old)[i] - (*group.logp_ref)[i]);
  }
  return out;
}

FrameMask build_frame_mask(std::size_t num_frames, const PolicyConfig& cfg, std::uint64_t seed) {
  if (num_frames == 0) {
    throw InputError("frame mask needs at least one frame");
  }
  if (!(cfg.tapo_keep_prob >= 0.0 && cfg.tapo_keep_prob <= 1.0)) {
    throw InputError("tapo_keep_prob must lie in [0, 1]");
  }
  FrameMask mask;
  mask.strategy = cfg.tapo_strategy;
  mask.keep.assign(num_frames, true);
  Rng rng(seed);
  for (std::size_t t = 1; t < num_frames; ++t) {
    mask.keep[t] = rng.uniform() < cfg.tapo_keep_prob;
  }
  return mask;
}

bool is_tapo_step(std::uint64_t step, const PolicyConfig& cfg) noexcept {
  return cfg.tapo_interval > 0 && step % static_cast<std::uint64_t>(cfg.tapo_interval) == 0;
}

}  // namespace motrl
