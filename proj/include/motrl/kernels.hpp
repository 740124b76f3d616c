#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "motrl/instance.hpp"
#include "motrl/metrics.hpp"
#include "motrl/reward.hpp"

namespace motrl {

// One raw rollout to score against its instance.
struct ScoringItem {
  const QueryInstance* instance = nullptr;
  std::string_view text;
};

// Reference implementations: plain loops, used as the oracle for the
// parallel kernels.
std::vector<RewardBreakdown> score_rollouts_serial(std::span<const ScoringItem> items,
                                                   const RewardConfig& cfg);
MetricReport evaluate_corpus_serial(std::span<const EvaluationItem> items,
                                    const MetricConfig& cfg);

// OpenMP kernels. Each item is independent; results are written by index and
// reduced in a fixed order, so output is identical for every `jobs`.
// jobs <= 0 uses the OpenMP default.
std::vector<RewardBreakdown> score_rollouts(std::span<const ScoringItem> items,
                                            const RewardConfig& cfg, int jobs);
MetricReport evaluate_corpus_parallel(std::span<const EvaluationItem> items,
                                      const MetricConfig& cfg, int jobs);

}  // namespace motrl
