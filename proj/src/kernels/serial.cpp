#include "motrl/error.hpp"
#include "motrl/kernels.hpp"

namespace motrl {

std::vector<RewardBreakdown> score_rollouts_serial(std::span<const ScoringItem> items,
                                                   const RewardConfig& cfg) {
  std::vector<RewardBreakdown> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (item.instance == nullptr) {
      throw InvariantError("scoring item without an instance");
    }
    out.push_back(score_rollout(parse_rollout(item.text), *item.instance, cfg));
  }
  return out;
}

MetricReport evaluate_corpus_serial(std::span<const EvaluationItem> items,
                                    const MetricConfig& cfg) {
  return evaluate_corpus(items, cfg);
}

}  // namespace motrl
