#include <omp.h>

#include <exception>

#include "motrl/error.hpp"
#include "motrl/kernels.hpp"

namespace motrl {

namespace {

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

// Rethrows the failure of the lowest-index item so errors match the serial
// order.
void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace

std::vector<RewardBreakdown> score_rollouts(std::span<const ScoringItem> items,
                                            const RewardConfig& cfg, int jobs) {
  const auto n = static_cast<long long>(items.size());
  std::vector<RewardBreakdown> out(items.size());
  std::vector<std::exception_ptr> errors(items.size());

#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count(jobs))
  for (long long i = 0; i < n; ++i) {
    try {
      const auto& item = items[static_cast<std::size_t>(i)];
      if (item.instance == nullptr) {
        throw InvariantError("scoring item without an instance");
      }
      out[static_cast<std::size_t>(i)] =
          score_rollout(parse_rollout(item.text), *item.instance, cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

MetricReport evaluate_corpus_parallel(std::span<const EvaluationItem> items,
                                      const MetricConfig& cfg, int jobs) {
  const auto n = static_cast<long long>(items.size());
  std::vector<InstanceMetrics> rows(items.size());
  std::vector<std::exception_ptr> errors(items.size());

#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count(jobs))
  for (long long i = 0; i < n; ++i) {
    try {
      const auto& item = items[static_cast<std::size_t>(i)];
      if (item.instance == nullptr) {
        throw InvariantError("evaluation item without an instance");
      }
      rows[static_cast<std::size_t>(i)] = evaluate_instance(*item.instance, item.predictions, cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return aggregate(std::move(rows));
}

}  // namespace motrl
