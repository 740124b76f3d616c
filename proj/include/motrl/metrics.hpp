#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motrl/instance.hpp"
#include "motrl/structured_output.hpp"
#include "motrl/trajectory.hpp"

namespace motrl {

struct MetricConfig {
  double alpha = 0.9;
  double static_epsilon = 1.0;  // px/frame
  double iou_match_threshold = 0.5;

  void validate() const;  // throws InputError
};

/// Motion consistency of a predicted track: mean over consecutive common
/// frames of A_t * S_t, with the predicted motion taken between consecutive
/// predicted centers. Steps where the GT barely moves count as 1.
/// nullopt when the tracks share fewer than two frames.
std::optional<double> mcp_metric(const Trajectory& gt, const Trajectory& pred,
                                 const MetricConfig& cfg);

// Mean center distance in pixels over common frames.
std::optional<double> cle(const Trajectory& gt, const Trajectory& pred);

// Mean IoU over common frames whose IoU reaches the match threshold; 0 if
// none does.
std::optional<double> motp(const Trajectory& gt, const Trajectory& pred, const MetricConfig& cfg);

// Center distance divided by the GT box diagonal, averaged over common frames
// with a non-degenerate GT box.
std::optional<double> nde(const Trajectory& gt, const Trajectory& pred);

struct MotaCounts {
  std::size_t gt_detections = 0;
  std::size_t false_negatives = 0;
  std::size_t false_positives = 0;
  std::size_t id_switches = 0;
  std::size_t matches = 0;
};

// CLEAR-MOT error counts with per-frame IoU matching.
MotaCounts mota_counts(std::span<const Trajectory> gts, std::span<const Trajectory> preds,
                       const MetricConfig& cfg);

// 1 - (FN + FP + IDSW) / GT; nullopt when there is no GT detection.
std::optional<double> mota(std::span<const Trajectory> gts, std::span<const Trajectory> preds,
                           const MetricConfig& cfg);

struct InstanceMetrics {
  std::string instance_id;
  std::string source_sequence;
  std::optional<double> mcp;
  std::optional<double> motp;
  std::optional<double> cle_px;
  std::optional<double> nde;
  std::optional<double> mota;
  std::size_t frames_evaluated = 0;
  std::vector<std::string> flags;
};

// Corpus fields are null when no instance defines them.
struct MetricReport {
  std::optional<double> mcp;
  std::optional<double> motp;
  std::optional<double> cle_px;
  std::optional<double> nde;
  std::optional<double> mota;
  std::size_t frames_evaluated = 0;
  // One row per query-specific segment (instance), sorted by instance_id.
  std::vector<InstanceMetrics> per_sequence;
};

struct EvaluationItem {
  const QueryInstance* instance = nullptr;
  std::span<const FramePrediction> predictions;
};

// Metrics for one instance; predicted tracks are matched to GT tracks by
// Hungarian assignment on 1 - mean IoU over common frames.
InstanceMetrics evaluate_instance(const QueryInstance& instance,
                                  std::span<const FramePrediction> predictions,
                                  const MetricConfig& cfg);

/// Uniform mean over instances of each defined field. Rows are ordered by
/// instance_id before reduction so the result is independent of input order.
MetricReport aggregate(std::vector<InstanceMetrics> rows);

// Serial corpus evaluation; the OpenMP variant lives in kernels.hpp.
MetricReport evaluate_corpus(std::span<const EvaluationItem> items, const MetricConfig& cfg);

std::string report_to_json(const MetricReport& report);
std::string report_to_text(const MetricReport& report);

}  // namespace motrl
