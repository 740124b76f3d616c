#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "motrl/geometry.hpp"
#include "motrl/instance.hpp"
#include "motrl/structured_output.hpp"
#include "motrl/trajectory.hpp"

namespace motrl {

enum class SpatialMode {
  // r_IoU + r_L1 + r_point per matched pair, Hungarian on 3 - R.
  full,
  // Only matched pairs with IoU above threshold count, each 1/max(K, N).
  iou_only,
};

struct RewardConfig {
  double iou_threshold = 0.5;
  double l1_threshold = 10.0;     // pixels
  double point_threshold = 30.0;  // pixels
  double alpha = 0.9;             // speed tolerance, in [0.5, 1]
  double static_epsilon = 1.0;    // px/frame; GT motion below this is "static"
  double anti_static_ratio = 0.1;
  double anti_static_penalty = 0.2;
  SpatialMode spatial_mode = SpatialMode::full;

  void validate() const;  // throws InputError
};

// Added to the cosine denominator so a zero-length prediction is defined.
inline constexpr double kCosineGuard = 1e-8;

struct RewardBreakdown {
  double thinking_format = 0.0;
  double answer_format = 0.0;
  double spatial = 0.0;
  double mcp = 0.0;
  double total = 0.0;
};

/// R_ij = r_IoU + r_L1 + r_point with box centers standing in for keypoints.
int pair_reward(const BBox& pred, const BBox& gt, const RewardConfig& cfg);
int pair_reward(const BBox& pred, const Point& pred_point, const BBox& gt, const Point& gt_point,
                const RewardConfig& cfg);

/// Hungarian-matched spatial reward in [0, 3], normalized by max(M, N).
/// Both lists empty scores 3 (1 in iou_only mode); exactly one empty scores 0.
double spatial_reward(std::span<const BBox> preds, std::span<const BBox> gts,
                      const RewardConfig& cfg);

/// Motion consistency of one predicted step, anchored at the previous GT
/// center: A * S * P, or 1 when the GT barely moves.
double mcp_step_reward(const BBox& gt_prev, const BBox& gt_cur, const BBox& pred_cur,
                       const RewardConfig& cfg);

struct MotionScore {
  double value = 0.0;
  std::size_t steps = 0;  // 0 means undefined (fewer than two common frames)

  bool defined() const noexcept { return steps > 0; }
};

// Mean step reward over consecutive common frames.
MotionScore mcp_trajectory_reward(const Trajectory& gt, const Trajectory& pred,
                                  const RewardConfig& cfg);

// Groups predictions into per-identity tracks. Predictions without an
// object_id share one track keyed `fallback_id`. Later duplicates of a
// (frame, id) pair are ignored.
std::vector<Trajectory> tracks_from_predictions(std::span<const FramePrediction> preds,
                                                long long fallback_id);

RewardBreakdown score_rollout(const ParsedRollout& rollout, const QueryInstance& instance,
                              const RewardConfig& cfg);

}  // namespace motrl
