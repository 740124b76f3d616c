#include "motrl/reward.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "motrl/assignment.hpp"
#include "motrl/error.hpp"

namespace motrl {

void RewardConfig::validate() const {
  if (!(iou_threshold > 0.0) || !(l1_threshold > 0.0) || !(point_threshold > 0.0) ||
      !(static_epsilon > 0.0) || !(anti_static_ratio > 0.0)) {
    throw InputError("reward thresholds must be positive");
  }
  if (!(alpha >= 0.5 && alpha <= 1.0)) {
    throw InputError("reward alpha must lie in [0.5, 1.0]");
  }
  if (!(anti_static_penalty > 0.0 && anti_static_penalty <= 1.0)) {
    throw InputError("anti_static_penalty must lie in (0, 1]");
  }
}

int pair_reward(const BBox& pred, const Point& pred_point, const BBox& gt, const Point& gt_point,
                const RewardConfig& cfg) {
  const int r_iou = iou(pred, gt) > cfg.iou_threshold ? 1 : 0;
  const int r_l1 = mean_l1(pred, gt) < cfg.l1_threshold ? 1 : 0;
  const int r_point =
      (euclidean(pred_point, gt_point) < cfg.point_threshold && point_in_box(pred_point, pred))
          ? 1
          : 0;
  return r_iou + r_l1 + r_point;
}

int pair_reward(const BBox& pred, const BBox& gt, const RewardConfig& cfg) {
  return pair_reward(pred, center(pred), gt, center(gt), cfg);
}

double spatial_reward(std::span<const BBox> preds, std::span<const BBox> gts,
                      const RewardConfig& cfg) {
  const bool iou_only = cfg.spatial_mode == SpatialMode::iou_only;
  if (preds.empty() && gts.empty()) {
    return iou_only ? 1.0 : 3.0;
  }
  if (preds.empty() || gts.empty()) {
    return 0.0;
  }
  const std::size_t m = preds.size();
  const std::size_t n = gts.size();
  CostMatrix cost(m, n);
  std::vector<double> reward(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (iou_only) {
        const double o = iou(preds[i], gts[j]);
        reward[i * n + j] = o > cfg.iou_threshold ? 1.0 : 0.0;
        cost(i, j) = 1.0 - o;
      } else {
        const int r = pair_reward(preds[i], gts[j], cfg);
        reward[i * n + j] = r;
        cost(i, j) = 3.0 - r;
      }
    }
  }
  double sum = 0.0;
  for (const auto& [i, j] : hungarian(cost).pairs) {
    sum += reward[i * n + j];
  }
  return sum / static_cast<double>(std::max(m, n));
}

double mcp_step_reward(const BBox& gt_prev, const BBox& gt_cur, const BBox& pred_cur,
                       const RewardConfig& cfg) {
  const Point anchor = center(gt_prev);
  const MotionVector dg = center(gt_cur) - anchor;
  const MotionVector dp = center(pred_cur) - anchor;
  const double v_gt = dg.norm();
  const double v_pred = dp.norm();
  if (v_gt < cfg.static_epsilon) {
    return 1.0;
  }
  const double cos_theta = dp.dot(dg) / (v_pred * v_gt + kCosineGuard);
  const double a = std::clamp((1.0 + cos_theta) / 2.0, 0.0, 1.0);
  const double spread = cfg.alpha * v_gt;
  const double s = std::exp(-((v_pred - v_gt) * (v_pred - v_gt)) / (2.0 * spread * spread));
  const double p = v_pred < cfg.anti_static_ratio * v_gt ? cfg.anti_static_penalty : 1.0;
  return a * s * p;
}

MotionScore mcp_trajectory_reward(const Trajectory& gt, const Trajectory& pred,
                                  const RewardConfig& cfg) {
  const auto frames = common_frames(gt, pred);
  if (frames.size() < 2) {
    return {};
  }
  double sum = 0.0;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    sum += mcp_step_reward(gt.boxes.at(frames[k - 1]), gt.boxes.at(frames[k]),
                           pred.boxes.at(frames[k]), cfg);
  }
  const std::size_t steps = frames.size() - 1;
  return {sum / static_cast<double>(steps), steps};
}

std::vector<Trajectory> tracks_from_predictions(std::span<const FramePrediction> preds,
                                                long long fallback_id) {
  std::map<long long, Trajectory> by_id;
  for (const auto& p : preds) {
    const long long id = p.object_id.value_or(fallback_id);
    auto& traj = by_id[id];
    traj.object_id = id;
    traj.boxes.emplace(p.frame, p.bbox);
  }
  std::vector<Trajectory> out;
  out.reserve(by_id.size());
  for (auto& [id, traj] : by_id) {
    out.push_back(std::move(traj));
  }
  return out;
}

namespace {

double instance_spatial(std::span<const FramePrediction> preds, const QueryInstance& inst,
                        const RewardConfig& cfg) {
  if (inst.future_frames.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const long long frame : inst.future_frames) {
    std::vector<BBox> p;
    std::vector<BBox> g;
    for (const auto& fp : preds) {
      if (fp.frame == frame) {
        p.push_back(fp.bbox);
      }
    }
    for (const auto& [id, traj] : inst.gt_trajectories) {
      if (const auto it = traj.boxes.find(frame); it != traj.boxes.end()) {
        g.push_back(it->second);
      }
    }
    sum += spatial_reward(p, g, cfg);
  }
  return sum / static_cast<double>(inst.future_frames.size());
}

double instance_mcp(std::span<const FramePrediction> preds, const QueryInstance& inst,
                    const RewardConfig& cfg) {
  if (inst.gt_trajectories.empty()) {
    return 0.0;
  }
  const long long fallback_id = inst.gt_trajectories.begin()->first;
  const auto pred_tracks = tracks_from_predictions(preds, fallback_id);
  if (pred_tracks.empty()) {
    return 0.0;
  }
  std::vector<const Trajectory*> gt_tracks;
  for (const auto& [id, traj] : inst.gt_trajectories) {
    gt_tracks.push_back(&traj);
  }

  CostMatrix cost(pred_tracks.size(), gt_tracks.size());
  for (std::size_t i = 0; i < pred_tracks.size(); ++i) {
    for (std::size_t j = 0; j < gt_tracks.size(); ++j) {
      double agreement = 0.0;
      for (const auto& [frame, gbox] : gt_tracks[j]->boxes) {
        if (const auto it = pred_tracks[i].boxes.find(frame); it != pred_tracks[i].boxes.end()) {
          agreement += pair_reward(it->second, gbox, cfg);
        }
      }
      const double frames = std::max<double>(1.0, static_cast<double>(gt_tracks[j]->boxes.size()));
      cost(i, j) = 3.0 - agreement / frames;
    }
  }
  double sum = 0.0;
  for (const auto& [i, j] : hungarian(cost).pairs) {
    sum += mcp_trajectory_reward(*gt_tracks[j], pred_tracks[i], cfg).value;
  }
  return sum / static_cast<double>(std::max(pred_tracks.size(), gt_tracks.size()));
}

}  // namespace

RewardBreakdown score_rollout(const ParsedRollout& rollout, const QueryInstance& instance,
                              const RewardConfig& cfg) {
  RewardBreakdown b;
  b.thinking_format = thinking_format_reward(rollout);
  b.answer_format = answer_format_reward(rollout);
  if (rollout.parse_mode != ParseMode::failed) {
    b.spatial = instance_spatial(rollout.predictions, instance, cfg);
    b.mcp = instance_mcp(rollout.predictions, instance, cfg);
  }
  b.total = b.thinking_format + b.answer_format + b.spatial + b.mcp;
  return b;
}

}  // namespace motrl
