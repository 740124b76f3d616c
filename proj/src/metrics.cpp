#include "motrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "motrl/assignment.hpp"
#include "motrl/error.hpp"
#include "motrl/numeric_format.hpp"
#include "motrl/reward.hpp"

namespace motrl {

void MetricConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InputError("metric alpha must lie in (0, 1]");
  }
  if (!(static_epsilon > 0.0) || !(iou_match_threshold > 0.0)) {
    throw InputError("metric thresholds must be positive");
  }
}

std::optional<double> mcp_metric(const Trajectory& gt, const Trajectory& pred,
                                 const MetricConfig& cfg) {
  const auto frames = common_frames(gt, pred);
  if (frames.size() < 2) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const MotionVector dg = center(gt.boxes.at(frames[k])) - center(gt.boxes.at(frames[k - 1]));
    const MotionVector dp =
        center(pred.boxes.at(frames[k])) - center(pred.boxes.at(frames[k - 1]));
    const double v_gt = dg.norm();
    if (v_gt < cfg.static_epsilon) {
      sum += 1.0;
      continue;
    }
    const double v_pred = dp.norm();
    const double cos_theta = dp.dot(dg) / (v_pred * v_gt + kCosineGuard);
    const double a = std::clamp((1.0 + cos_theta) / 2.0, 0.0, 1.0);
    const double spread = cfg.alpha * v_gt;
    const double s = std::exp(-((v_pred - v_gt) * (v_pred - v_gt)) / (2.0 * spread * spread));
    sum += a * s;
  }
  return sum / static_cast<double>(frames.size() - 1);
}

std::optional<double> cle(const Trajectory& gt, const Trajectory& pred) {
  const auto frames = common_frames(gt, pred);
  if (frames.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (const auto f : frames) {
    sum += euclidean(center(gt.boxes.at(f)), center(pred.boxes.at(f)));
  }
  return sum / static_cast<double>(frames.size());
}

std::optional<double> motp(const Trajectory& gt, const Trajectory& pred, const MetricConfig& cfg) {
  const auto frames = common_frames(gt, pred);
  if (frames.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  std::size_t matched = 0;
  for (const auto f : frames) {
    const double o = iou(gt.boxes.at(f), pred.boxes.at(f));
    if (o >= cfg.iou_match_threshold) {
      sum += o;
      ++matched;
    }
  }
  return matched == 0 ? 0.0 : sum / static_cast<double>(matched);
}

std::optional<double> nde(const Trajectory& gt, const Trajectory& pred) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto f : common_frames(gt, pred)) {
    const BBox& g = gt.boxes.at(f);
    const double diag = diagonal(g);
    if (!(diag > 0.0)) {
      continue;
    }
    sum += euclidean(center(g), center(pred.boxes.at(f))) / diag;
    ++counted;
  }
  if (counted == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(counted);
}

MotaCounts mota_counts(std::span<const Trajectory> gts, std::span<const Trajectory> preds,
                       const MetricConfig& cfg) {
  std::set<long long> frames;
  for (const auto& t : gts) {
    for (const auto& [f, _] : t.boxes) frames.insert(f);
  }
  for (const auto& t : preds) {
    for (const auto& [f, _] : t.boxes) frames.insert(f);
  }

  MotaCounts counts;
  std::map<long long, long long> last_match;  // gt id -> pred id, most recent
  std::map<long long, long long> prev_frame;  // correspondences of the previous frame
  for (const auto frame : frames) {
    std::map<long long, BBox> g;
    std::map<long long, BBox> p;
    for (const auto& t : gts) {
      if (auto it = t.boxes.find(frame); it != t.boxes.end()) g.emplace(t.object_id, it->second);
    }
    for (const auto& t : preds) {
      if (auto it = t.boxes.find(frame); it != t.boxes.end()) p.emplace(t.object_id, it->second);
    }
    counts.gt_detections += g.size();

    std::map<long long, long long> current;
    std::set<long long> used_pred;
    for (const auto& [gid, pid] : prev_frame) {
      const auto gi = g.find(gid);
      const auto pi = p.find(pid);
      if (gi != g.end() && pi != p.end() &&
          iou(gi->second, pi->second) >= cfg.iou_match_threshold) {
        current.emplace(gid, pid);
        used_pred.insert(pid);
      }
    }

    std::vector<long long> free_g;
    std::vector<long long> free_p;
    for (const auto& [gid, _] : g) {
      if (!current.contains(gid)) free_g.push_back(gid);
    }
    for (const auto& [pid, _] : p) {
      if (!used_pred.contains(pid)) free_p.push_back(pid);
    }
    if (!free_g.empty() && !free_p.empty()) {
      // A gated pair costs more than any set of admissible pairs, so the
      // number of admissible matches is maximized first.
      const double gated = static_cast<double>(std::min(free_g.size(), free_p.size())) + 1.0;
      CostMatrix cost(free_g.size(), free_p.size());
      for (std::size_t i = 0; i < free_g.size(); ++i) {
        for (std::size_t j = 0; j < free_p.size(); ++j) {
          const double o = iou(g.at(free_g[i]), p.at(free_p[j]));
          cost(i, j) = o >= cfg.iou_match_threshold ? 1.0 - o : gated;
        }
      }
      for (const auto& [i, j] : hungarian(cost).pairs) {
        if (cost(i, j) >= gated) {
          continue;
        }
        const long long gid = free_g[i];
        const long long pid = free_p[j];
        if (const auto it = last_match.find(gid); it != last_match.end() && it->second != pid) {
          ++counts.id_switches;
        }
        current.emplace(gid, pid);
        used_pred.insert(pid);
      }
    }

    for (const auto& [gid, pid] : current) {
      last_match[gid] = pid;
    }
    counts.matches += current.size();
    counts.false_negatives += g.size() - current.size();
    counts.false_positives += p.size() - current.size();
    prev_frame = std::move(current);
  }
  return counts;
}

std::optional<double> mota(std::span<const Trajectory> gts, std::span<const Trajectory> preds,
                           const MetricConfig& cfg) {
  const auto c = mota_counts(gts, preds, cfg);
  if (c.gt_detections == 0) {
    return std::nullopt;
  }
  const double errors =
      static_cast<double>(c.false_negatives + c.false_positives + c.id_switches);
  return 1.0 - errors / static_cast<double>(c.gt_detections);
}

namespace {

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

InstanceMetrics evaluate_instance(const QueryInstance& instance,
                                  std::span<const FramePrediction> predictions,
                                  const MetricConfig& cfg) {
  InstanceMetrics row;
  row.instance_id = instance.instance_id;
  row.source_sequence = instance.source_sequence;

  std::vector<Trajectory> gts;
  for (const auto& [id, traj] : instance.gt_trajectories) {
    gts.push_back(traj);
  }
  const long long fallback_id = gts.empty() ? 0 : gts.front().object_id;
  const auto preds = tracks_from_predictions(predictions, fallback_id);
  row.mota = mota(gts, preds, cfg);

  std::vector<std::optional<std::size_t>> match(gts.size());
  if (!gts.empty() && !preds.empty()) {
    CostMatrix cost(preds.size(), gts.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      for (std::size_t j = 0; j < gts.size(); ++j) {
        double overlap = 0.0;
        for (const auto& [frame, gbox] : gts[j].boxes) {
          if (const auto it = preds[i].boxes.find(frame); it != preds[i].boxes.end()) {
            overlap += iou(gbox, it->second);
          }
        }
        cost(i, j) = 1.0 - overlap / std::max<double>(1.0, static_cast<double>(gts[j].boxes.size()));
      }
    }
    for (const auto& [i, j] : hungarian(cost).pairs) {
      match[j] = i;
    }
  }

  std::vector<double> mcps, motps, cles, ndes;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    const std::string who = "object " + std::to_string(gts[j].object_id);
    if (!match[j]) {
      row.flags.push_back(who + ": no predicted track");
      continue;
    }
    const Trajectory& pred = preds[*match[j]];
    row.frames_evaluated += common_frames(gts[j], pred).size();
    if (auto v = mcp_metric(gts[j], pred, cfg)) {
      mcps.push_back(*v);
    } else {
      row.flags.push_back(who + ": mcp undefined (fewer than 2 common frames)");
    }
    if (auto v = motp(gts[j], pred, cfg)) motps.push_back(*v);
    if (auto v = cle(gts[j], pred)) {
      cles.push_back(*v);
    } else {
      row.flags.push_back(who + ": no common frames");
    }
    if (auto v = nde(gts[j], pred)) ndes.push_back(*v);
  }
  row.mcp = mean_of(mcps);
  row.motp = mean_of(motps);
  row.cle_px = mean_of(cles);
  row.nde = mean_of(ndes);
  return row;
}

MetricReport aggregate(std::vector<InstanceMetrics> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  MetricReport report;
  std::vector<double> mcps, motps, cles, ndes, motas;
  for (const auto& r : rows) {
    if (r.mcp) mcps.push_back(*r.mcp);
    if (r.motp) motps.push_back(*r.motp);
    if (r.cle_px) cles.push_back(*r.cle_px);
    if (r.nde) ndes.push_back(*r.nde);
    if (r.mota) motas.push_back(*r.mota);
    report.frames_evaluated += r.frames_evaluated;
  }
  report.mcp = mean_of(mcps);
  report.motp = mean_of(motps);
  report.cle_px = mean_of(cles);
  report.nde = mean_of(ndes);
  report.mota = mean_of(motas);
  report.per_sequence = std::move(rows);
  return report;
}

MetricReport evaluate_corpus(std::span<const EvaluationItem> items, const MetricConfig& cfg) {
  std::vector<InstanceMetrics> rows;
  rows.reserve(items.size());
  for (const auto& item : items) {
    if (item.instance == nullptr) {
      throw InvariantError("evaluation item without an instance");
    }
    rows.push_back(evaluate_instance(*item.instance, item.predictions, cfg));
  }
  return aggregate(std::move(rows));
}

namespace {

using ojson = nlohmann::ordered_json;

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string optional_text(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("null");
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
  ojson corpus;
  corpus["mcp"] = optional_json(report.mcp);
  corpus["motp"] = optional_json(report.motp);
  corpus["cle_px"] = optional_json(report.cle_px);
  corpus["nde"] = optional_json(report.nde);
  corpus["mota"] = optional_json(report.mota);
  corpus["frames_evaluated"] = report.frames_evaluated;
  corpus["instances"] = report.per_sequence.size();

  ojson rows = ojson::array();
  for (const auto& r : report.per_sequence) {
    ojson row;
    row["instance_id"] = r.instance_id;
    row["source_sequence"] = r.source_sequence;
    row["mcp"] = optional_json(r.mcp);
    row["motp"] = optional_json(r.motp);
    row["cle_px"] = optional_json(r.cle_px);
    row["nde"] = optional_json(r.nde);
    row["mota"] = optional_json(r.mota);
    row["frames_evaluated"] = r.frames_evaluated;
    row["flags"] = r.flags;
    rows.push_back(std::move(row));
  }
  ojson doc;
  doc["corpus"] = std::move(corpus);
  doc["per_sequence"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string report_to_text(const MetricReport& report) {
  std::ostringstream out;
  out << "corpus mcp=" << optional_text(report.mcp) << " motp=" << optional_text(report.motp)
      << " cle_px=" << optional_text(report.cle_px) << " nde=" << optional_text(report.nde)
      << " mota=" << optional_text(report.mota) << " frames=" << report.frames_evaluated
      << " instances=" << report.per_sequence.size() << '\n';
  for (const auto& r : report.per_sequence) {
    out << r.instance_id << " sequence=" << r.source_sequence << " mcp=" << optional_text(r.mcp)
        << " motp=" << optional_text(r.motp) << " cle_px=" << optional_text(r.cle_px)
        << " nde=" << optional_text(r.nde) << " mota=" << optional_text(r.mota)
        << " frames=" << r.frames_evaluated;
    for (const auto& f : r.flags) {
      out << " [" << f << ']';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace motrl
