#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "motrl/assignment.hpp"
#include "motrl/dataset.hpp"
#include "motrl/error.hpp"
#include "motrl/metrics.hpp"
#include "motrl/policy.hpp"
#include "motrl/reward.hpp"
#include "motrl/structured_output.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace motrl;
using namespace motrl::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Collects the first few failures of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(count_) + " failure(s)";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "motrl");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void hungarian_optimality(Check& c) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 6), small(0, 4), dyadic(0, 4096);
  const auto start = Clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = dim(rng), n = dim(rng);
    std::vector<std::vector<double>> raw(m, std::vector<double>(n));
    CostMatrix cost(m, n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        // Integer and dyadic entries keep every partial sum exact; the small
        // integer range forces many tied optima.
        raw[i][j] = trial % 2 == 0 ? small(rng) : dyadic(rng) / 1024.0;
        cost(i, j) = raw[i][j];
      }
    }
    const auto got = hungarian(cost);
    const auto want = brute_force_assignment(raw);
    c.expect(got.total_cost(cost) == want.cost,
             "trial " + std::to_string(trial) + " cost " + fmt(got.total_cost(cost)) + " vs " +
                 fmt(want.cost));
    c.expect(got.pairs.size() == std::min(m, n), "trial " + std::to_string(trial) + " size");
  }
  const double t = seconds_since(start);
  c.expect(t < 5.0, "runtime " + fmt(t) + " s");
}

void spatial_reward_criterion(Check& c) {
  const RewardConfig cfg;
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> count(0, 6);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    std::vector<BBox> gts;
    for (int k = 0; k < n; ++k) gts.push_back(random_box(rng));
    const double same = spatial_reward(gts, gts, cfg);
    c.expect(same == 3.0, "identical lists scored " + fmt(same));

    std::vector<BBox> preds;
    for (const auto& g : gts) {
      std::uniform_real_distribution<double> jitter(-6.0, 6.0);
      preds.push_back({g.x1 + jitter(rng), g.y1 + jitter(rng), g.x2 + jitter(rng),
                       g.y2 + jitter(rng)});
    }
    if (count(rng) % 2 == 0) preds.push_back(random_box(rng));
    const double base = spatial_reward(preds, gts, cfg);
    auto shuffled_p = preds;
    auto shuffled_g = gts;
    std::shuffle(shuffled_p.begin(), shuffled_p.end(), rng);
    std::shuffle(shuffled_g.begin(), shuffled_g.end(), rng);
    const double moved = spatial_reward(shuffled_p, shuffled_g, cfg);
    c.expect(moved == base, "shuffle changed " + fmt(base) + " to " + fmt(moved));
  }
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<BBox> preds, gts;
    const int np = count(rng), ng = count(rng);
    for (int k = 0; k < np; ++k) preds.push_back(random_grid_box(rng));
    for (int k = 0; k < ng; ++k) gts.push_back(random_grid_box(rng));
    const double v = spatial_reward(preds, gts, cfg);
    c.expect(v >= 0.0 && v <= 3.0, "out of range " + fmt(v));
  }
}

void mcp_reward_criterion(Check& c) {
  const RewardConfig cfg;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(0.0, 1000.0), tiny(-0.5, 0.5), angle(0.0, 6.283185307179586),
      speed(5.0, 40.0), wide(-60.0, 60.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = pos(rng), y = pos(rng);
    const BBox prev = box_at(x, y);
    const BBox cur = box_at(x + tiny(rng), y + tiny(rng));
    const double v = mcp_step_reward(prev, cur, box_at(pos(rng), pos(rng)), cfg);
    c.expect(v == 1.0, "static step gave " + fmt(v));

    const double th = angle(rng), sp = speed(rng);
    const BBox moved = box_at(x + sp * std::cos(th), y + sp * std::sin(th));
    const double perfect = mcp_step_reward(prev, moved, moved, cfg);
    c.expect(std::abs(perfect - 1.0) <= 1e-9, "perfect step gave " + fmt(perfect));

    const double frozen = mcp_step_reward(prev, moved, prev, cfg);
    c.expect(frozen <= 0.2, "frozen step gave " + fmt(frozen));
  }
  for (int trial = 0; trial < 10000; ++trial) {
    const double x = pos(rng), y = pos(rng);
    const double gx = x + wide(rng), gy = y + wide(rng), px = x + wide(rng), py = y + wide(rng);
    const double v = mcp_step_reward(box_at(x, y), box_at(gx, gy), box_at(px, py), cfg);
    c.expect(v >= 0.0 && v <= 1.0, "out of range " + fmt(v));
    const double oracle = mcp_step_oracle(x, y, gx, gy, px, py, cfg.alpha, cfg.static_epsilon);
    c.expect(std::abs(v - oracle) <= 1e-12, "oracle mismatch " + fmt(v) + " vs " + fmt(oracle));
    const double dx = std::round(wide(rng) * 10.0), dy = std::round(wide(rng) * 10.0);
    const double shifted = mcp_step_reward(box_at(x + dx, y + dy), box_at(gx + dx, gy + dy),
                                           box_at(px + dx, py + dy), cfg);
    c.expect(std::abs(shifted - v) <= 1e-9, "translation changed " + fmt(v) + " to " + fmt(shifted));
  }
}

void mcp_metric_criterion(Check& c) {
  const MetricConfig cfg;
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> pos(100.0, 900.0), vel(-20.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    Trajectory gt;
    double x = pos(rng), y = pos(rng);
    for (long long f = 1; f <= 6; ++f) {
      gt.boxes[f] = box_at(x, y);
      double vx = vel(rng), vy = vel(rng);
      while (std::hypot(vx, vy) < 5.0) vx += 5.0;
      x += vx;
      y += vy;
    }
    const auto v = mcp_metric(gt, gt, cfg);
    c.expect(v.has_value() && std::abs(*v - 1.0) <= 1e-9,
             "perfect trajectory gave " + (v ? fmt(*v) : std::string("undefined")));
  }
  // GT moves 10 px per frame, the prediction never moves: cos = 0 so A = 1/2,
  // and S = exp(-(0 - 10)^2 / (2 (0.9 * 10)^2)) = exp(-1 / 1.62).
  const double hand = 0.5 * std::exp(-1.0 / 1.62);
  Trajectory gt, still;
  gt.boxes[1] = box_at(0, 0);
  gt.boxes[2] = box_at(10, 0);
  still.boxes[1] = box_at(0, 0);
  still.boxes[2] = box_at(0, 0);
  const auto v = mcp_metric(gt, still, cfg);
  c.expect(v.has_value() && std::abs(*v - hand) <= 1e-6,
           "stationary step " + (v ? fmt(*v) : std::string("undefined")) + " vs " + fmt(hand));
}

void grpo_advantages_criterion(Check& c) {
  const PolicyConfig cfg;
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> reward(0.0, 6.0), shift(-100.0, 100.0),
      scale(0.01, 100.0);
  std::uniform_int_distribution<int> size(2, 16);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(size(rng));
    for (auto& x : r) x = reward(rng);
    const auto a = grpo_advantages(r, cfg);
    double mean = 0.0;
    for (double x : a) mean += x;
    mean /= a.size();
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / a.size());
    c.expect(std::abs(mean) < 1e-9, "mean " + fmt(mean));
    c.expect(std::abs(sd - 1.0) < 1e-9, "std " + fmt(sd));

    const double s = shift(rng), k = scale(rng);
    std::vector<double> shifted = r, scaled = r;
    for (auto& x : shifted) x += s;
    for (auto& x : scaled) x *= k;
    const auto as = grpo_advantages(shifted, cfg);
    const auto ak = grpo_advantages(scaled, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
      c.expect(std::abs(as[i] - a[i]) < 1e-9, "shift changed advantage " + fmt(as[i] - a[i]));
      c.expect(std::abs(ak[i] - a[i]) < 1e-9, "scale changed advantage " + fmt(ak[i] - a[i]));
    }
  }
  const std::vector<double> r123{1.0, 2.0, 3.0};
  const auto a = grpo_advantages(r123, cfg);
  const double hand = 1.0 / std::sqrt(2.0 / 3.0);
  c.expect(std::abs(a[0] + hand) < 1e-4 && std::abs(a[1]) < 1e-4 && std::abs(a[2] - hand) < 1e-4,
           "[1,2,3] gave " + fmt(a[0]) + ", " + fmt(a[1]) + ", " + fmt(a[2]));
  for (double level : {0.0, 1.0, 2.5, 6.0}) {
    const std::vector<double> flat(5, level);
    const auto z = grpo_advantages(flat, cfg);
    c.expect(std::all_of(z.begin(), z.end(), [](double x) { return x == 0.0; }),
             "all-equal group at " + fmt(level) + " not zero");
  }
}

void clipped_surrogate_criterion(Check& c) {
  const double up = clipped_surrogate(1.5, 1.0, 0.2);
  const double down = clipped_surrogate(0.5, -1.0, 0.2);
  c.expect(up == 1.2, "rho 1.5, A 1 gave " + fmt(up));
  c.expect(down == -0.8, "rho 0.5, A -1 gave " + fmt(down));
  const double eps = 0.2;
  for (int i = 0; i < 100; ++i) {
    const double rho = 0.02 + 2.98 * i / 99.0;
    for (int j = 0; j < 100; ++j) {
      const double adv = -3.0 + 6.0 * j / 99.0;
      const double v = clipped_surrogate(rho, adv, eps);
      const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv;
      const double raw = rho * adv;
      c.expect(v <= raw && v <= clipped && (v == raw || v == clipped),
               "rho " + fmt(rho) + " A " + fmt(adv) + " gave " + fmt(v));
    }
  }
}

void tapo_criterion(Check& c) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> reward(0.0, 6.0), logp(-5.0, -0.1), drift(-0.3, 0.3);
  std::uniform_int_distribution<int> size(2, 8);
  for (int trial = 0; trial < 100; ++trial) {
    PolicyConfig cfg;
    cfg.tapo_gamma = 0.0;
    RolloutGroup g;
    const int n = size(rng);
    g.rewards.resize(n);
    g.logp_new.emplace(n);
    g.logp_old.emplace(n);
    g.logp_ref.emplace(n);
    g.logp_masked.emplace(n);
    for (int i = 0; i < n; ++i) {
      g.rewards[i] = reward(rng);
      (*g.logp_old)[i] = logp(rng);
      (*g.logp_new)[i] = (*g.logp_old)[i] + drift(rng);
      (*g.logp_ref)[i] = (*g.logp_old)[i] + drift(rng);
      (*g.logp_masked)[i] = logp(rng);
    }
    const auto adv = grpo_advantages(g.rewards, cfg);
    const double j_grpo = grpo_objective(g, adv, cfg);
    const double j_tapo = tapo_objective(g, adv, cfg);
    c.expect(std::memcmp(&j_grpo, &j_tapo, sizeof(double)) == 0,
             "gamma 0 gave " + fmt(j_tapo) + " vs " + fmt(j_grpo));
  }
  PolicyConfig frozen;
  frozen.tapo_keep_prob = 0.0;
  for (std::size_t frames : {1u, 2u, 6u, 32u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto mask = build_frame_mask(frames, frozen, seed);
      c.expect(mask.keep.size() == frames && mask.keep[0], "mask shape");
      for (std::size_t t = 0; t < frames; ++t) {
        c.expect(mask.source_of(t) == 0,
                 "frame " + std::to_string(t) + " reads " + std::to_string(mask.source_of(t)));
      }
    }
  }
  const PolicyConfig cfg;
  bool differs = false;
  const auto reference = build_frame_mask(64, cfg, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = build_frame_mask(64, cfg, seed);
    const auto b = build_frame_mask(64, cfg, seed);
    c.expect(a.keep == b.keep, "seed " + std::to_string(seed) + " not reproducible");
    c.expect(a.keep[0], "frame 0 dropped");
    differs = differs || a.keep != reference.keep;
  }
  c.expect(differs, "seed has no effect on the mask");
}

void parsing_criterion(Check& c) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> count(0, 8), frame(0, 100000), id(1, 50);
  std::uniform_real_distribution<double> coord(-500.0, 4000.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool multi = trial % 2 == 1;
    std::vector<FramePrediction> preds(count(rng));
    for (auto& p : preds) {
      p.frame = frame(rng);
      if (multi) p.object_id = id(rng);
      const double x = coord(rng), y = coord(rng);
      p.bbox = {x, y, x + std::abs(coord(rng)) / 4.0, y + std::abs(coord(rng)) / 4.0};
    }
    const auto text = make_rollout_text("reasoning", serialize_predictions(preds, multi));
    const auto parsed = parse_rollout(text);
    c.expect(parsed.parse_mode == ParseMode::strict, "trial " + std::to_string(trial) + " not strict");
    c.expect(parsed.predictions == preds, "trial " + std::to_string(trial) + " round trip differs");
  }
  for (const auto& mc : malformation_corpus()) {
    const auto parsed = parse_rollout(mc.text);
    c.expect(parsed.parse_mode == ParseMode::fallback, mc.name + " not recovered by fallback");
    c.expect(answer_format_reward(parsed) == 0.0, mc.name + " kept answer format credit");
    c.expect(parsed.predictions == mc.expected, mc.name + " boxes differ");
  }
  const std::string answer = "[{\"frame\": 1, \"bbox\": [0, 0, 10, 10]}]";
  struct Row {
    std::string name;
    std::string text;
    double think;
  };
  const std::vector<Row> table{
      {"correct tags", "<think>reasoning</think>\n<answer>" + answer + "</answer>", 1.0},
      {"missing think", "<answer>" + answer + "</answer>", 0.0},
      {"missing answer", "<think>reasoning</think>", 0.0},
      {"no tags", answer, 0.0},
      {"mismatched close", "<think>reasoning</answer><answer>" + answer + "</answer>", 0.0},
      {"answer before think", "<answer>" + answer + "</answer><think>reasoning</think>", 0.0},
      {"duplicated think", "<think>a</think><think>b</think><answer>" + answer + "</answer>", 0.0},
      {"wrong case", "<THINK>reasoning</THINK><answer>" + answer + "</answer>", 0.0},
  };
  for (const auto& row : table) {
    const auto parsed = parse_rollout(row.text);
    const double got = thinking_format_reward(parsed);
    c.expect(got == row.think, row.name + " scored " + fmt(got));
  }
  const auto good = parse_rollout(table.front().text);
  c.expect(answer_format_reward(good) == 1.0, "strict answer lost format credit");
  const auto failed = parse_rollout("<think>r</think><answer>no boxes here</answer>");
  c.expect(failed.parse_mode == ParseMode::failed && answer_format_reward(failed) == 0.0,
           "unparseable answer not failed");
}

void dataset_criterion(Check& c) {
  TempDir tmp;
  std::vector<std::string> seqs;
  for (int k = 0; k < 40; ++k) seqs.push_back("S" + std::to_string(k));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (double ratio : {0.1, 0.5, 0.8, 0.95}) {
      const auto m = split_sequences(seqs, ratio, seed);
      std::set<std::string> all(m.train_sequences.begin(), m.train_sequences.end());
      for (const auto& s : m.test_sequences) c.expect(all.insert(s).second, "sequence " + s + " in both splits");
      c.expect(all.size() == seqs.size(), "split lost sequences");
    }
  }

  std::vector<SyntheticObject> walkers{
      {1, 100, 100, 4, 1, 40, 90, {}}, {2, 400, 120, -3, 2, 50, 100, {}}, {3, 700, 90, 1, -2, 30, 80, {}}};
  const auto rows = synthetic_sequence(walkers, 20);
  for (const auto kind : {QueryKind::single, QueryKind::multi}) {
    for (int window : {5, 6}) {
      BuildConfig cfg;
      cfg.kind = kind;
      cfg.window = window;
      const auto r = build_instances(rows, "WIN", cfg, 1);
      c.expect(!r.instances.empty(), "no instances for window " + std::to_string(window));
      for (const auto& inst : r.instances) {
        c.expect(inst.future_frames.size() == static_cast<std::size_t>(window),
                 inst.instance_id + " window " + std::to_string(inst.future_frames.size()));
        for (const auto& [oid, traj] : inst.gt_trajectories) {
          c.expect(traj.boxes.size() == static_cast<std::size_t>(window), inst.instance_id + " track length");
        }
      }
    }
  }
  for (int window : {4, 7}) {
    BuildConfig cfg;
    cfg.window = window;
    bool rejected = false;
    try {
      build_instances(rows, "WIN", cfg, 1);
    } catch (const InputError&) {
      rejected = true;
    }
    c.expect(rejected, "window " + std::to_string(window) + " accepted");
  }

  BuildConfig mcfg;
  mcfg.kind = QueryKind::multi;
  const auto built = build_instances(rows, "EXP", mcfg, 2);
  std::map<std::string, std::vector<FramePrediction>> preds;
  for (const auto& inst : built.instances) preds[inst.instance_id] = perfect_predictions(inst, true);
  export_mot_segments(built.instances, preds, tmp.path() / "export", true);
  for (const auto& inst : built.instances) {
    const auto back = parse_mot_ground_truth(tmp.path() / "export" / "EXP" / (inst.instance_id + ".txt"));
    std::size_t expected_rows = 0;
    for (const auto& [oid, traj] : inst.gt_trajectories) {
      expected_rows += traj.boxes.size();
    }
    c.expect(back.size() == expected_rows, inst.instance_id + " row count");
    for (const auto& row : back) {
      const auto it = inst.gt_trajectories.find(row.object_id);
      const bool known = it != inst.gt_trajectories.end() && it->second.boxes.count(row.frame);
      c.expect(known && xywh_to_xyxy(row.box) == it->second.boxes.at(row.frame),
               inst.instance_id + " frame " + std::to_string(row.frame) + " differs");
    }
  }

  const auto start = Clock::now();
  write_synthetic_mot(tmp.path() / "mot", 3, 40, 21);
  const auto ds = tmp.path() / "ds";
  c.expect(run_cli({"build-dataset", (tmp.path() / "mot").string(), "--out", ds.string(), "--kind",
                    "single", "--kind", "multi", "--kind", "occlusion", "--seed", "4"}) == 0,
           "build-dataset failed");
  std::ostringstream lines;
  for (const char* split : {"train", "test"}) {
    for (const auto& inst : read_instances_file((ds / (std::string(split) + ".jsonl")).string())) {
      json line;
      line["instance_id"] = inst.instance_id;
      line["predictions"] = json::parse(serialize_predictions(perfect_predictions(inst, true), true));
      lines << line.dump() << '\n';
    }
    std::ofstream(tmp.path() / (std::string(split) + "_preds.jsonl")) << lines.str();
    lines.str("");
    std::string report;
    const int code = run_cli({"evaluate", "--instances", (ds / (std::string(split) + ".jsonl")).string(),
                              "--predictions", (tmp.path() / (std::string(split) + "_preds.jsonl")).string(),
                              "--format", "structured"},
                             &report);
    c.expect(code == 0, std::string("evaluate ") + split + " failed");
    if (code == 0) {
      const auto j = json::parse(report);
      c.expect(j["corpus"]["mota"].is_number() && j["corpus"]["mota"].get<double>() == 1.0, std::string(split) + " mota not 1");
    }
  }
  const double t = seconds_since(start);
  c.expect(t < 10.0, "build + evaluate took " + fmt(t) + " s");
}

void cli_determinism_criterion(Check& c) {
  TempDir tmp;
  write_synthetic_mot(tmp.path() / "mot", 4, 40, 31);
  const auto ds = tmp.path() / "ds";
  c.expect(run_cli({"build-dataset", (tmp.path() / "mot").string(), "--out", ds.string(), "--kind",
                    "single", "--kind", "multi", "--seed", "8"}) == 0,
           "build-dataset failed");
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> jitter(-8.0, 8.0);
  std::ostringstream lines;
  for (const auto& inst : read_instances_file((ds / "train.jsonl").string())) {
    auto preds = perfect_predictions(inst, true);
    for (auto& p : preds) {
      const double dx = jitter(rng), dy = jitter(rng);
      p.bbox = {p.bbox.x1 + dx, p.bbox.y1 + dy, p.bbox.x2 + dx, p.bbox.y2 + dy};
    }
    json line;
    line["instance_id"] = inst.instance_id;
    line["predictions"] = json::parse(serialize_predictions(preds, true));
    lines << line.dump() << '\n';
  }
  std::ofstream(tmp.path() / "preds.jsonl") << lines.str();
  for (const char* format : {"text", "structured"}) {
    std::vector<std::string> outputs;
    for (const char* jobs : {"1", "8"}) {
      const auto out = tmp.path() / (std::string("report-") + format + "-" + jobs);
      const int code = run_cli({"evaluate", "--instances", (ds / "train.jsonl").string(), "--predictions",
                                (tmp.path() / "preds.jsonl").string(), "--jobs", jobs, "--format", format,
                                "--out", out.string()});
      c.expect(code == 0, std::string("evaluate --jobs ") + jobs + " failed");
      outputs.push_back(slurp(out));
    }
    c.expect(!outputs[0].empty() && outputs[0] == outputs[1],
             std::string(format) + " reports differ between --jobs 1 and 8");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"hungarian-optimality", hungarian_optimality},
      {"spatial-reward", spatial_reward_criterion},
      {"mcp-reward", mcp_reward_criterion},
      {"mcp-metric", mcp_metric_criterion},
      {"grpo-advantages", grpo_advantages_criterion},
      {"clipped-surrogate", clipped_surrogate_criterion},
      {"tapo", tapo_criterion},
      {"parsing", parsing_criterion},
      {"dataset", dataset_criterion},
      {"cli-determinism", cli_determinism_criterion},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (c.ok()) {
      std::cout << "PASS " << name << '\n';
    } else {
      ++failed;
      std::cout << "FAIL " << name << ": " << c.summary() << '\n';
    }
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
