#include "motrl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "motrl/error.hpp"
#include "motrl/numeric_format.hpp"
#include "motrl/query_client.hpp"
#include "motrl/random.hpp"

namespace motrl {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view token, std::size_t line, const char* name) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  double v = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc{} || end != token.data() + token.size() ||
      !std::isfinite(v)) {
    throw ParseError(line, std::string("field '") + name + "' is not a number: '" +
                               std::string(token) + "'");
  }
  return v;
}

long long parse_whole(std::string_view token, std::size_t line, const char* name) {
  const double v = parse_real(token, line, name);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) {
    throw ParseError(line, std::string("field '") + name + "' is not an integer");
  }
  return static_cast<long long>(v);
}

}  // namespace

std::vector<MotDetection> parse_mot_text(std::string_view content) {
  std::vector<MotDetection> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) {
      end = content.size();
    }
    const auto line = trim(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                           : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 6 || fields.size() > 10) {
      throw ParseError(line_no, "expected 6 to 10 comma-separated fields, found " +
                                    std::to_string(fields.size()));
    }

    MotDetection d;
    d.frame = parse_whole(fields[0], line_no, "frame");
    d.object_id = parse_whole(fields[1], line_no, "id");
    d.box = {parse_real(fields[2], line_no, "x"), parse_real(fields[3], line_no, "y"),
             parse_real(fields[4], line_no, "w"), parse_real(fields[5], line_no, "h")};
    if (fields.size() > 6) d.confidence = parse_real(fields[6], line_no, "conf");
    if (fields.size() > 7) d.class_id = parse_whole(fields[7], line_no, "class");
    if (fields.size() > 8) d.visibility = parse_real(fields[8], line_no, "visibility");

    if (d.frame < 1) {
      throw ParseError(line_no, "frame numbers start at 1");
    }
    if (d.box.w < 0.0 || d.box.h < 0.0) {
      throw ParseError(line_no, "negative box size");
    }
    if (d.visibility < 0.0 || d.visibility > 1.0) {
      throw ParseError(line_no, "visibility outside [0, 1]");
    }
    out.push_back(d);
  }
  return out;
}

std::vector<MotDetection> parse_mot_ground_truth(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mot_text(buf.str());
}

std::vector<SequenceAnnotations> load_mot_directory(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw InputError("'" + root.string() + "' is not a directory");
  }
  std::vector<SequenceAnnotations> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    const auto gt = entry.path() / "gt" / "gt.txt";
    if (entry.is_directory() && fs::is_regular_file(gt)) {
      out.push_back({entry.path().filename().string(), parse_mot_ground_truth(gt)});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.sequence_id < b.sequence_id; });
  return out;
}

void BuildConfig::validate() const {
  if (window != 5 && window != 6) {
    throw InputError("window must be 5 or 6 future frames");
  }
  if (reference_stride < 1) {
    throw InputError("reference_stride must be positive");
  }
  if (multi_max_objects < 2) {
    throw InputError("multi_max_objects must be at least 2");
  }
  for (const double t : {visible_min, occlusion_reference_max, occlusion_later_min}) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw InputError("visibility thresholds must lie in [0, 1]");
    }
  }
}

namespace {

std::string pad_frame(long long frame) {
  std::string s = std::to_string(frame);
  if (s.size() < 6) {
    s.insert(0, 6 - s.size(), '0');
  }
  return s;
}

std::string make_instance_id(const std::string& seq, QueryKind kind, long long ref,
                             const std::vector<long long>& ids) {
  std::string id = seq + "-" + to_string(kind) + "-f" + pad_frame(ref) + "-o";
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k > 0) id += "_";
    id += std::to_string(ids[k]);
  }
  return id;
}

std::string box_text(const BBox& b) {
  return "[" + format_number(b.x1) + ", " + format_number(b.y1) + ", " + format_number(b.x2) +
         ", " + format_number(b.y2) + "]";
}

}  // namespace

BuildResult build_instances(const std::vector<MotDetection>& detections,
                            const std::string& sequence_id, const BuildConfig& cfg,
                            std::uint64_t seed) {
  cfg.validate();
  BuildResult result;
  if (detections.empty()) {
    result.diagnostics.push_back(sequence_id + ": no annotations");
    return result;
  }

  std::map<long long, std::map<long long, const MotDetection*>> by_frame;
  long long first = detections.front().frame;
  long long last = first;
  for (const auto& d : detections) {
    first = std::min(first, d.frame);
    last = std::max(last, d.frame);
    if (!d.ignorable()) {
      by_frame[d.frame][d.object_id] = &d;
    }
  }
  const long long window = cfg.window;
  if (last - first + 1 < window + 1) {
    result.diagnostics.push_back(sequence_id + ": spans " + std::to_string(last - first + 1) +
                                 " frames, fewer than window + 1 = " +
                                 std::to_string(window + 1));
    return result;
  }

  auto present_throughout = [&](long long id, long long ref) {
    for (long long f = ref + 1; f <= ref + window; ++f) {
      const auto it = by_frame.find(f);
      if (it == by_frame.end() || !it->second.contains(id)) {
        return false;
      }
    }
    return true;
  };
  auto visible_later = [&](long long id, long long ref) {
    for (long long f = ref + 1; f <= ref + window; ++f) {
      if (by_frame.at(f).at(id)->visibility > cfg.occlusion_later_min) {
        return true;
      }
    }
    return false;
  };

  auto make_instance = [&](long long ref, const std::vector<long long>& ids) {
    QueryInstance inst;
    inst.instance_id = make_instance_id(sequence_id, cfg.kind, ref, ids);
    inst.source_sequence = sequence_id;
    inst.query_kind = cfg.kind;
    inst.reference_frame = ref;
    for (long long f = ref + 1; f <= ref + window; ++f) {
      inst.future_frames.push_back(f);
    }
    for (const auto id : ids) {
      inst.reference_boxes[id] = xywh_to_xyxy(by_frame.at(ref).at(id)->box);
      Trajectory traj;
      traj.object_id = id;
      for (const auto f : inst.future_frames) {
        traj.boxes[f] = xywh_to_xyxy(by_frame.at(f).at(id)->box);
      }
      inst.gt_trajectories.emplace(id, std::move(traj));
    }
    return inst;
  };

  std::vector<QueryInstance> candidates;
  for (long long ref = first; ref + window <= last; ref += cfg.reference_stride) {
    const auto frame_it = by_frame.find(ref);
    if (frame_it == by_frame.end()) {
      continue;
    }
    std::vector<long long> eligible;
    for (const auto& [id, det] : frame_it->second) {
      if (!present_throughout(id, ref)) {
        continue;
      }
      switch (cfg.kind) {
        case QueryKind::single:
        case QueryKind::multi:
          if (det->visibility >= cfg.visible_min) eligible.push_back(id);
          break;
        case QueryKind::occlusion:
          if (det->visibility < cfg.occlusion_reference_max && visible_later(id, ref)) {
            eligible.push_back(id);
          }
          break;
      }
    }

    if (cfg.kind == QueryKind::multi) {
      if (eligible.size() < 2) {
        continue;
      }
      Rng rng(stable_hash(sequence_id + "#" + std::to_string(ref), seed));
      rng.shuffle(eligible);
      eligible.resize(std::min(eligible.size(), cfg.multi_max_objects));
      std::sort(eligible.begin(), eligible.end());
      candidates.push_back(make_instance(ref, eligible));
    } else {
      for (const auto id : eligible) {
        candidates.push_back(make_instance(ref, {id}));
      }
    }
  }

  if (cfg.max_instances_per_sequence > 0 && candidates.size() > cfg.max_instances_per_sequence) {
    Rng rng(stable_hash(sequence_id, seed));
    rng.shuffle(candidates);
    candidates.resize(cfg.max_instances_per_sequence);
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  for (auto& inst : candidates) {
    inst.query_text = template_query(inst, seed);
  }
  if (candidates.empty()) {
    result.diagnostics.push_back(sequence_id + ": no eligible reference frames for " +
                                 to_string(cfg.kind) + " queries");
  }
  result.instances = std::move(candidates);
  return result;
}

std::string template_query(const QueryInstance& draft, std::uint64_t seed) {
  const auto pick = stable_hash(draft.instance_id, seed);
  if (draft.reference_boxes.empty()) {
    return "Track the referenced object across the following frames.";
  }
  const auto& [first_id, first_box] = *draft.reference_boxes.begin();
  const std::string id = std::to_string(first_id);
  const std::string box = box_text(first_box);

  switch (draft.query_kind) {
    case QueryKind::single: {
      static constexpr int kCount = 3;
      switch (pick % kCount) {
        case 0:
          return "Track object " + id + ", located at " + box +
                 " in the reference frame, through the following frames.";
        case 1:
          return "Follow the target with ID " + id + " starting from " + box +
                 " in the reference frame and give its box in every later frame.";
        default:
          return "Object " + id + " is at " + box +
                 " in the reference frame. Where is it in each of the next frames?";
      }
    }
    case QueryKind::multi: {
      std::string listing;
      std::size_t k = 0;
      for (const auto& [oid, obox] : draft.reference_boxes) {
        if (k > 0) listing += (k + 1 == draft.reference_boxes.size()) ? " and " : ", ";
        listing += "object " + std::to_string(oid) + " at " + box_text(obox);
        ++k;
      }
      const std::string count = std::to_string(draft.reference_boxes.size());
      if (pick % 2 == 0) {
        return "Track all " + count + " referenced objects across the following frames: " +
               listing + " in the reference frame.";
      }
      return "In the reference frame, " + listing + ". Keep track of these " + count +
             " objects in every following frame.";
    }
    case QueryKind::occlusion:
      if (pick % 2 == 0) {
        return "Object " + id + " is partially or fully hidden at " + box +
               " in the reference frame. Keep tracking it as it becomes visible in the "
               "following frames.";
      }
      return "Track object " + id + ", occluded at " + box +
             " in the reference frame, once it reappears in the following frames.";
  }
  return "Track object " + id + ".";
}

std::string remote_prompt(const QueryInstance& draft, std::string_view textual_query) {
  std::string ids;
  std::string boxes;
  for (const auto& [oid, obox] : draft.reference_boxes) {
    if (!ids.empty()) {
      ids += ", ";
      boxes += ", ";
    }
    ids += std::to_string(oid);
    boxes += box_text(obox);
  }
  std::string prompt(textual_query);
  prompt += "\n\nInitially, object " + ids + " is located at " + boxes + "\n";
  prompt +=
      "in the reference image.\n\n"
      "The following images correspond to consecutive\n"
      "frames of a video.\n\n"
      "Please output the bounding box for the object in\n"
      "each frame using the following format:\n\n"
      "[{\"frame\": N, \"bbox\": [x1, y1, x2, y2]}, ...]\n\n"
      "Do not include any additional text.";
  return prompt;
}

GeneratedQuery generate_query(const QueryInstance& draft, QueryMode mode, QueryClient* client,
                              std::uint64_t seed) {
  GeneratedQuery out;
  const std::string fallback = template_query(draft, seed);
  if (mode == QueryMode::template_fill) {
    out.text = fallback;
    return out;
  }
  if (client == nullptr) {
    out.text = fallback;
    out.used_fallback = true;
    out.warning = draft.instance_id + ": no query client configured; using template";
    return out;
  }
  const auto reply = client->complete(remote_prompt(draft, fallback));
  if (!reply.ok()) {
    out.text = fallback;
    out.used_fallback = true;
    out.warning = draft.instance_id + ": remote query generation failed (" + reply.error +
                  "); using template";
    return out;
  }
  out.text = reply.text;
  return out;
}

SplitManifest split_sequences(std::vector<std::string> sequences, double ratio,
                              std::uint64_t seed) {
  std::sort(sequences.begin(), sequences.end());
  sequences.erase(std::unique(sequences.begin(), sequences.end()), sequences.end());
  if (sequences.size() < 2) {
    throw InputError("a split needs at least two distinct sequences");
  }
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InputError("split ratio must lie in (0, 1)");
  }
  const auto n = static_cast<long long>(sequences.size());
  const long long train =
      std::clamp(std::llround(ratio * static_cast<double>(n)), 1LL, n - 1);

  Rng rng(seed);
  rng.shuffle(sequences);
  SplitManifest m;
  m.train_sequences.assign(sequences.begin(), sequences.begin() + train);
  m.test_sequences.assign(sequences.begin() + train, sequences.end());
  std::sort(m.train_sequences.begin(), m.train_sequences.end());
  std::sort(m.test_sequences.begin(), m.test_sequences.end());
  return m;
}

std::string manifest_to_json(const SplitManifest& manifest, std::string_view split) {
  nlohmann::ordered_json j;
  const bool train = split == "train";
  j["split"] = std::string(split);
  j["sequences"] = train ? manifest.train_sequences : manifest.test_sequences;
  j["instance_count"] = train ? manifest.train_instances : manifest.test_instances;
  j["instances_file"] = std::string(split) + ".jsonl";
  return j.dump(2) + "\n";
}

std::string mot_line(long long frame, long long object_id, const BBox& box) {
  const BBoxXYWH b = xyxy_to_xywh(box);
  return std::to_string(frame) + "," + std::to_string(object_id) + "," + format_number(b.x) +
         "," + format_number(b.y) + "," + format_number(b.w) + "," + format_number(b.h) +
         ",1,1,1.0";
}

std::vector<fs::path> export_mot_segments(
    const std::vector<QueryInstance>& instances,
    const std::map<std::string, std::vector<FramePrediction>>& predictions,
    const fs::path& out_dir, bool with_gt) {
  std::map<std::string, const QueryInstance*> index;
  for (const auto& inst : instances) {
    index.emplace(inst.instance_id, &inst);
  }
  for (const auto& [id, _] : predictions) {
    if (!index.contains(id)) {
      throw InputError("predictions reference unknown instance '" + id + "'");
    }
  }

  auto write_rows = [](const fs::path& path, std::vector<std::pair<std::pair<long long, long long>, BBox>> rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw InputError("cannot write '" + path.string() + "'");
    }
    for (const auto& [key, box] : rows) {
      out << mot_line(key.first, key.second, box) << '\n';
    }
  };

  std::vector<fs::path> written;
  for (const auto& [id, inst] : index) {
    const auto pred_it = predictions.find(id);
    if (pred_it == predictions.end() && !with_gt) {
      continue;
    }
    const fs::path dir = out_dir / inst->source_sequence;
    fs::create_directories(dir);
    const long long fallback_id =
        inst->reference_boxes.empty() ? 0 : inst->reference_boxes.begin()->first;

    std::vector<std::pair<std::pair<long long, long long>, BBox>> rows;
    if (pred_it != predictions.end()) {
      for (const auto& p : pred_it->second) {
        rows.push_back({{p.frame, p.object_id.value_or(fallback_id)}, p.bbox});
      }
    }
    const fs::path pred_path = dir / (id + ".txt");
    write_rows(pred_path, std::move(rows));
    written.push_back(pred_path);

    if (with_gt) {
      std::vector<std::pair<std::pair<long long, long long>, BBox>> gt_rows;
      for (const auto& [oid, traj] : inst->gt_trajectories) {
        for (const auto& [frame, box] : traj.boxes) {
          gt_rows.push_back({{frame, oid}, box});
        }
      }
      const fs::path gt_path = dir / (id + ".gt.txt");
      write_rows(gt_path, std::move(gt_rows));
      written.push_back(gt_path);
    }
  }
  return written;
}

}  // namespace motrl
