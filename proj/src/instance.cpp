#include "motrl/instance.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "json.hpp"
#include "motrl/error.hpp"

namespace motrl {

using ojson = nlohmann::ordered_json;

const char* to_string(QueryKind kind) noexcept {
  switch (kind) {
    case QueryKind::single:
      return "single";
    case QueryKind::multi:
      return "multi";
    case QueryKind::occlusion:
      return "occlusion";
  }
  return "single";
}

QueryKind query_kind_from_string(std::string_view text) {
  if (text == "single") return QueryKind::single;
  if (text == "multi") return QueryKind::multi;
  if (text == "occlusion") return QueryKind::occlusion;
  throw InputError("unknown query kind '" + std::string(text) + "'");
}

void validate(const QueryInstance& inst) {
  if (inst.instance_id.empty()) {
    throw SchemaError("instance_id", "must be non-empty");
  }
  if (inst.future_frames.size() != 5 && inst.future_frames.size() != 6) {
    throw SchemaError("future_frames", "must list 5 or 6 frames");
  }
  long long prev = inst.reference_frame;
  for (const auto f : inst.future_frames) {
    if (f <= prev) {
      throw SchemaError("future_frames", "must be strictly increasing and after reference_frame");
    }
    prev = f;
  }
  if (inst.reference_boxes.empty()) {
    throw SchemaError("reference_boxes", "must reference at least one object");
  }
  const std::size_t targets = inst.reference_boxes.size();
  if (inst.query_kind == QueryKind::single && targets != 1) {
    throw SchemaError("reference_boxes", "single-object query must reference exactly one object");
  }
  if (inst.query_kind == QueryKind::multi && targets < 2) {
    throw SchemaError("reference_boxes", "multi-object query must reference two or more objects");
  }
  for (const auto& [id, box] : inst.reference_boxes) {
    if (!is_valid(box)) {
      throw SchemaError("reference_boxes", "invalid box for object " + std::to_string(id));
    }
    if (!inst.gt_trajectories.contains(id)) {
      throw SchemaError("gt_trajectories", "missing trajectory for object " + std::to_string(id));
    }
  }
  const std::set<long long> allowed(inst.future_frames.begin(), inst.future_frames.end());
  for (const auto& [id, traj] : inst.gt_trajectories) {
    if (!inst.reference_boxes.contains(id)) {
      throw SchemaError("reference_boxes", "no reference box for object " + std::to_string(id));
    }
    if (traj.object_id != id) {
      throw SchemaError("gt_trajectories", "trajectory key and object id disagree");
    }
    for (const auto& [frame, box] : traj.boxes) {
      if (!allowed.contains(frame)) {
        throw SchemaError("gt_trajectories",
                          "frame " + std::to_string(frame) + " is not a listed future frame");
      }
      if (!is_valid(box)) {
        throw SchemaError("gt_trajectories", "invalid box at frame " + std::to_string(frame));
      }
    }
  }
}

namespace {

ojson box_json(const BBox& b) { return ojson::array({b.x1, b.y1, b.x2, b.y2}); }

BBox box_from_json(const ojson& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4) {
    throw SchemaError(field, "box must be an array of four numbers");
  }
  double c[4];
  for (std::size_t k = 0; k < 4; ++k) {
    if (!j[k].is_number()) {
      throw SchemaError(field, "box coordinates must be numbers");
    }
    c[k] = j[k].get<double>();
  }
  return {c[0], c[1], c[2], c[3]};
}

long long integer_from_json(const ojson& j, const std::string& field) {
  if (!j.is_number_integer()) {
    throw SchemaError(field, "must be an integer");
  }
  return j.get<long long>();
}

long long id_from_key(const std::string& key, const std::string& field) {
  long long id = 0;
  const auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
  if (ec != std::errc{} || end != key.data() + key.size()) {
    throw SchemaError(field, "object key '" + key + "' is not an integer");
  }
  return id;
}

const ojson& require(const ojson& obj, const char* key) {
  if (!obj.contains(key)) {
    throw SchemaError(key, "missing");
  }
  return obj.at(key);
}

void reject_unknown(const ojson& obj, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw SchemaError(where.empty() ? item.key() : where + "." + item.key(), "unknown field");
    }
  }
}

}  // namespace

std::string serialize_instance(const QueryInstance& inst) {
  ojson j;
  j["instance_id"] = inst.instance_id;
  j["source_sequence"] = inst.source_sequence;
  j["query_text"] = inst.query_text;
  j["query_kind"] = to_string(inst.query_kind);
  j["reference_frame"] = inst.reference_frame;
  ojson refs = ojson::object();
  for (const auto& [id, box] : inst.reference_boxes) {
    refs[std::to_string(id)] = box_json(box);
  }
  j["reference_boxes"] = std::move(refs);
  j["future_frames"] = inst.future_frames;
  ojson trajs = ojson::object();
  for (const auto& [id, traj] : inst.gt_trajectories) {
    ojson points = ojson::array();
    for (const auto& [frame, box] : traj.boxes) {
      ojson p;
      p["frame"] = frame;
      p["bbox"] = box_json(box);
      points.push_back(std::move(p));
    }
    trajs[std::to_string(id)] = std::move(points);
  }
  j["gt_trajectories"] = std::move(trajs);
  return j.dump();
}

QueryInstance deserialize_instance(std::string_view record) {
  const auto j = ojson::parse(record.begin(), record.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw SchemaError("record", "not a JSON object");
  }
  reject_unknown(j,
                 {"instance_id", "source_sequence", "query_text", "query_kind", "reference_frame",
                  "reference_boxes", "future_frames", "gt_trajectories"},
                 "");

  QueryInstance inst;
  auto string_field = [&](const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) {
      throw SchemaError(key, "must be a string");
    }
    return v.get<std::string>();
  };
  inst.instance_id = string_field("instance_id");
  inst.source_sequence = string_field("source_sequence");
  inst.query_text = string_field("query_text");
  try {
    inst.query_kind = query_kind_from_string(string_field("query_kind"));
  } catch (const SchemaError&) {
    throw;
  } catch (const InputError& e) {
    throw SchemaError("query_kind", e.what());
  }
  inst.reference_frame = integer_from_json(require(j, "reference_frame"), "reference_frame");

  const auto& refs = require(j, "reference_boxes");
  if (!refs.is_object()) {
    throw SchemaError("reference_boxes", "must be an object keyed by object id");
  }
  for (const auto& item : refs.items()) {
    inst.reference_boxes[id_from_key(item.key(), "reference_boxes")] =
        box_from_json(item.value(), "reference_boxes");
  }

  const auto& frames = require(j, "future_frames");
  if (!frames.is_array()) {
    throw SchemaError("future_frames", "must be an array");
  }
  for (const auto& f : frames) {
    inst.future_frames.push_back(integer_from_json(f, "future_frames"));
  }

  const auto& trajs = require(j, "gt_trajectories");
  if (!trajs.is_object()) {
    throw SchemaError("gt_trajectories", "must be an object keyed by object id");
  }
  for (const auto& item : trajs.items()) {
    const long long id = id_from_key(item.key(), "gt_trajectories");
    if (!item.value().is_array()) {
      throw SchemaError("gt_trajectories", "trajectory must be an array");
    }
    Trajectory traj;
    traj.object_id = id;
    for (const auto& p : item.value()) {
      if (!p.is_object()) {
        throw SchemaError("gt_trajectories", "trajectory entries must be objects");
      }
      reject_unknown(p, {"frame", "bbox"}, "gt_trajectories");
      const long long frame = integer_from_json(require(p, "frame"), "gt_trajectories.frame");
      if (!traj.boxes.emplace(frame, box_from_json(require(p, "bbox"), "gt_trajectories.bbox"))
               .second) {
        throw SchemaError("gt_trajectories", "duplicate frame " + std::to_string(frame));
      }
    }
    inst.gt_trajectories.emplace(id, std::move(traj));
  }

  validate(inst);
  return inst;
}

std::vector<QueryInstance> read_instances_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open instances file '" + path + "'");
  }
  std::vector<QueryInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(deserialize_instance(line));
    } catch (const SchemaError& e) {
      throw SchemaError(e.field(), path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_instances_file(const std::string& path, const std::vector<QueryInstance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write instances file '" + path + "'");
  }
  for (const auto& inst : instances) {
    out << serialize_instance(inst) << '\n';
  }
}

}  // namespace motrl
