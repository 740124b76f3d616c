#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "motrl/geometry.hpp"
#include "motrl/trajectory.hpp"

namespace motrl {

enum class QueryKind { single, multi, occlusion };

const char* to_string(QueryKind kind) noexcept;
QueryKind query_kind_from_string(std::string_view text);  // throws InputError

// One benchmark sample: a grounded reference frame plus 5-6 future frames of
// ground truth for the referenced identities.
struct QueryInstance {
  std::string instance_id;
  std::string source_sequence;
  std::string query_text;
  QueryKind query_kind = QueryKind::single;
  long long reference_frame = 0;
  std::map<long long, BBox> reference_boxes;
  std::vector<long long> future_frames;
  std::map<long long, Trajectory> gt_trajectories;

  friend bool operator==(const QueryInstance&, const QueryInstance&) = default;
};

// Throws SchemaError naming the first violated field.
void validate(const QueryInstance& inst);

/// One JSON object per instance, fields in declaration order:
/// {"instance_id", "source_sequence", "query_text", "query_kind",
///  "reference_frame", "reference_boxes": {"<id>": [x1,y1,x2,y2]},
///  "future_frames": [...],
///  "gt_trajectories": {"<id>": [{"frame": f, "bbox": [x1,y1,x2,y2]}, ...]}}
/// Serialized on a single line so files hold one record per line.
std::string serialize_instance(const QueryInstance& inst);

// Strict inverse of serialize_instance: unknown or missing fields, wrong
// types, and invariant violations raise SchemaError.
QueryInstance deserialize_instance(std::string_view record);

std::vector<QueryInstance> read_instances_file(const std::string& path);
void write_instances_file(const std::string& path, const std::vector<QueryInstance>& instances);

}  // namespace motrl
