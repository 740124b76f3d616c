#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "motrl/geometry.hpp"
#include "motrl/instance.hpp"
#include "motrl/structured_output.hpp"

namespace motrl {

class QueryClient;

// One row of a MOTChallenge gt.txt file.
struct MotDetection {
  long long frame = 1;
  long long object_id = 0;
  BBoxXYWH box;
  double confidence = 1.0;
  long long class_id = 1;
  double visibility = 1.0;

  // conf == 0 marks rows the MOT benchmarks exclude from scoring.
  bool ignorable() const noexcept { return confidence == 0.0; }

  friend bool operator==(const MotDetection&, const MotDetection&) = default;
};

/// Reads frame,id,x,y,w,h[,conf,class,visibility[,z]] rows. Missing trailing
/// columns default to conf 1, class 1, visibility 1. Blank lines are skipped.
/// Throws ParseError carrying the 1-based line number.
std::vector<MotDetection> parse_mot_text(std::string_view content);
std::vector<MotDetection> parse_mot_ground_truth(const std::filesystem::path& path);

struct SequenceAnnotations {
  std::string sequence_id;
  std::vector<MotDetection> detections;
};

// Loads every `<root>/<seq>/gt/gt.txt`, ordered by sequence name.
std::vector<SequenceAnnotations> load_mot_directory(const std::filesystem::path& root);

struct BuildConfig {
  int window = 6;  // future frames per instance, 5 or 6
  QueryKind kind = QueryKind::single;
  int reference_stride = 1;
  std::size_t max_instances_per_sequence = 0;  // 0 = no cap
  std::size_t multi_max_objects = 3;
  double visible_min = 0.3;          // reference visibility for single/multi targets
  double occlusion_reference_max = 0.3;
  double occlusion_later_min = 0.7;

  void validate() const;  // throws InputError
};

struct BuildResult {
  std::vector<QueryInstance> instances;  // sorted by instance_id
  std::vector<std::string> diagnostics;
};

/// Slides a reference frame over one sequence and emits every eligible
/// instance of the configured kind. Targets must be annotated in each of the
/// `window` consecutive future frames. Query text is filled from templates.
/// Pure in (detections, sequence_id, cfg, seed).
BuildResult build_instances(const std::vector<MotDetection>& detections,
                            const std::string& sequence_id, const BuildConfig& cfg,
                            std::uint64_t seed);

enum class QueryMode { template_fill, remote };

struct GeneratedQuery {
  std::string text;
  bool used_fallback = false;
  std::string warning;
};

// Deterministic slot-filled description of an instance's targets.
std::string template_query(const QueryInstance& draft, std::uint64_t seed);

// Request body sent to the remote generator.
std::string remote_prompt(const QueryInstance& draft, std::string_view textual_query);

/// Template mode fills a template. Remote mode sends remote_prompt() to
/// `client` and keeps the reply verbatim; an error or empty reply falls back
/// to the template with a warning.
GeneratedQuery generate_query(const QueryInstance& draft, QueryMode mode, QueryClient* client,
                              std::uint64_t seed);

struct SplitManifest {
  std::vector<std::string> train_sequences;
  std::vector<std::string> test_sequences;
  std::size_t train_instances = 0;
  std::size_t test_instances = 0;
};

/// Seeded partition by sequence id; train receives round(ratio * n) clamped
/// to [1, n - 1]. Duplicate ids are collapsed. Throws InputError for fewer
/// than two distinct sequences or a ratio outside (0, 1).
SplitManifest split_sequences(std::vector<std::string> sequences, double ratio,
                              std::uint64_t seed);

std::string manifest_to_json(const SplitManifest& manifest, std::string_view split);

// "frame,id,x,y,w,h,1,1,1.0" with the box converted back to xywh.
std::string mot_line(long long frame, long long object_id, const BBox& box);

/// Writes one MOT-format file per instance under a per-sequence directory:
/// `<out>/<sequence>/<instance_id>.txt`, plus `<instance_id>.gt.txt` when
/// `with_gt` is set. Predictions without object_id take the instance's first
/// target id. Rows are sorted by (frame, id). Returns the files written.
/// Throws InputError for a prediction keyed to an unknown instance.
std::vector<std::filesystem::path> export_mot_segments(
    const std::vector<QueryInstance>& instances,
    const std::map<std::string, std::vector<FramePrediction>>& predictions,
    const std::filesystem::path& out_dir, bool with_gt = false);

}  // namespace motrl
