#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motrl/geometry.hpp"

namespace motrl {

struct FramePrediction {
  long long frame = 0;
  std::optional<long long> object_id;
  BBox bbox;

  friend bool operator==(const FramePrediction&, const FramePrediction&) = default;
};

enum class ParseMode { strict, fallback, failed };

const char* to_string(ParseMode mode) noexcept;

// One rollout decomposed into its reasoning trace and box predictions.
//
// Tag structure and answer parsing are judged independently: a rollout can
// carry malformed tags and still yield strictly parsed predictions.
struct ParsedRollout {
  std::optional<std::string> reasoning;
  std::vector<FramePrediction> predictions;
  bool think_format_valid = false;
  bool answer_format_valid = false;
  ParseMode parse_mode = ParseMode::failed;
};

/// Parses a raw rollout. Never throws on content: unusable text comes back
/// with parse_mode == failed and no predictions.
///
/// The answer block is first parsed as a JSON array of
/// {"frame", ["object_id",] "bbox"} objects. If that fails, a tolerant
/// pattern extractor recovers records whose fields are still recognizable
/// (quote style, `=` or `:` separators, trailing commas, missing closing
/// brackets, a `bbox_2d` key).
ParsedRollout parse_rollout(std::string_view text);

// Strict JSON parse of an answer payload; nullopt if it is not exactly the
// answer wire format.
std::optional<std::vector<FramePrediction>> parse_answer_strict(std::string_view payload);

// Pattern-based recovery; returns an empty vector when nothing is found.
std::vector<FramePrediction> parse_answer_fallback(std::string_view payload);

double thinking_format_reward(const ParsedRollout& p) noexcept;
double answer_format_reward(const ParsedRollout& p) noexcept;

/// Renders predictions in the answer wire format, e.g.
/// [{"frame": 1, "object_id": 2, "bbox": [0, 0, 10, 10]}]
/// object_id is written iff multi_object; throws InputError when
/// multi_object is set and a prediction has no object_id.
std::string serialize_predictions(std::span<const FramePrediction> preds, bool multi_object);

// Wraps an answer payload and reasoning into the tagged rollout layout.
std::string make_rollout_text(std::string_view reasoning, std::string_view answer);

}  // namespace motrl
