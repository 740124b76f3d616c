#include "motrl/structured_output.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <regex>

#include "json.hpp"
#include "motrl/error.hpp"
#include "motrl/numeric_format.hpp"

namespace motrl {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
}

// Exactly one think block followed by exactly one answer block, with only
// whitespace around and between them.
bool tags_well_formed(std::string_view text) {
  for (const auto tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
    if (count_occurrences(text, tag) != 1) {
      return false;
    }
  }
  const auto to = text.find(kThinkOpen);
  const auto tc = text.find(kThinkClose);
  const auto ao = text.find(kAnswerOpen);
  const auto ac = text.find(kAnswerClose);
  if (!(to < tc && tc < ao && ao < ac)) {
    return false;
  }
  return is_blank(text.substr(0, to)) &&
         is_blank(text.substr(tc + kThinkClose.size(), ao - tc - kThinkClose.size())) &&
         is_blank(text.substr(ac + kAnswerClose.size()));
}

std::optional<std::string> extract_reasoning(std::string_view text) {
  const auto open = text.find(kThinkOpen);
  if (open == std::string_view::npos) {
    return std::nullopt;
  }
  const auto begin = open + kThinkOpen.size();
  const auto close = text.find(kThinkClose, begin);
  if (close == std::string_view::npos) {
    return std::nullopt;
  }
  return std::string(text.substr(begin, close - begin));
}

struct AnswerPayload {
  std::string_view text;
  bool closed = false;
};

std::optional<AnswerPayload> extract_answer(std::string_view text) {
  const auto open = text.find(kAnswerOpen);
  if (open == std::string_view::npos) {
    return std::nullopt;
  }
  const auto begin = open + kAnswerOpen.size();
  const auto close = text.find(kAnswerClose, begin);
  if (close == std::string_view::npos) {
    return AnswerPayload{text.substr(begin), false};
  }
  return AnswerPayload{text.substr(begin, close - begin), true};
}

std::optional<double> to_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> to_integer(std::string_view token) {
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  long long value = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

#define MOTRL_NUM R"(([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?))"
#define MOTRL_SEP R"((?:\s*[,;]\s*|\s+))"

const std::regex& frame_pattern() {
  static const std::regex re(R"(\bframe(?:_id)?\b["']?\s*[:=]\s*["']?([-+]?\d+))");
  return re;
}

const std::regex& object_id_pattern() {
  static const std::regex re(R"(\b(?:object_id|obj_id|id)\b["']?\s*[:=]\s*["']?([-+]?\d+))");
  return re;
}

const std::regex& bbox_pattern() {
  static const std::regex re(R"(\b(?:bbox_2d|bbox|box)\b["']?\s*[:=]\s*[\[(]?\s*)" MOTRL_NUM
                                 MOTRL_SEP MOTRL_NUM MOTRL_SEP MOTRL_NUM MOTRL_SEP MOTRL_NUM);
  return re;
}

#undef MOTRL_NUM
#undef MOTRL_SEP

std::optional<FramePrediction> extract_record(std::string_view segment) {
  const std::string s(segment);
  std::smatch frame_m;
  std::smatch bbox_m;
  if (!std::regex_search(s, frame_m, frame_pattern()) ||
      !std::regex_search(s, bbox_m, bbox_pattern())) {
    return std::nullopt;
  }
  FramePrediction pred;
  const auto frame = to_integer(frame_m.str(1));
  if (!frame || *frame < 0) {
    return std::nullopt;
  }
  pred.frame = *frame;

  double coords[4];
  for (int k = 0; k < 4; ++k) {
    const auto v = to_double(bbox_m.str(k + 1));
    if (!v) {
      return std::nullopt;
    }
    coords[k] = *v;
  }
  pred.bbox = {coords[0], coords[1], coords[2], coords[3]};
  if (!is_valid(pred.bbox)) {
    return std::nullopt;
  }

  std::smatch id_m;
  if (std::regex_search(s, id_m, object_id_pattern())) {
    pred.object_id = to_integer(id_m.str(1));
  }
  return pred;
}

// Splits a payload into candidate records: brace-delimited objects when any
// brace is present, else lines, each further split at repeated frame keys.
std::vector<std::string_view> segment_records(std::string_view payload) {
  std::vector<std::string_view> segments;
  if (payload.find('{') != std::string_view::npos) {
    std::size_t pos = payload.find('{');
    while (pos != std::string_view::npos) {
      const auto next_open = payload.find('{', pos + 1);
      const auto close = payload.find('}', pos + 1);
      const auto end = std::min({close, next_open, payload.size()});
      segments.push_back(payload.substr(pos + 1, end - pos - 1));
      pos = next_open;
    }
    return segments;
  }

  std::size_t line_start = 0;
  while (line_start <= payload.size()) {
    auto line_end = payload.find('\n', line_start);
    if (line_end == std::string_view::npos) {
      line_end = payload.size();
    }
    const auto line = payload.substr(line_start, line_end - line_start);
    const std::string owned(line);
    std::vector<std::size_t> starts;
    for (auto it = std::sregex_iterator(owned.begin(), owned.end(), frame_pattern());
         it != std::sregex_iterator(); ++it) {
      starts.push_back(static_cast<std::size_t>(it->position(0)));
    }
    if (starts.size() <= 1) {
      segments.push_back(line);
    } else {
      starts.front() = 0;
      for (std::size_t k = 0; k < starts.size(); ++k) {
        const auto end = k + 1 < starts.size() ? starts[k + 1] : line.size();
        segments.push_back(line.substr(starts[k], end - starts[k]));
      }
    }
    line_start = line_end + 1;
  }
  return segments;
}

}  // namespace

const char* to_string(ParseMode mode) noexcept {
  switch (mode) {
    case ParseMode::strict:
      return "strict";
    case ParseMode::fallback:
      return "fallback";
    case ParseMode::failed:
      return "failed";
  }
  return "failed";
}

std::optional<std::vector<FramePrediction>> parse_answer_strict(std::string_view payload) {
  const auto doc = nlohmann::json::parse(payload.begin(), payload.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    return std::nullopt;
  }
  std::vector<FramePrediction> preds;
  preds.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object()) {
      return std::nullopt;
    }
    for (const auto& [key, _] : item.items()) {
      if (key != "frame" && key != "object_id" && key != "bbox") {
        return std::nullopt;
      }
    }
    if (!item.contains("frame") || !item.contains("bbox")) {
      return std::nullopt;
    }
    const auto& frame = item.at("frame");
    const auto& bbox = item.at("bbox");
    if (!frame.is_number_integer() || !bbox.is_array() || bbox.size() != 4) {
      return std::nullopt;
    }
    FramePrediction pred;
    if (frame.is_number_unsigned()) {
      const auto u = frame.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
        return std::nullopt;
      }
      pred.frame = static_cast<long long>(u);
    } else {
      pred.frame = frame.get<long long>();
    }
    if (pred.frame < 0) {
      return std::nullopt;
    }
    if (item.contains("object_id")) {
      const auto& id = item.at("object_id");
      if (!id.is_number_integer()) {
        return std::nullopt;
      }
      pred.object_id = id.get<long long>();
    }
    double coords[4];
    for (std::size_t k = 0; k < 4; ++k) {
      if (!bbox[k].is_number()) {
        return std::nullopt;
      }
      coords[k] = bbox[k].get<double>();
    }
    pred.bbox = {coords[0], coords[1], coords[2], coords[3]};
    if (!is_valid(pred.bbox)) {
      return std::nullopt;
    }
    preds.push_back(pred);
  }
  return preds;
}

std::vector<FramePrediction> parse_answer_fallback(std::string_view payload) {
  std::vector<FramePrediction> preds;
  for (const auto segment : segment_records(payload)) {
    if (auto rec = extract_record(segment)) {
      preds.push_back(*rec);
    }
  }
  return preds;
}

ParsedRollout parse_rollout(std::string_view text) {
  ParsedRollout out;
  out.think_format_valid = tags_well_formed(text);
  out.reasoning = extract_reasoning(text);

  const auto answer = extract_answer(text);
  if (!answer) {
    return out;
  }
  if (answer->closed) {
    if (auto strict = parse_answer_strict(answer->text)) {
      out.predictions = std::move(*strict);
      out.parse_mode = ParseMode::strict;
      out.answer_format_valid = true;
      return out;
    }
  }
  out.predictions = parse_answer_fallback(answer->text);
  out.parse_mode = out.predictions.empty() ? ParseMode::failed : ParseMode::fallback;
  return out;
}

double thinking_format_reward(const ParsedRollout& p) noexcept {
  return p.think_format_valid ? 1.0 : 0.0;
}

double answer_format_reward(const ParsedRollout& p) noexcept {
  return p.parse_mode == ParseMode::strict ? 1.0 : 0.0;
}

std::string serialize_predictions(std::span<const FramePrediction> preds, bool multi_object) {
  std::string out = "[";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    if (!is_valid(p.bbox) || p.frame < 0) {
      throw InputError("prediction " + std::to_string(i) + " has an invalid frame or box");
    }
    if (i > 0) {
      out += ", ";
    }
    out += "{\"frame\": " + std::to_string(p.frame);
    if (multi_object) {
      if (!p.object_id) {
        throw InputError("multi-object serialization requires object_id on prediction " +
                         std::to_string(i));
      }
      out += ", \"object_id\": " + std::to_string(*p.object_id);
    }
    out += ", \"bbox\": [" + format_number(p.bbox.x1) + ", " + format_number(p.bbox.y1) + ", " +
           format_number(p.bbox.x2) + ", " + format_number(p.bbox.y2) + "]}";
  }
  out += "]";
  return out;
}

std::string make_rollout_text(std::string_view reasoning, std::string_view answer) {
  std::string out;
  out.reserve(reasoning.size() + answer.size() + 40);
  out.append(kThinkOpen).append(reasoning).append(kThinkClose).append("\n");
  out.append(kAnswerOpen).append(answer).append(kAnswerClose);
  return out;
}

}  // namespace motrl
