#include "config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "motrl/error.hpp"

namespace motrl::cli {

namespace {

using json = nlohmann::json;

class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    const auto it = doc.find(name_);
    if (it == doc.end()) {
      return;
    }
    if (!it->is_object()) {
      throw SchemaError(name_, "must be an object");
    }
    node_ = &*it;
    for (const auto& item : it->items()) {
      known_.push_back(item.key());
    }
  }

  void number(const char* key, double& target) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw SchemaError(path(key), "must be a number");
      target = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const char* key, Int& target) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw SchemaError(path(key), "must be an integer");
      const auto x = v->get<long long>();
      if (x < 0) throw SchemaError(path(key), "must be nonnegative");
      target = static_cast<Int>(x);
    }
  }

  void text(const char* key, std::string& target) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw SchemaError(path(key), "must be a string");
      target = v->get<std::string>();
    }
  }

  const json* take(const char* key) {
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(key);
    if (it == node_->end()) return nullptr;
    std::erase(known_, std::string(key));
    return &*it;
  }

  std::string path(const char* key) const { return name_ + "." + key; }

  void finish() const {
    if (!known_.empty()) {
      throw SchemaError(name_ + "." + known_.front(), "unknown field");
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::vector<std::string> known_;
};

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  const json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError("config", "must be a JSON object");
  }
  for (const auto& item : doc.items()) {
    const auto& k = item.key();
    if (k != "reward" && k != "metric" && k != "policy" && k != "dataset") {
      throw SchemaError(k, "unknown section");
    }
  }

  RunConfig cfg;
  Section reward(doc, "reward");
  reward.number("iou_threshold", cfg.reward.iou_threshold);
  reward.number("l1_threshold", cfg.reward.l1_threshold);
  reward.number("point_threshold", cfg.reward.point_threshold);
  reward.number("alpha", cfg.reward.alpha);
  reward.number("static_epsilon", cfg.reward.static_epsilon);
  reward.number("anti_static_ratio", cfg.reward.anti_static_ratio);
  reward.number("anti_static_penalty", cfg.reward.anti_static_penalty);
  std::string mode;
  reward.text("spatial_mode", mode);
  if (mode == "iou_only") {
    cfg.reward.spatial_mode = SpatialMode::iou_only;
  } else if (!mode.empty() && mode != "full") {
    throw SchemaError("reward.spatial_mode", "must be \"full\" or \"iou_only\"");
  }
  reward.finish();

  Section metric(doc, "metric");
  metric.number("alpha", cfg.metric.alpha);
  metric.number("static_epsilon", cfg.metric.static_epsilon);
  metric.number("iou_match_threshold", cfg.metric.iou_match_threshold);
  metric.finish();

  Section policy(doc, "policy");
  policy.number("clip_epsilon", cfg.policy.clip_epsilon);
  policy.number("kl_beta", cfg.policy.kl_beta);
  policy.number("reward_kl_coef", cfg.policy.reward_kl_coef);
  policy.number("tapo_gamma", cfg.policy.tapo_gamma);
  policy.number("tapo_keep_prob", cfg.policy.tapo_keep_prob);
  policy.integer("tapo_interval", cfg.policy.tapo_interval);
  std::string strategy;
  policy.text("tapo_strategy", strategy);
  if (!strategy.empty() && strategy != "freeze") {
    throw SchemaError("policy.tapo_strategy", "only \"freeze\" is supported");
  }
  std::string degenerate;
  policy.text("degenerate_std_mode", degenerate);
  if (!degenerate.empty() && degenerate != "zero_advantages") {
    throw SchemaError("policy.degenerate_std_mode", "only \"zero_advantages\" is supported");
  }
  policy.finish();

  Section dataset(doc, "dataset");
  auto& b = cfg.dataset.build;
  dataset.integer("window", b.window);
  dataset.integer("reference_stride", b.reference_stride);
  dataset.integer("max_instances_per_sequence", b.max_instances_per_sequence);
  dataset.integer("multi_max_objects", b.multi_max_objects);
  dataset.number("visible_min", b.visible_min);
  dataset.number("occlusion_reference_max", b.occlusion_reference_max);
  dataset.number("occlusion_later_min", b.occlusion_later_min);
  dataset.number("split_ratio", cfg.dataset.split_ratio);
  if (const json* kinds = dataset.take("kinds")) {
    if (!kinds->is_array() || kinds->empty()) {
      throw SchemaError("dataset.kinds", "must be a non-empty array of query kinds");
    }
    cfg.dataset.kinds.clear();
    for (const auto& k : *kinds) {
      if (!k.is_string()) throw SchemaError("dataset.kinds", "entries must be strings");
      try {
        cfg.dataset.kinds.push_back(query_kind_from_string(k.get<std::string>()));
      } catch (const InputError& e) {
        throw SchemaError("dataset.kinds", e.what());
      }
    }
  }
  std::string query_mode;
  dataset.text("query_mode", query_mode);
  if (query_mode == "remote") {
    cfg.dataset.query_mode = QueryMode::remote;
  } else if (!query_mode.empty() && query_mode != "template") {
    throw SchemaError("dataset.query_mode", "must be \"template\" or \"remote\"");
  }
  dataset.text("query_endpoint", cfg.dataset.query_endpoint);
  dataset.text("query_model", cfg.dataset.query_model);
  long long timeout_ms = cfg.dataset.query_timeout.count();
  dataset.integer("query_timeout_ms", timeout_ms);
  cfg.dataset.query_timeout = std::chrono::milliseconds(timeout_ms);
  dataset.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(e.field(), path + ": " + e.what());
  }
}

void validate(const RunConfig& cfg) {
  cfg.reward.validate();
  cfg.metric.validate();
  cfg.policy.validate();
  cfg.dataset.build.validate();
  if (!(cfg.dataset.split_ratio > 0.0 && cfg.dataset.split_ratio < 1.0)) {
    throw InputError("dataset.split_ratio must lie in (0, 1)");
  }
  if (cfg.dataset.query_mode == QueryMode::remote && cfg.dataset.query_endpoint.empty()) {
    throw InputError("remote query mode needs dataset.query_endpoint or --query-endpoint");
  }
  if (cfg.dataset.query_timeout.count() <= 0) {
    throw InputError("dataset.query_timeout_ms must be positive");
  }
}

}  // namespace motrl::cli
