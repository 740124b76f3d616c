#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "motrl/dataset.hpp"
#include "motrl/metrics.hpp"
#include "motrl/policy.hpp"
#include "motrl/reward.hpp"

namespace motrl::cli {

struct DatasetOptions {
  BuildConfig build;
  std::vector<QueryKind> kinds{QueryKind::single};
  double split_ratio = 0.8;
  QueryMode query_mode = QueryMode::template_fill;
  std::string query_endpoint;
  std::string query_model = "query-generator";
  std::chrono::milliseconds query_timeout{30000};
};

struct RunConfig {
  RewardConfig reward;
  MetricConfig metric;
  PolicyConfig policy;
  DatasetOptions dataset;
};

/// Reads a JSON config with optional sections "reward", "metric", "policy"
/// and "dataset" whose keys mirror the config struct fields. Unknown keys
/// and wrong types raise SchemaError naming "section.key".
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

void validate(const RunConfig& cfg);

}  // namespace motrl::cli
