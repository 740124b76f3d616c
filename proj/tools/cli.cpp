#include "cli.hpp"

#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "motrl/dataset.hpp"
#include "motrl/error.hpp"
#include "motrl/instance.hpp"
#include "motrl/kernels.hpp"
#include "motrl/numeric_format.hpp"
#include "motrl/policy.hpp"
#include "motrl/query_client.hpp"
#include "motrl/structured_output.hpp"

namespace motrl::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  std::string format = "text";
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config_path, "JSON config with reward/metric/policy/dataset sections")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "Worker threads (0 = OpenMP default)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--out", o.out, "Output path");
  sub->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"text", "structured"}))
      ->capture_default_str();
}

RunConfig base_config(const CommonOptions& o) {
  return o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw InputError("cannot write '" + path + "'");
  }
  file << text;
  if (!file) {
    throw InputError("failed writing '" + path + "'");
  }
}

std::string number_or_null(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("null");
}

// Calls `fn(line_number, record)` for every non-blank line of a JSONL file.
void for_each_record(const std::string& path, const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path + "'");
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw ParseError(line_no, path + ": not a JSON object");
    }
    fn(line_no, record);
  }
}

void require_keys(const json& record, std::initializer_list<const char*> allowed, std::size_t line_no,
                  const std::string& path) {
  for (const auto& item : record.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) {
      throw SchemaError(item.key(), path + " line " + std::to_string(line_no) + ": unknown field");
    }
  }
}

std::string string_field(const json& record, const char* key, std::size_t line_no,
                         const std::string& path) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw SchemaError(key, path + " line " + std::to_string(line_no) + ": missing or not a string");
  }
  return it->get<std::string>();
}

std::map<std::string, const QueryInstance*> index_instances(const std::vector<QueryInstance>& v) {
  std::map<std::string, const QueryInstance*> index;
  for (const auto& inst : v) {
    if (!index.emplace(inst.instance_id, &inst).second) {
      throw InputError("duplicate instance id '" + inst.instance_id + "'");
    }
  }
  return index;
}

// {"instance_id", "predictions": [...]} or {"instance_id", "text": "<rollout>"}.
std::map<std::string, std::vector<FramePrediction>> read_predictions(
    const std::string& path, const std::map<std::string, const QueryInstance*>& index) {
  std::map<std::string, std::vector<FramePrediction>> out;
  for_each_record(path, [&](std::size_t line_no, const json& record) {
    require_keys(record, {"instance_id", "predictions", "text"}, line_no, path);
    const std::string where = path + " line " + std::to_string(line_no);
    const auto id = string_field(record, "instance_id", line_no, path);
    if (!index.contains(id)) {
      throw InputError(where + ": unknown instance id '" + id + "'");
    }
    const bool has_preds = record.contains("predictions");
    const bool has_text = record.contains("text");
    if (has_preds == has_text) {
      throw SchemaError("predictions", where + ": give exactly one of 'predictions' or 'text'");
    }
    std::vector<FramePrediction> preds;
    if (has_preds) {
      auto parsed = parse_answer_strict(record["predictions"].dump());
      if (!parsed) {
        throw SchemaError("predictions",
                          where + ": expected a list of {frame, object_id?, bbox} records");
      }
      preds = std::move(*parsed);
    } else {
      preds = parse_rollout(string_field(record, "text", line_no, path)).predictions;
    }
    if (!out.emplace(id, std::move(preds)).second) {
      throw InputError(where + ": duplicate predictions for instance '" + id + "'");
    }
  });
  return out;
}

int cmd_evaluate(const CommonOptions& o, const std::string& instances_path,
                 const std::string& predictions_path, std::ostream& out) {
  const RunConfig cfg = base_config(o);
  validate(cfg);
  const auto instances = read_instances_file(instances_path);
  const auto index = index_instances(instances);
  const auto preds = read_predictions(predictions_path, index);

  std::vector<EvaluationItem> items;
  items.reserve(instances.size());
  for (const auto& inst : instances) {
    const auto it = preds.find(inst.instance_id);
    if (it == preds.end()) {
      items.push_back({&inst, {}});
    } else {
      items.push_back({&inst, it->second});
    }
  }
  const auto report = evaluate_corpus_parallel(items, cfg.metric, o.jobs);
  emit(o.format == "structured" ? report_to_json(report) : report_to_text(report), o.out, out);
  return kExitOk;
}

int cmd_reward(const CommonOptions& o, const std::string& instances_path,
               const std::string& rollouts_path, const std::string& spatial_mode,
               std::ostream& out) {
  RunConfig cfg = base_config(o);
  if (!spatial_mode.empty()) {
    cfg.reward.spatial_mode = spatial_mode == "iou_only" ? SpatialMode::iou_only : SpatialMode::full;
  }
  validate(cfg);
  const auto instances = read_instances_file(instances_path);
  const auto index = index_instances(instances);

  struct Group {
    std::string instance_id;
    std::vector<std::string> texts;
  };
  std::vector<Group> groups;
  for_each_record(rollouts_path, [&](std::size_t line_no, const json& record) {
    require_keys(record, {"instance_id", "rollouts"}, line_no, rollouts_path);
    const std::string where = rollouts_path + " line " + std::to_string(line_no);
    Group g;
    g.instance_id = string_field(record, "instance_id", line_no, rollouts_path);
    if (!index.contains(g.instance_id)) {
      throw InputError(where + ": unknown instance id '" + g.instance_id + "'");
    }
    const auto it = record.find("rollouts");
    if (it == record.end() || !it->is_array()) {
      throw SchemaError("rollouts", where + ": must be an array of strings");
    }
    for (const auto& t : *it) {
      if (!t.is_string()) throw SchemaError("rollouts", where + ": entries must be strings");
      g.texts.push_back(t.get<std::string>());
    }
    groups.push_back(std::move(g));
  });

  std::vector<ScoringItem> items;
  for (const auto& g : groups) {
    for (const auto& t : g.texts) items.push_back({index.at(g.instance_id), t});
  }
  const auto scores = score_rollouts(items, cfg.reward, o.jobs);

  ojson rows = ojson::array();
  std::ostringstream text;
  std::size_t k = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    std::vector<double> totals;
    for (std::size_t r = 0; r < g.texts.size(); ++r) totals.push_back(scores[k + r].total);
    std::vector<std::optional<double>> adv(totals.size());
    if (totals.size() >= 2) {
      const auto a = grpo_advantages(totals, cfg.policy);
      for (std::size_t r = 0; r < a.size(); ++r) adv[r] = a[r];
    }
    for (std::size_t r = 0; r < g.texts.size(); ++r, ++k) {
      const auto& b = scores[k];
      ojson row;
      row["instance_id"] = g.instance_id;
      row["group"] = gi;
      row["rollout"] = r;
      row["thinking_format"] = b.thinking_format;
      row["answer_format"] = b.answer_format;
      row["spatial"] = b.spatial;
      row["mcp"] = b.mcp;
      row["total"] = b.total;
      row["advantage"] = adv[r] ? ojson(*adv[r]) : ojson(nullptr);
      rows.push_back(std::move(row));
      text << g.instance_id << " group=" << gi << " rollout=" << r
           << " thinking_format=" << format_number(b.thinking_format)
           << " answer_format=" << format_number(b.answer_format)
           << " spatial=" << format_number(b.spatial) << " mcp=" << format_number(b.mcp)
           << " total=" << format_number(b.total) << " advantage=" << number_or_null(adv[r])
           << '\n';
    }
  }
  if (o.format == "structured") {
    ojson doc;
    doc["rows"] = std::move(rows);
    emit(doc.dump(2) + "\n", o.out, out);
  } else {
    emit(text.str(), o.out, out);
  }
  return kExitOk;
}

std::optional<std::vector<double>> number_array(const json& record, const char* key,
                                                const std::string& where) {
  const auto it = record.find(key);
  if (it == record.end()) return std::nullopt;
  if (!it->is_array()) throw SchemaError(key, where + ": must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : *it) {
    if (!x.is_number()) throw SchemaError(key, where + ": must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

int cmd_grpo_sim(const CommonOptions& o, const std::string& trace_path,
                 const std::optional<double>& gamma, const std::optional<double>& clip,
                 const std::optional<double>& beta, std::ostream& out) {
  RunConfig cfg = base_config(o);
  if (gamma) cfg.policy.tapo_gamma = *gamma;
  if (clip) cfg.policy.clip_epsilon = *clip;
  if (beta) cfg.policy.kl_beta = *beta;
  validate(cfg);
  const PolicyConfig& p = cfg.policy;

  ojson steps = ojson::array();
  std::ostringstream text;
  text << "step tapo J_GRPO L_track J_TAPO\n";
  std::size_t ordinal = 0;
  for_each_record(trace_path, [&](std::size_t line_no, const json& record) {
    require_keys(record, {"step", "rewards", "logp_new", "logp_old", "logp_ref", "logp_masked"},
                 line_no, trace_path);
    const std::string where = trace_path + " line " + std::to_string(line_no);
    std::uint64_t step = ordinal++;
    if (const auto it = record.find("step"); it != record.end()) {
      if (!it->is_number_unsigned()) throw SchemaError("step", where + ": must be a nonnegative integer");
      step = it->get<std::uint64_t>();
    }
    RolloutGroup g;
    auto rewards = number_array(record, "rewards", where);
    if (!rewards) throw SchemaError("rewards", where + ": missing");
    g.rewards = std::move(*rewards);
    g.logp_new = number_array(record, "logp_new", where);
    g.logp_old = number_array(record, "logp_old", where);
    g.logp_ref = number_array(record, "logp_ref", where);
    g.logp_masked = number_array(record, "logp_masked", where);

    try {
      const auto shaped = apply_reward_kl_penalty(g, p.reward_kl_coef);
      const auto adv = grpo_advantages(shaped, p);
      const double j_grpo = grpo_objective(g, adv, p);
      const bool tapo = is_tapo_step(step, p);
      double l_track = 0.0;
      double j_tapo = j_grpo;
      if (tapo) {
        l_track = tapo_temporal_loss(g);
        j_tapo = tapo_objective(g, adv, p);
      }
      ojson row;
      row["step"] = step;
      row["tapo_step"] = tapo;
      row["j_grpo"] = j_grpo;
      row["l_track"] = l_track;
      row["j_tapo"] = j_tapo;
      row["advantages"] = adv;
      steps.push_back(std::move(row));
      text << step << ' ' << (tapo ? "yes" : "no") << ' ' << format_number(j_grpo) << ' '
           << format_number(l_track) << ' ' << format_number(j_tapo) << '\n';
    } catch (const SchemaError&) {
      throw;
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  });
  if (o.format == "structured") {
    ojson doc;
    doc["steps"] = std::move(steps);
    emit(doc.dump(2) + "\n", o.out, out);
  } else {
    emit(text.str(), o.out, out);
  }
  return kExitOk;
}

int cmd_export_mot(const CommonOptions& o, const std::string& instances_path,
                   const std::string& predictions_path, bool with_gt, std::ostream& out) {
  if (o.out.empty()) {
    throw InputError("export-mot needs --out DIR");
  }
  const auto instances = read_instances_file(instances_path);
  const auto index = index_instances(instances);
  const auto preds = read_predictions(predictions_path, index);
  const fs::path root(o.out);
  const auto files = export_mot_segments(instances, preds, root, with_gt);
  if (o.format == "structured") {
    ojson doc;
    doc["files"] = ojson::array();
    for (const auto& f : files) doc["files"].push_back(fs::relative(f, root).generic_string());
    out << doc.dump(2) << '\n';
  } else {
    for (const auto& f : files) out << fs::relative(f, root).generic_string() << '\n';
  }
  return kExitOk;
}

struct BuildFlags {
  std::string mot_root;
  std::vector<std::string> kinds;
  std::optional<int> window;
  std::optional<double> split_ratio;
  std::optional<std::size_t> max_per_sequence;
  std::string query_mode;
  std::string query_endpoint;
};

int cmd_build_dataset(const CommonOptions& o, const BuildFlags& f, std::ostream& out,
                      std::ostream& err) {
  if (o.out.empty()) {
    throw InputError("build-dataset needs --out DIR");
  }
  RunConfig cfg = base_config(o);
  auto& d = cfg.dataset;
  if (!f.kinds.empty()) {
    d.kinds.clear();
    for (const auto& k : f.kinds) d.kinds.push_back(query_kind_from_string(k));
  }
  if (f.window) d.build.window = *f.window;
  if (f.split_ratio) d.split_ratio = *f.split_ratio;
  if (f.max_per_sequence) d.build.max_instances_per_sequence = *f.max_per_sequence;
  if (!f.query_mode.empty()) {
    d.query_mode = f.query_mode == "remote" ? QueryMode::remote : QueryMode::template_fill;
  }
  if (!f.query_endpoint.empty()) d.query_endpoint = f.query_endpoint;
  validate(cfg);

  const auto sequences = load_mot_directory(f.mot_root);
  if (sequences.empty()) {
    throw InputError("no '<seq>/gt/gt.txt' files under '" + f.mot_root + "'");
  }

  // One task per (sequence, kind); results are merged in task order.
  const std::size_t tasks = sequences.size() * d.kinds.size();
  std::vector<BuildResult> results(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  const int threads = o.jobs > 0 ? o.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::size_t t = 0; t < tasks; ++t) {
    try {
      BuildConfig bc = d.build;
      bc.kind = d.kinds[t % d.kinds.size()];
      const auto& seq = sequences[t / d.kinds.size()];
      results[t] = build_instances(seq.detections, seq.sequence_id, bc, o.seed);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::string> ids;
  for (const auto& s : sequences) ids.push_back(s.sequence_id);
  SplitManifest manifest = split_sequences(ids, d.split_ratio, o.seed);
  const std::set<std::string> train_set(manifest.train_sequences.begin(),
                                        manifest.train_sequences.end());

  std::vector<QueryInstance> all;
  std::vector<std::string> diagnostics;
  for (auto& r : results) {
    for (auto& inst : r.instances) all.push_back(std::move(inst));
    for (auto& msg : r.diagnostics) diagnostics.push_back(std::move(msg));
  }
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });

  std::size_t fallbacks = 0;
  if (d.query_mode == QueryMode::remote) {
    HttpClientConfig hc;
    hc.endpoint = d.query_endpoint;
    hc.model = d.query_model;
    hc.timeout = d.query_timeout;
    HttpQueryClient client(hc);
    for (auto& inst : all) {
      auto q = generate_query(inst, QueryMode::remote, &client, o.seed);
      if (q.used_fallback) {
        ++fallbacks;
        err << "warning: " << q.warning << '\n';
      }
      inst.query_text = std::move(q.text);
    }
  }

  std::vector<QueryInstance> train, test;
  for (auto& inst : all) {
    validate(inst);
    (train_set.contains(inst.source_sequence) ? train : test).push_back(std::move(inst));
  }
  manifest.train_instances = train.size();
  manifest.test_instances = test.size();

  const fs::path root(o.out);
  fs::create_directories(root);
  write_instances_file((root / "train.jsonl").string(), train);
  write_instances_file((root / "test.jsonl").string(), test);
  emit(manifest_to_json(manifest, "train"), (root / "train_manifest.json").string(), out);
  emit(manifest_to_json(manifest, "test"), (root / "test_manifest.json").string(), out);

  for (const auto& msg : diagnostics) err << "note: " << msg << '\n';
  if (o.format == "structured") {
    ojson doc;
    doc["sequences"] = sequences.size();
    doc["train_sequences"] = manifest.train_sequences;
    doc["test_sequences"] = manifest.test_sequences;
    doc["train_instances"] = train.size();
    doc["test_instances"] = test.size();
    doc["query_fallbacks"] = fallbacks;
    doc["diagnostics"] = diagnostics;
    out << doc.dump(2) << '\n';
  } else {
    out << "sequences=" << sequences.size() << " train_sequences=" << manifest.train_sequences.size()
        << " test_sequences=" << manifest.test_sequences.size()
        << " train_instances=" << train.size() << " test_instances=" << test.size()
        << " query_fallbacks=" << fallbacks << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Referring multi-object tracking rewards, metrics, and dataset tools", "motrl"};
  app.require_subcommand(1);

  CommonOptions common;

  std::string instances_path, predictions_path, rollouts_path, trace_path, spatial_mode;
  std::optional<double> gamma, clip, beta;
  bool with_gt = false;
  BuildFlags build;

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against instance ground truth");
  add_common(evaluate, common);
  evaluate->add_option("--instances", instances_path, "Instance JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--predictions", predictions_path, "Predictions JSONL file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* reward = app.add_subcommand("reward", "Score raw rollouts and their group advantages");
  add_common(reward, common);
  reward->add_option("--instances", instances_path, "Instance JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  reward->add_option("--rollouts", rollouts_path, "Rollout groups JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  reward->add_option("--spatial-mode", spatial_mode, "Spatial reward variant")
      ->check(CLI::IsMember({"full", "iou_only"}));

  auto* grpo = app.add_subcommand("grpo-sim", "Replay reward/log-prob traces through the objectives");
  add_common(grpo, common);
  grpo->add_option("--trace", trace_path, "Trace JSONL file")->required()->check(CLI::ExistingFile);
  grpo->add_option("--gamma", gamma, "Temporal loss weight");
  grpo->add_option("--clip-epsilon", clip, "Ratio clip width");
  grpo->add_option("--kl-beta", beta, "Reference KL weight");

  auto* export_mot = app.add_subcommand("export-mot", "Write per-instance MOT-format files");
  add_common(export_mot, common);
  export_mot->add_option("--instances", instances_path, "Instance JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  export_mot->add_option("--predictions", predictions_path, "Predictions JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  export_mot->add_flag("--with-gt", with_gt, "Also write ground-truth files");

  auto* build_cmd = app.add_subcommand("build-dataset", "Build query instances from MOT annotations");
  add_common(build_cmd, common);
  build_cmd->add_option("mot_root", build.mot_root, "Directory of <seq>/gt/gt.txt")
      ->required()
      ->check(CLI::ExistingDirectory);
  build_cmd->add_option("--kind", build.kinds, "Query kind (repeatable)")
      ->check(CLI::IsMember({"single", "multi", "occlusion"}));
  build_cmd->add_option("--window", build.window, "Future frames per instance (5 or 6)");
  build_cmd->add_option("--split-ratio", build.split_ratio, "Share of sequences in train");
  build_cmd->add_option("--max-per-sequence", build.max_per_sequence,
                        "Instance cap per sequence and kind (0 = none)");
  build_cmd->add_option("--query-mode", build.query_mode, "Query text source")
      ->check(CLI::IsMember({"template", "remote"}));
  build_cmd->add_option("--query-endpoint", build.query_endpoint,
                        "Chat-completion URL for remote query mode");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*evaluate) return cmd_evaluate(common, instances_path, predictions_path, out);
    if (*reward) return cmd_reward(common, instances_path, rollouts_path, spatial_mode, out);
    if (*grpo) return cmd_grpo_sim(common, trace_path, gamma, clip, beta, out);
    if (*export_mot) return cmd_export_mot(common, instances_path, predictions_path, with_gt, out);
    if (*build_cmd) return cmd_build_dataset(common, build, out, err);
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
  err << "internal error: no subcommand dispatched\n";
  return kExitInvariant;
}

}  // namespace motrl::cli
