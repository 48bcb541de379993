// sigclass: label scenes, synthesize datasets, train/tune CART models, predict and evaluate.
//
// Exit codes: 0 ok, 2 input, 3 generation, 4 training, 5 evaluation.
// Failures print exactly one line to stderr:
//   sigclass: error code=<n> kind=<kind> message="<text>"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sigclass/cart.hpp"
#include "sigclass/evaluation.hpp"
#include "sigclass/geometry.hpp"
#include "sigclass/ingest.hpp"
#include "sigclass/io.hpp"
#include "sigclass/scene_io.hpp"
#include "sigclass/synth.hpp"

namespace fs = std::filesystem;
using namespace sigclass;

namespace {

enum ExitCode : int { kOk = 0, kInput = 2, kGeneration = 3, kTraining = 4, kEvaluation = 5 };

struct CliError {
  int code;
  std::string kind;
  std::string message;
};

[[noreturn]] void fail(int code, std::string kind, std::string message) {
  throw CliError{code, std::move(kind), std::move(message)};
}

/// Options shared by every subcommand; flags override the config file.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  nlohmann::json config = nlohmann::json::object();
  fs::path config_dir = ".";

  void load_config() {
    if (config_path.empty()) return;
    try {
      config = nlohmann::json::parse(read_file(config_path));
    } catch (const nlohmann::json::parse_error& ex) {
      fail(kInput, "ConfigError", config_path + ": " + ex.what());
    } catch (const InputError& ex) {
      fail(kInput, "ConfigError", ex.what());
    }
    if (!config.is_object()) fail(kInput, "ConfigError", config_path + ": top level must be an object");
    config_dir = fs::path(config_path).parent_path();
    if (config_dir.empty()) config_dir = ".";
  }

  [[nodiscard]] std::uint64_t seed_value() const {
    if (seed) return *seed;
    if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
    return 42;
  }

  [[nodiscard]] fs::path out_dir() const {
    if (!out.empty()) return out;
    if (config.contains("out")) return resolve(config.at("out").get<std::string>());
    return ".";
  }

  [[nodiscard]] fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : config_dir / path;
  }

  /// Flag value if given, else config[key] resolved against the config directory.
  [[nodiscard]] fs::path path_option(const std::string& flag, const char* key) const {
    if (!flag.empty()) return flag;
    if (config.contains(key)) return resolve(config.at(key).get<std::string>());
    fail(kInput, "MissingOption", std::string("no ") + key + " given (flag or config)");
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file; flags override its values");
  cmd->add_option("--seed", c.seed, "Random seed (default 42)");
  cmd->add_option("--out", c.out, "Output directory");
}

std::string read_input(const fs::path& p) {
  if (!fs::exists(p)) fail(kInput, "FileNotFound", p.string());
  return read_file(p);
}

// ---------------------------------------------------------------------------

struct LabelArgs {
  Common common;
  std::string scene;
  std::string satellites;
};

int cmd_label(LabelArgs& a) {
  a.common.load_config();
  const auto scene_path = a.common.path_option(a.scene, "scene");
  const auto sats_path = a.common.path_option(a.satellites, "satellites");
  const auto scene = parse_scene(read_input(scene_path));
  const auto sats = parse_satellite_csv(read_input(sats_path));

  std::string csv = "scene_id,receiver_id,sat_id,azimuth_deg,elevation_deg,label\n";
  for (const auto& rx : scene.receivers()) {
    for (const auto& sat : sats) {
      const auto truth =
          label_condition(scene, rx.position, direction_from_az_el(sat.azimuth_deg, sat.elevation_deg));
      csv += scene.scene_id() + ',' + rx.id + ',' + sat.sat_id + ',' + csv::format_double(sat.azimuth_deg) + ',' +
             csv::format_double(sat.elevation_deg) + ',' + std::string(ground_truth_name(truth)) + '\n';
    }
  }
  const auto out = a.common.out_dir() / ("labels_" + scene.scene_id() + ".csv");
  write_file_atomic(out, csv);
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_synth(Common& c) {
  c.load_config();
  if (c.config_path.empty()) fail(kInput, "MissingOption", "synth needs --config");
  auto protocol = protocol_from_json(c.config, c.config_dir);
  if (c.seed) protocol.seed = *c.seed;
  for (const auto& part : protocol.partitions) {
    for (const auto& s : part.scenes) {
      if (!fs::exists(s)) fail(kInput, "FileNotFound", s.string());
    }
    for (const auto& s : part.satellites) {
      if (!fs::exists(s)) fail(kInput, "FileNotFound", s.string());
    }
  }

  std::vector<CatalogEntry> catalog;
  const auto out = c.out_dir();
  for (const auto& part : protocol.partitions) {
    Dataset d;
    try {
      d = generate_partition(part, protocol.model, protocol.seed);
    } catch (const InputError&) {
      throw;
    } catch (const Error& ex) {
      fail(kGeneration, "GenerationError", "partition " + part.tag + ": " + ex.what());
    }
    write_file_atomic(out / (part.tag + ".csv"), write_dataset_csv(d));
    catalog.push_back(catalog_entry(d));
    std::cout << part.tag << ": " << d.size() << " samples (NLOS " << d.count(SignalClass::NlosOnly) << ", LOS "
              << d.count(SignalClass::LosOnly) << ", LOS+NLOS " << d.count(SignalClass::LosNlos) << ")\n";
  }
  write_file_atomic(out / "catalog.json", catalog_to_json(catalog).dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string dataset;
  std::optional<std::string> max_depth;
  std::optional<std::size_t> min_samples_split;
  std::optional<std::size_t> min_samples_leaf;
  std::optional<double> min_impurity_decrease;
  std::optional<std::size_t> k;
};

Dataset load_dataset(const fs::path& p) {
  return parse_dataset_csv(read_input(p), p.stem().string());
}

TreeParams resolve_params(const TrainArgs& a) {
  TreeParams p;
  if (a.common.config.contains("params")) p = params_from_json(a.common.config.at("params"));
  if (a.max_depth) {
    if (*a.max_depth == "none") {
      p.max_depth.reset();
    } else {
      try {
        p.max_depth = std::stoul(*a.max_depth);
      } catch (const std::exception&) {
        fail(kInput, "InvalidOption", "--max-depth must be a count or 'none'");
      }
    }
  }
  if (a.min_samples_split) p.min_samples_split = *a.min_samples_split;
  if (a.min_samples_leaf) p.min_samples_leaf = *a.min_samples_leaf;
  if (a.min_impurity_decrease) p.min_impurity_decrease = *a.min_impurity_decrease;
  p.validate();
  return p;
}

int cmd_train(TrainArgs& a) {
  a.common.load_config();
  const auto dataset = load_dataset(a.common.path_option(a.dataset, "dataset"));
  const auto params = resolve_params(a);
  TreeModel model;
  try {
    model = fit(dataset, params, a.common.seed_value());
  } catch (const Error& ex) {
    fail(kTraining, "TrainingError", ex.what());
  }
  const auto out = a.common.out_dir() / "model.json";
  write_file_atomic(out, save_model(model));
  std::cout << "params: " << params.describe() << "\n"
            << "nodes: " << model.nodes().size() << ", depth: " << model.depth() << "\n"
            << "wrote " << out.string() << "\n";
  return kOk;
}

int cmd_tune(TrainArgs& a) {
  a.common.load_config();
  const auto dataset = load_dataset(a.common.path_option(a.dataset, "dataset"));
  std::vector<TreeParams> grid;
  if (a.common.config.contains("grid")) {
    for (const auto& jp : a.common.config.at("grid")) grid.push_back(params_from_json(jp));
  } else {
    grid = default_grid();
  }
  std::size_t k = 5;
  if (a.k) k = *a.k;
  else if (a.common.config.contains("k")) k = a.common.config.at("k").get<std::size_t>();
  const auto seed = a.common.seed_value();

  CvReport report;
  TreeModel model;
  try {
    report = grid_search(dataset, grid, k, seed);
    model = fit(dataset, report.best, seed);
  } catch (const Error& ex) {
    fail(kTraining, "TrainingError", ex.what());
  }
  const auto out = a.common.out_dir();
  write_file_atomic(out / "cv_report.json", cv_report_to_json(report).dump(2) + "\n");
  write_file_atomic(out / "model.json", save_model(model));
  std::cout << "grid points: " << report.grid.size() << "\n"
            << "best: " << report.best.describe() << " (mean CV accuracy "
            << percent(report.grid[report.best_index].mean_accuracy) << ")\n"
            << "wrote " << (out / "model.json").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

TreeModel load_model_file(const fs::path& p) {
  const auto text = read_input(p);
  try {
    auto loaded = load_model(text);
    for (const auto& w : loaded.warnings) std::cerr << "sigclass: warning: " << w << "\n";
    return std::move(loaded.model);
  } catch (const CorruptModel& ex) {
    fail(kEvaluation, "CorruptModel", p.string() + ": " + ex.what());
  }
}

struct PredictArgs {
  Common common;
  std::string model;
  std::string input;
};

int cmd_predict(PredictArgs& a) {
  a.common.load_config();
  const auto model = load_model_file(a.common.path_option(a.model, "model"));
  const auto records = parse_observation_csv(read_input(a.common.path_option(a.input, "input")));
  std::string csv = "epoch,sat_id,elevation_deg,cn0_rhcp_dbhz,cn0_diff_dbhz,predicted\n";
  for (const auto& r : records) {
    const auto f = extract_features(r);
    csv += csv::format_double(r.epoch) + ',' + r.sat_id + ',' + csv::format_double(f.elevation_deg) + ',' +
           csv::format_double(f.cn0_rhcp_dbhz) + ',' + csv::format_double(f.cn0_diff_dbhz) + ',' +
           std::string(label_name(model.predict(f))) + '\n';
  }
  const auto out = a.common.out_dir() / "predictions.csv";
  write_file_atomic(out, csv);
  std::cout << "predicted " << records.size() << " records; wrote " << out.string() << "\n";
  return kOk;
}

struct EvaluateArgs {
  Common common;
  std::string model;
  std::vector<std::string> datasets;
};

int cmd_evaluate(EvaluateArgs& a) {
  a.common.load_config();
  const auto model = load_model_file(a.common.path_option(a.model, "model"));
  std::vector<fs::path> paths(a.datasets.begin(), a.datasets.end());
  if (paths.empty() && a.common.config.contains("datasets")) {
    for (const auto& p : a.common.config.at("datasets")) paths.push_back(a.common.resolve(p.get<std::string>()));
  }
  if (paths.empty()) fail(kInput, "MissingOption", "no dataset files given");

  std::vector<Dataset> parts;
  for (const auto& p : paths) {
    const auto text = read_input(p);
    try {
      parts.push_back(parse_dataset_csv(text, p.stem().string()));
    } catch (const InputError& ex) {
      fail(kEvaluation, "FormatMismatch", p.string() + ": " + ex.what());
    }
  }
  PartitionComparison cmp;
  try {
    cmp = compare_partitions(model, parts);
  } catch (const Error& ex) {
    fail(kEvaluation, "EvaluationError", ex.what());
  }
  const auto out = a.common.out_dir();
  for (const auto& r : cmp.partitions) {
    write_file_atomic(out / ("report_" + r.partition_tag + ".json"), report_to_json(r).dump(2) + "\n");
  }
  write_file_atomic(out / "report_pooled.json", report_to_json(cmp.pooled).dump(2) + "\n");

  std::vector<EvalReport> rows = cmp.partitions;
  rows.push_back(cmp.pooled);
  std::cout << report_table(rows);
  return kOk;
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
    if (c == '"') c = '\'';
  }
  return s;
}

int report_error(int code, const std::string& kind, const std::string& message) {
  std::cerr << "sigclass: error code=" << code << " kind=" << kind << " message=\"" << one_line(message) << "\"\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPS signal reception condition classification (NLOS / LOS / LOS+NLOS)", "sigclass"};
  app.require_subcommand(1);

  LabelArgs label;
  auto* label_cmd = app.add_subcommand("label", "Label every receiver x satellite pair of a scene");
  add_common(label_cmd, label.common);
  label_cmd->add_option("--scene", label.scene, "Scene JSON file");
  label_cmd->add_option("--satellites", label.satellites, "Satellite list CSV (sat_id,azimuth_deg,elevation_deg)");

  Common synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate labeled partitions from a protocol config");
  add_common(synth_cmd, synth);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit a tree with fixed hyperparameters");
  TrainArgs tune;
  auto* tune_cmd = app.add_subcommand("tune", "Grid-search hyperparameters with stratified k-fold CV, then fit");
  for (auto [cmd, args] : {std::pair{train_cmd, &train}, std::pair{tune_cmd, &tune}}) {
    add_common(cmd, args->common);
    cmd->add_option("--dataset", args->dataset, "Labeled dataset CSV");
  }
  train_cmd->add_option("--max-depth", train.max_depth, "Maximum depth or 'none'");
  train_cmd->add_option("--min-samples-split", train.min_samples_split);
  train_cmd->add_option("--min-samples-leaf", train.min_samples_leaf);
  train_cmd->add_option("--min-impurity-decrease", train.min_impurity_decrease);
  tune_cmd->add_option("-k,--folds", tune.k, "Number of CV folds (default 5)");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Classify observation CSV records");
  add_common(predict_cmd, predict_args.common);
  predict_cmd->add_option("--model", predict_args.model, "Model JSON file");
  predict_cmd->add_option("--input", predict_args.input, "Observation CSV file");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Per-partition and pooled accuracy reports");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("--model", eval.model, "Model JSON file");
  eval_cmd->add_option("datasets", eval.datasets, "Labeled dataset CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(kInput, "UsageError", e.what());
  }

  try {
    if (*label_cmd) return cmd_label(label);
    if (*synth_cmd) return cmd_synth(synth);
    if (*train_cmd) return cmd_train(train);
    if (*tune_cmd) return cmd_tune(tune);
    if (*predict_cmd) return cmd_predict(predict_args);
    if (*eval_cmd) return cmd_evaluate(eval);
  } catch (const CliError& e) {
    return report_error(e.code, e.kind, e.message);
  } catch (const InputError& e) {
    return report_error(kInput, "InputError", e.what());
  } catch (const nlohmann::json::exception& e) {
    return report_error(kInput, "ConfigError", e.what());
  } catch (const std::exception& e) {
    return report_error(1, "InternalError", e.what());
  }
  return kOk;
}
