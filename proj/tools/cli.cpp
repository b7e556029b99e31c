#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gknet/checkpoint.hpp"
#include "gknet/dataset.hpp"
#include "gknet/error.hpp"
#include "gknet/image.hpp"
#include "gknet/model_config.hpp"
#include "gknet/report.hpp"
#include "gknet/synth.hpp"
#include "gknet/trainer.hpp"

namespace fs = std::filesystem;

namespace gknet::cli {

namespace {

/// Bad flags, missing inputs or unusable configuration: exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

constexpr std::size_t kDefaultResolution = 224;

struct Splits {
  Dataset train;
  Dataset val;
};

Dataset materialize(const DatasetIndex& index, const LoadOptions& options) {
  std::vector<Tensor> images;
  std::vector<int> labels;
  images.reserve(index.samples.size());
  for (const auto& s : index.samples) {
    images.push_back(load_sample(s.path, options));
    labels.push_back(s.label);
  }
  return Dataset::from_tensors(index.classes, std::move(images), std::move(labels));
}

void require_directory(const std::string& path) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) throw UsageError("data directory '" + path + "' does not exist");
}

Splits load_data(const std::string& root, double val_fraction, std::uint64_t seed, const LoadOptions& options) {
  require_directory(root);
  DatasetSplits splits;
  try {
    splits = load_splits(root, val_fraction, seed);
  } catch (const IngestError& e) {
    throw UsageError(e.what());
  }
  if (splits.val.samples.empty()) throw UsageError("validation split of '" + root + "' is empty");
  return {materialize(splits.train, options), materialize(splits.val, options)};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Network open_checkpoint(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw UsageError("checkpoint '" + path + "' does not exist");
  try {
    return load_checkpoint(path);
  } catch (const CheckpointError& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::string> class_labels(const Network& net) {
  if (!net.class_names().empty()) return net.class_names();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < net.class_count(); ++i) names.push_back("class" + std::to_string(i));
  return names;
}

struct TrainFlags {
  std::string data;
  std::string model;
  std::string preset;
  std::string optimizer = "adam";
  std::optional<double> lr;
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::optional<std::size_t> patience;
  std::string preprocess = "rescale";
  std::optional<std::size_t> resolution;
  std::size_t channels = 1;
  std::uint64_t seed = 42;
  double val_fraction = 0.1;
  std::string out_checkpoint;
  std::string out_history;
  bool quiet = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "Dataset root (class directories, or train/ and val/)")->required();
  auto* model = cmd->add_option("--model", f.model, "Model spec file (*.gknet)");
  auto* preset = cmd->add_option("--preset", f.preset, "Built-in preset: mini-inception, mini-resnet, mini-densenet");
  model->excludes(preset);
  cmd->add_option("--optimizer", f.optimizer, "sgd, rmsprop or adam")->capture_default_str();
  cmd->add_option("--lr", f.lr, "Learning rate (default 0.01 for sgd, 0.001 otherwise)");
  cmd->add_option("--batch-size", f.batch_size, "Samples per update")->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Maximum number of epochs")->capture_default_str();
  cmd->add_option("--patience", f.patience, "Early-stopping patience, 0 disables (default min(5, epochs))");
  cmd->add_option("--preprocess", f.preprocess, "rescale or samplewise")->capture_default_str();
  cmd->add_option("--resolution", f.resolution, "Input resolution (default 224 for presets, the file's for --model)");
  cmd->add_option("--channels", f.channels, "Input channels for presets (1 or 3)")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed for initialization, splitting and shuffling")->capture_default_str();
  cmd->add_option("--val-fraction", f.val_fraction, "Validation share when the data is not pre-split")
      ->capture_default_str();
  cmd->add_option("--out-checkpoint", f.out_checkpoint, "Where to write the trained checkpoint");
  cmd->add_option("--out-history", f.out_history, "Where to write the History CSV");
  cmd->add_flag("--quiet", f.quiet, "Suppress per-epoch progress on stderr");
}

TrainConfig make_train_config(const std::string& optimizer, std::optional<double> lr, std::size_t batch_size,
                              std::size_t epochs, std::optional<std::size_t> patience,
                              const std::string& preprocess, std::size_t resolution, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.optimizer = OptimizerConfig::defaults(parse_optimizer(optimizer));
  if (lr) cfg.optimizer.learning_rate = *lr;
  cfg.batch_size = batch_size;
  cfg.epochs = epochs;
  cfg.patience = patience ? *patience : std::min<std::size_t>(5, epochs);
  cfg.preprocess = parse_preprocess(preprocess);
  cfg.resolution = resolution;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  if (f.model.empty() == f.preset.empty()) throw UsageError("train needs exactly one of --model or --preset");
  ModelConfig config;
  std::size_t channels = f.channels;
  if (!f.model.empty()) {
    config = parse_model_spec(read_text(f.model));
    channels = config.channels;
  } else {
    config = builtin_preset(f.preset, channels, f.resolution.value_or(kDefaultResolution), 3);
  }
  const std::size_t resolution = f.resolution.value_or(config.resolution);
  if (!f.model.empty() && f.resolution) config = with_io(config, channels, resolution, config.class_count());
  const TrainConfig cfg = make_train_config(f.optimizer, f.lr, f.batch_size, f.epochs, f.patience, f.preprocess,
                                            resolution, f.seed);

  const LoadOptions load{channels, resolution, cfg.preprocess};
  Splits data = load_data(f.data, f.val_fraction, f.seed, load);
  if (!f.model.empty()) {
    if (config.class_count() != data.train.class_count()) {
      throw UsageError("model has " + std::to_string(config.class_count()) + " softmax outputs but the data has " +
                       std::to_string(data.train.class_count()) + " classes");
    }
  } else {
    config = builtin_preset(f.preset, channels, resolution, data.train.class_count());
  }

  Network net = instantiate(config, f.seed);
  net.set_class_names(data.train.classes());
  if (!f.quiet) {
    err << "model " << (config.name.empty() ? std::string("(unnamed)") : config.name) << ", "
        << net.parameter_count() << " parameters; " << data.train.size() << " train / " << data.val.size()
        << " val samples" << std::endl;
  }
  TrainHooks hooks;
  if (!f.quiet) hooks.log = [&](const std::string& line) { err << line << std::endl; };
  History history = train(net, data.train, data.val, cfg, hooks);
  history.echo["model"] = config.name.empty() ? fs::path(f.model).filename().string() : config.name;

  if (!f.out_checkpoint.empty()) save_checkpoint(net, f.out_checkpoint);
  if (!f.out_history.empty()) write_history(history, f.out_history);
  const EvalResult result = evaluate(net, data.val, cfg.batch_size, cfg.loss);
  out << report_to_json(result.report).dump(2) << std::endl;
  return kExitOk;
}

struct EvalFlags {
  std::string data;
  std::string checkpoint;
  std::string preprocess = "rescale";
  std::optional<std::size_t> resolution;
  std::string split = "val";
  double val_fraction = 0.1;
  std::uint64_t seed = 42;
  std::size_t batch_size = 64;
};

void check_resolution(const Network& net, std::optional<std::size_t> resolution) {
  if (resolution && *resolution != net.input_shape()[1]) {
    throw UsageError("checkpoint expects resolution " + std::to_string(net.input_shape()[1]) + ", got --resolution " +
                     std::to_string(*resolution));
  }
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  Network net = open_checkpoint(f.checkpoint);
  check_resolution(net, f.resolution);
  require_directory(f.data);
  const LoadOptions load{net.input_shape()[0], net.input_shape()[1], parse_preprocess(f.preprocess)};

  DatasetIndex index;
  try {
    if (f.split == "all") {
      const DatasetSplits s = load_splits(f.data, 0.0, f.seed);
      index = s.train;
      if (s.presplit) {
        index.samples.insert(index.samples.end(), s.val.samples.begin(), s.val.samples.end());
      }
    } else {
      const DatasetSplits s = load_splits(f.data, f.val_fraction, f.seed);
      index = f.split == "train" ? s.train : s.val;
    }
  } catch (const IngestError& e) {
    throw UsageError(e.what());
  }
  if (index.classes.size() != net.class_count()) {
    throw UsageError("data has " + std::to_string(index.classes.size()) + " classes but the checkpoint outputs " +
                     std::to_string(net.class_count()));
  }
  if (index.samples.empty()) throw UsageError("selected split is empty");
  const Dataset data = materialize(index, load);
  const EvalResult result = evaluate(net, data, f.batch_size);
  out << report_to_json(result.report).dump(2) << std::endl;
  return kExitOk;
}

struct PredictFlags {
  std::string image;
  std::string checkpoint;
  std::string preprocess = "rescale";
};

int cmd_predict(const PredictFlags& f, std::ostream& out) {
  Network net = open_checkpoint(f.checkpoint);
  std::error_code ec;
  if (!fs::is_regular_file(f.image, ec)) throw UsageError("image '" + f.image + "' does not exist");
  const LoadOptions load{net.input_shape()[0], net.input_shape()[1], parse_preprocess(f.preprocess)};
  Tensor x = load_sample(f.image, load);
  Shape batch{1};
  batch.insert(batch.end(), x.shape().begin(), x.shape().end());
  const Tensor probs = net.infer(x.reshaped(batch));
  const auto names = class_labels(net);
  nlohmann::json j;
  j["image"] = f.image;
  j["classes"] = names;
  j["probabilities"] = probs.values();
  j["predicted"] = names.at(static_cast<std::size_t>(argmax_rows(probs).front()));
  out << j.dump(2) << std::endl;
  return kExitOk;
}

struct SweepFlags {
  std::string data;
  std::vector<std::string> presets = preset_names();
  std::vector<std::string> optimizers{"sgd", "rmsprop", "adam"};
  std::vector<std::uint64_t> seeds{42};
  std::optional<double> lr;
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::optional<std::size_t> patience;
  std::string preprocess = "rescale";
  std::size_t resolution = kDefaultResolution;
  std::size_t channels = 1;
  double val_fraction = 0.1;
  std::string out;
  std::string out_dir;
  std::size_t parallel = 1;
  bool quiet = false;
};

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  if (f.parallel == 0) throw UsageError("--parallel must be positive");
  struct Run {
    std::string preset;
    std::string optimizer;
    std::uint64_t seed;
    TrainConfig cfg;
    std::vector<SweepRow> rows;
  };
  std::vector<Run> runs;
  for (const auto& p : f.presets) {
    builtin_preset(p, f.channels, f.resolution, 3);
    for (const auto& o : f.optimizers) {
      for (std::uint64_t s : f.seeds) {
        runs.push_back({p, o, s,
                        make_train_config(o, f.lr, f.batch_size, f.epochs, f.patience, f.preprocess, f.resolution, s),
                        {}});
      }
    }
  }
  if (runs.empty()) throw UsageError("sweep has no runs");
  if (!f.out_dir.empty()) fs::create_directories(f.out_dir);

  const LoadOptions load{f.channels, f.resolution, parse_preprocess(f.preprocess)};
  const std::uint64_t split_seed = f.seeds.front();
  const Splits data = load_data(f.data, f.val_fraction, split_seed, load);

  std::mutex log_mutex;
  auto run_one = [&](Run& run) {
    const std::string tag =
        f.seeds.size() > 1 ? run.preset + "@" + std::to_string(run.seed) : run.preset;
    Network net = instantiate(builtin_preset(run.preset, f.channels, f.resolution, data.train.class_count()), run.seed);
    net.set_class_names(data.train.classes());
    TrainHooks hooks;
    if (!f.quiet) {
      hooks.log = [&](const std::string& line) {
        std::lock_guard lock(log_mutex);
        err << "[" << tag << " " << run.optimizer << "] " << line << std::endl;
      };
    }
    History history = train(net, data.train, data.val, run.cfg, hooks);
    history.echo["model"] = run.preset;
    if (!f.out_dir.empty()) {
      const std::string stem = run.preset + "_" + run.optimizer + "_" + std::to_string(run.seed);
      save_checkpoint(net, fs::path(f.out_dir) / (stem + ".gkpt"));
      write_history(history, fs::path(f.out_dir) / (stem + ".csv"));
    }
    run.rows = sweep_rows(tag, run.optimizer, evaluate(net, data.val, run.cfg.batch_size).report);
  };

  if (f.parallel == 1) {
    for (auto& r : runs) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(runs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(f.parallel, runs.size()); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
          try {
            run_one(runs[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<SweepRow> rows;
  for (const auto& r : runs) rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  const std::string csv = sweep_to_csv(rows);
  if (f.out.empty()) {
    out << csv;
  } else {
    write_text(f.out, csv);
  }
  return kExitOk;
}

struct ReportFlags {
  std::vector<std::string> histories;
  std::string out;
};

int cmd_report(const ReportFlags& f, std::ostream& out) {
  std::vector<NamedHistory> runs;
  for (const auto& spec : f.histories) {
    std::string name;
    std::string path = spec;
    if (auto eq = spec.find('='); eq != std::string::npos) {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    } else {
      name = fs::path(spec).stem().string();
    }
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw UsageError("history '" + path + "' does not exist");
    runs.push_back({name, read_history(path)});
  }
  const std::string csv = report_to_csv(report_rows(runs));
  if (f.out.empty()) {
    out << csv;
  } else {
    write_text(f.out, csv);
  }
  return kExitOk;
}

struct SynthFlags {
  std::string out;
  SynthOptions options;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  const std::size_t n = synth_dataset(f.out, f.options);
  out << "wrote " << n << " images to " << f.out << std::endl;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train and evaluate small convolutional image classifiers", "gknet"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic grayscale corpus");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--per-class", synth.options.per_class, "Images per class (training split)")
      ->capture_default_str();
  synth_cmd->add_option("--val-per-class", synth.options.val_per_class,
                        "Validation images per class; > 0 writes train/ and val/ subtrees")
      ->capture_default_str();
  synth_cmd->add_option("--classes", synth.options.classes, "Number of classes (1-5)")->capture_default_str();
  synth_cmd->add_option("--resolution", synth.options.resolution, "Image side length")->capture_default_str();
  synth_cmd->add_option("--seed", synth.options.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--noise", synth.options.noise_sigma, "Gaussian noise sigma on the 0-255 scale")
      ->capture_default_str();

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a model and print validation metrics as JSON");
  add_train_flags(train_cmd, train_flags);

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and print metrics as JSON");
  eval_cmd->add_option("--data", eval.data, "Dataset root")->required();
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "GKPT1 checkpoint")->required();
  eval_cmd->add_option("--preprocess", eval.preprocess, "rescale or samplewise")->capture_default_str();
  eval_cmd->add_option("--resolution", eval.resolution, "Must match the checkpoint if given");
  eval_cmd->add_option("--split", eval.split, "val, train or all")
      ->check(CLI::IsMember({"val", "train", "all"}))
      ->capture_default_str();
  eval_cmd->add_option("--val-fraction", eval.val_fraction, "Validation share for flat corpora")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Split seed for flat corpora")->capture_default_str();
  eval_cmd->add_option("--batch-size", eval.batch_size, "Inference batch size")->capture_default_str();

  PredictFlags predict;
  auto* predict_cmd = app.add_subcommand("predict", "Print class probabilities for one image");
  predict_cmd->add_option("--image", predict.image, "PNG, PGM or PPM file")->required();
  predict_cmd->add_option("--checkpoint", predict.checkpoint, "GKPT1 checkpoint")->required();
  predict_cmd->add_option("--preprocess", predict.preprocess, "rescale or samplewise")->capture_default_str();

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train every preset with every optimizer; write per-class CSV");
  sweep_cmd->add_option("--data", sweep.data, "Dataset root")->required();
  sweep_cmd->add_option("--presets", sweep.presets, "Comma-separated preset names")->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--optimizers", sweep.optimizers, "Comma-separated optimizers")->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds, "Comma-separated seeds")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--lr", sweep.lr, "Learning rate for every run (default per optimizer)");
  sweep_cmd->add_option("--batch-size", sweep.batch_size, "Samples per update")->capture_default_str();
  sweep_cmd->add_option("--epochs", sweep.epochs, "Maximum number of epochs")->capture_default_str();
  sweep_cmd->add_option("--patience", sweep.patience, "Early-stopping patience (default min(5, epochs))");
  sweep_cmd->add_option("--preprocess", sweep.preprocess, "rescale or samplewise")->capture_default_str();
  sweep_cmd->add_option("--resolution", sweep.resolution, "Input resolution")->capture_default_str();
  sweep_cmd->add_option("--channels", sweep.channels, "Input channels")->capture_default_str();
  sweep_cmd->add_option("--val-fraction", sweep.val_fraction, "Validation share for flat corpora")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "CSV path (stdout when omitted)");
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Directory for per-run checkpoints and histories");
  sweep_cmd->add_option("--parallel", sweep.parallel, "Concurrent runs")->capture_default_str();
  sweep_cmd->add_flag("--quiet", sweep.quiet, "Suppress per-epoch progress");

  ReportFlags report;
  auto* report_cmd = app.add_subcommand("report", "Merge History CSVs into long-format plot data");
  report_cmd->add_option("--history", report.histories, "History CSV files, optionally name=path")
      ->required()
      ->expected(1, -1);
  report_cmd->add_option("--out", report.out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*train_cmd) return cmd_train(train_flags, out, err);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*predict_cmd) return cmd_predict(predict, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out, err);
    if (*report_cmd) return cmd_report(report, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << std::endl;
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace gknet::cli
