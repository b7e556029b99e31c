#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gknet/dataset.hpp"
#include "gknet/losses.hpp"
#include "gknet/metrics.hpp"
#include "gknet/network.hpp"
#include "gknet/optimizers.hpp"

namespace gknet {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  OptimizerConfig optimizer = OptimizerConfig::defaults(OptimizerKind::kAdam);
  LossKind loss = LossKind::kCategoricalCrossEntropy;
  PreprocessMode preprocess = PreprocessMode::kRescale;
  std::size_t patience = 5;  // 0 disables early stopping
  std::uint64_t seed = 42;
  std::size_t resolution = 64;
  /// Epoch number of the first epoch run (selects the shuffle order); lets a
  /// run continued from a checkpoint replay the same batches.
  std::size_t start_epoch = 1;

  void validate() const;
  std::map<std::string, std::string> echo() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0, train_acc = 0.0, train_prec = 0.0, train_rec = 0.0;
  double val_loss = 0.0, val_acc = 0.0, val_prec = 0.0, val_rec = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct History {
  std::vector<EpochRecord> records;
  bool stopped_early = false;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::map<std::string, std::string> echo;
};

struct TrainHooks {
  /// Replaces the measured validation loss used for early stopping.
  std::function<double(std::size_t epoch, double measured)> val_loss_override;
  /// Called after each epoch's record is appended, before any restore.
  std::function<void(std::size_t epoch, const Network& network, const EpochRecord& record)> on_epoch_end;
  std::function<void(const std::string& line)> log;
};

struct EvalResult {
  MetricsReport report;
  ConfusionMatrix confusion{1};
  double loss = 0.0;
  std::vector<int> predictions;
};

/// Mini-batch training with per-epoch evaluation and early stopping on
/// validation loss; the best-validation-loss weights are restored at exit.
/// Throws ConfigError on class-count mismatch and NumericError on a
/// non-finite loss.
History train(Network& network, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config,
              const TrainHooks& hooks = {});

/// Inference pass: argmax predictions, confusion matrix, report and mean loss.
EvalResult evaluate(const Network& network, const Dataset& data, std::size_t batch_size = 64,
                    LossKind loss = LossKind::kCategoricalCrossEntropy, double z = kZ95);

inline constexpr char kHistoryHeader[] =
    "epoch,train_loss,train_acc,train_prec,train_rec,val_loss,val_acc,val_prec,val_rec";

/// CSV with '#' metadata lines (key=value, sorted) followed by the header
/// and one row per epoch; numbers use %.17g so values round-trip.
std::string history_to_csv(const History& history);
History history_from_csv(std::string_view text);
void write_history(const History& history, const std::filesystem::path& path);
History read_history(const std::filesystem::path& path);

}  // namespace gknet
