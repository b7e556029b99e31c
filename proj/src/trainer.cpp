#include "gknet/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gknet/error.hpp"
#include "gknet/image.hpp"

namespace gknet {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void check_classes(const Network& network, const Dataset& data, const char* split) {
  if (data.class_count() != network.class_count()) {
    throw ConfigError(std::string(split) + " split has " + std::to_string(data.class_count()) +
                      " classes but the network outputs " + std::to_string(network.class_count()));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (patience > epochs) throw ConfigError("patience must not exceed the epoch count");
  if (resolution == 0) throw ConfigError("resolution must be positive");
  if (start_epoch == 0) throw ConfigError("epochs are numbered from 1");
  optimizer.validate();
}

std::map<std::string, std::string> TrainConfig::echo() const {
  auto out = optimizer.echo();
  out["epochs"] = std::to_string(epochs);
  out["batch_size"] = std::to_string(batch_size);
  out["loss"] = loss_name(loss);
  out["preprocess"] = preprocess_name(preprocess);
  out["patience"] = std::to_string(patience);
  out["seed"] = std::to_string(seed);
  out["resolution"] = std::to_string(resolution);
  return out;
}

EvalResult evaluate(const Network& network, const Dataset& data, std::size_t batch_size, LossKind loss_kind,
                    double z) {
  check_classes(network, data, "evaluation");
  if (data.size() == 0) throw ConfigError("cannot evaluate an empty split");
  const std::size_t k = network.class_count();
  EvalResult out;
  out.confusion = ConfusionMatrix(k, data.classes());
  double loss_sum = 0.0;
  BatchIterator it(data, batch_size, 0, 0, false);
  while (auto batch = it.next()) {
    const Tensor probs = network.infer(batch->images);
    const std::size_t b = batch->labels.size();
    loss_sum += loss(loss_kind, probs, one_hot(batch->labels, k)) * static_cast<double>(b);
    const auto preds = argmax_rows(probs);
    for (std::size_t i = 0; i < b; ++i) {
      out.confusion.add(static_cast<std::size_t>(batch->labels[i]), static_cast<std::size_t>(preds[i]));
      out.predictions.push_back(preds[i]);
    }
  }
  out.loss = loss_sum / static_cast<double>(data.size());
  out.report = make_report(out.confusion, z);
  return out;
}

History train(Network& network, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config,
              const TrainHooks& hooks) {
  config.validate();
  check_classes(network, train_set, "training");
  check_classes(network, val_set, "validation");
  if (train_set.size() == 0) throw ConfigError("training split is empty");
  if (val_set.size() == 0) throw ConfigError("validation split is empty");

  const std::size_t k = network.class_count();
  const bool fused = config.loss == LossKind::kCategoricalCrossEntropy;
  Optimizer optimizer(config.optimizer);
  const auto params = network.parameters();

  History history;
  history.echo = config.echo();
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_weights = network.snapshot();
  std::size_t since_best = 0;

  for (std::size_t n = 0; n < config.epochs; ++n) {
    const std::size_t epoch = config.start_epoch + n;
    BatchIterator it(train_set, config.batch_size, config.seed, epoch, true);
    ConfusionMatrix cm(k);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    while (auto batch = it.next()) {
      ++batch_no;
      const Tensor target = one_hot(batch->labels, k);
      const Tensor probs = network.forward(batch->images, true);
      const double l = loss(config.loss, probs, target);
      if (!std::isfinite(l)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no));
      }
      loss_sum += l * static_cast<double>(batch->labels.size());
      const GradientSet grads = fused ? network.backward_from_logits(softmax_cross_entropy_logit_gradient(probs, target))
                                      : network.backward(loss_gradient(config.loss, probs, target));
      optimizer.step(params, grads.params);
      const auto preds = argmax_rows(probs);
      for (std::size_t i = 0; i < preds.size(); ++i) {
        cm.add(static_cast<std::size_t>(batch->labels[i]), static_cast<std::size_t>(preds[i]));
      }
    }
    const MetricsReport train_report = make_report(cm);
    const EvalResult val = evaluate(network, val_set, config.batch_size, config.loss);
    if (!std::isfinite(val.loss)) {
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.train_acc = train_report.accuracy;
    rec.train_prec = train_report.macro_precision;
    rec.train_rec = train_report.macro_recall;
    rec.val_loss = val.loss;
    rec.val_acc = val.report.accuracy;
    rec.val_prec = val.report.macro_precision;
    rec.val_rec = val.report.macro_recall;
    history.records.push_back(rec);
    history.epochs_run = history.records.size();
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, network, rec);
    if (hooks.log) {
      hooks.log("epoch " + std::to_string(epoch) + " loss " + fmt_short(rec.train_loss) + " acc " +
                fmt_short(rec.train_acc) + " val_loss " + fmt_short(rec.val_loss) + " val_acc " +
                fmt_short(rec.val_acc));
    }

    const double monitored = hooks.val_loss_override ? hooks.val_loss_override(epoch, val.loss) : val.loss;
    if (monitored < best_loss) {
      best_loss = monitored;
      history.best_epoch = epoch;
      best_weights = network.snapshot();
      since_best = 0;
    } else {
      ++since_best;
    }
    if (config.patience > 0 && since_best >= config.patience) {
      history.stopped_early = n + 1 < config.epochs;
      break;
    }
  }
  if (history.best_epoch != 0) network.restore(best_weights);
  return history;
}

std::string history_to_csv(const History& history) {
  std::ostringstream os;
  auto meta = history.echo;
  meta["best_epoch"] = std::to_string(history.best_epoch);
  meta["epochs_run"] = std::to_string(history.epochs_run);
  meta["stopped_early"] = history.stopped_early ? "1" : "0";
  for (const auto& [key, value] : meta) os << "# " << key << '=' << value << '\n';
  os << kHistoryHeader << '\n';
  for (const auto& r : history.records) {
    os << r.epoch << ',' << fmt(r.train_loss) << ',' << fmt(r.train_acc) << ',' << fmt(r.train_prec) << ','
       << fmt(r.train_rec) << ',' << fmt(r.val_loss) << ',' << fmt(r.val_acc) << ',' << fmt(r.val_prec) << ','
       << fmt(r.val_rec) << '\n';
  }
  return os.str();
}

History history_from_csv(std::string_view text) {
  History h;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = body.substr(0, eq);
      const std::string value = body.substr(eq + 1);
      if (key == "best_epoch") {
        h.best_epoch = std::stoul(value);
      } else if (key == "epochs_run") {
        h.epochs_run = std::stoul(value);
      } else if (key == "stopped_early") {
        h.stopped_early = value == "1";
      } else {
        h.echo[key] = value;
      }
      continue;
    }
    if (!header) {
      if (line != kHistoryHeader) throw ConfigError("history line " + std::to_string(line_no) + ": unexpected header");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) {
      throw ConfigError("history line " + std::to_string(line_no) + ": expected 9 fields");
    }
    try {
      EpochRecord r;
      r.epoch = std::stoul(cells[0]);
      double* fields[] = {&r.train_loss, &r.train_acc, &r.train_prec, &r.train_rec,
                          &r.val_loss,   &r.val_acc,   &r.val_prec,   &r.val_rec};
      for (std::size_t i = 0; i < 8; ++i) *fields[i] = std::stod(cells[i + 1]);
      h.records.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("history line " + std::to_string(line_no) + ": malformed number");
    }
  }
  if (!header) throw ConfigError("history has no header line");
  if (h.epochs_run == 0) h.epochs_run = h.records.size();
  return h;
}

void write_history(const History& history, const std::filesystem::path& path) {
  const std::string text = history_to_csv(history);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

History read_history(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return history_from_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace gknet
