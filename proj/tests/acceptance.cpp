// Acceptance runner: evaluates the ten release criteria and prints one
// PASS/FAIL line per criterion. Exit status is non-zero if any fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gknet/activation.hpp"
#include "gknet/blocks.hpp"
#include "gknet/checkpoint.hpp"
#include "gknet/dataset.hpp"
#include "gknet/losses.hpp"
#include "gknet/metrics.hpp"
#include "gknet/model_config.hpp"
#include "gknet/optimizers.hpp"
#include "gknet/report.hpp"
#include "gknet/synth.hpp"
#include "gknet/trainer.hpp"
#include "gradcheck.hpp"
#include "reference.hpp"
#include "temp_dir.hpp"

using namespace gknet;
using namespace gknet::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

// --- 1 -----------------------------------------------------------------

Outcome convolution_oracle() {
  const Tensor input({1, 7, 7}, {0, 1, 1, 1, 0, 0, 0,  //
                                 0, 0, 1, 1, 1, 0, 0,  //
                                 0, 0, 0, 1, 1, 1, 0,  //
                                 0, 0, 0, 1, 1, 0, 0,  //
                                 0, 0, 1, 1, 0, 0, 0,  //
                                 0, 1, 1, 0, 0, 0, 0,  //
                                 1, 1, 0, 0, 0, 0, 0});
  const Tensor kernel({1, 1, 3, 3}, {1, 0, 1, 0, 1, 0, 1, 0, 1});
  const Tensor expect({1, 5, 5}, {1, 4, 3, 4, 1,  //
                                  1, 2, 4, 3, 3,  //
                                  1, 2, 3, 4, 1,  //
                                  1, 3, 3, 1, 1,  //
                                  3, 3, 1, 1, 0});
  const auto start = Clock::now();
  const Tensor got = conv2d_valid(input, kernel);
  const double ms = seconds_since(start) * 1e3;
  Outcome o;
  o.pass = got == expect && ms < 1.0;
  o.detail = "5x5 map " + std::string(got == expect ? "exact" : "MISMATCH") + ", " + fmt("%.4f ms", ms);
  return o;
}

// --- 2 -----------------------------------------------------------------

Outcome gradient_suite() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  Rng init(17);
  Outcome o;
  double worst = 0.0;
  std::size_t checked = 0;
  std::vector<std::string> failures;
  auto record = [&](const std::string& name, const CheckResult& r) {
    worst = std::max(worst, r.worst);
    checked += r.checked;
    if (!r.ok()) failures.push_back(name + " at " + r.where + fmt(" (%.2e)", r.worst));
  };
  auto with_init = [&](Layer& layer) -> Layer& {
    layer.initialize(init);
    return layer;
  };

  Dense dense(6, 4, Activation::kTanh);
  record("dense", check_layer(with_init(dense), random_tensor({3, 6}, rng)));
  Conv2D conv_valid({2, 3, 3, 1, 0, Activation::kTanh});
  record("conv valid", check_layer(with_init(conv_valid), random_tensor({2, 2, 6, 6}, rng)));
  Conv2D conv_pad({2, 3, 3, 1, 1, Activation::kRelu});
  record("conv padded", check_layer(with_init(conv_pad), random_tensor({2, 2, 5, 5}, rng)));
  Pool2D maxpool(PoolMode::kMax, 2, 2);
  record("max pool", check_layer(maxpool, random_tensor({2, 2, 6, 6}, rng)));
  Pool2D avgpool(PoolMode::kAvg, 2, 2);
  record("avg pool", check_layer(avgpool, random_tensor({2, 2, 6, 6}, rng)));
  Dropout dropout(0.3);
  Rng mask_rng(5);
  dropout.forward(Tensor({2, 24}), {true, &mask_rng});
  dropout.set_frozen(true);
  record("dropout", check_layer(dropout, random_tensor({2, 24}, rng)));
  GlobalAvgPool gap;
  record("global avg pool", check_layer(gap, random_tensor({2, 3, 4, 4}, rng)));
  ResidualBlock residual(3);
  record("residual", check_layer(with_init(residual), random_tensor({2, 3, 5, 5}, rng)));
  InceptionBlock inception(3, {2, 2, 3, 1, 2, 2});
  record("inception", check_layer(with_init(inception), random_tensor({2, 3, 5, 5}, rng)));
  DenseBlock dense_block(2, 2, 3);
  record("dense block", check_layer(with_init(dense_block), random_tensor({2, 2, 4, 4}, rng)));

  Network net = instantiate(parse_model_spec("input 1 8\n"
                                             "conv 3 3 1 1 relu\n"
                                             "maxpool 2 2\n"
                                             "residual 3\n"
                                             "inception 2 2 2 1 1 1\n"
                                             "denseblock 1 2\n"
                                             "avgpool 2 2\n"
                                             "flatten\n"
                                             "dense 5 tanh\n"
                                             "dropout 0.2\n"
                                             "softmax 3\n"),
                            11);
  const std::vector<int> labels{0, 2};
  // Fix one dropout mask so the network is a deterministic function.
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (auto* d = dynamic_cast<Dropout*>(&net.layer(i))) {
      d->forward(Tensor({2, 5}), {true, &net.rng()});
      d->set_frozen(true);
    }
  }
  record("mini network", check_network(net, random_tensor({2, 1, 8, 8}, rng), one_hot(labels, 3)));

  const double secs = seconds_since(start);
  o.pass = failures.empty() && secs < 60.0;
  o.detail = std::to_string(checked) + " derivatives, worst rel. error " + fmt("%.2e", worst) + ", " +
             fmt("%.1f s", secs);
  for (const auto& f : failures) o.detail += "; FAILED " + f;
  return o;
}

// --- 3 -----------------------------------------------------------------

Outcome softmax_identities() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(2, 20);
  std::uniform_real_distribution<double> value(-50, 50), shift(-1000, 1000);
  double worst_sum = 0, worst_shift = 0;
  for (int i = 0; i < 500; ++i) {
    const Tensor x = random_tensor({len(rng)}, rng, -50, 50);
    const double c = shift(rng);
    const Tensor y = map(x, [c](double v) { return v + c; });
    const Tensor sx = softmax(x), sy = softmax(y);
    worst_sum = std::max({worst_sum, std::abs(sum(sx) - 1.0), std::abs(sum(sy) - 1.0)});
    for (std::size_t k = 0; k < x.size(); ++k) worst_shift = std::max(worst_shift, std::abs(sx[k] - sy[k]));
  }
  double onehot_loss = 0, worst_ln = 0;
  for (std::size_t k = 2; k <= 20; ++k) {
    Tensor t({1, k});
    t[k / 2] = 1.0;
    onehot_loss = std::max(onehot_loss, std::abs(loss(LossKind::kCategoricalCrossEntropy, t, t)));
    const double uniform = loss(LossKind::kCategoricalCrossEntropy, Tensor({1, k}, 1.0 / double(k)), t);
    worst_ln = std::max(worst_ln, std::abs(uniform - std::log(double(k))));
  }
  Outcome o;
  o.pass = worst_sum < 1e-9 && onehot_loss == 0.0 && worst_ln < 1e-12;
  o.detail = "1000 rows, max |sum-1| " + fmt("%.1e", worst_sum) + ", shift drift " + fmt("%.1e", worst_shift) +
             ", cce(onehot) " + fmt("%g", onehot_loss) + ", max |cce(uniform)-lnK| " + fmt("%.1e", worst_ln);
  return o;
}

// --- 4 -----------------------------------------------------------------

Outcome optimizer_oracles() {
  std::mt19937_64 rng(4);
  bool sgd_exact = true;
  for (int trial = 0; trial < 10; ++trial) {
    Tensor w = random_tensor({7, 5}, rng);
    const Tensor g = random_tensor({7, 5}, rng);
    const Tensor before = w;
    OptimizerConfig cfg{OptimizerKind::kSgd, 0.01 * (trial + 1)};
    sgd_step(w, g, cfg);
    for (std::size_t i = 0; i < w.size(); ++i) sgd_exact &= w[i] == before[i] - cfg.learning_rate * g[i];
  }

  bool bitwise = true;
  for (OptimizerKind kind : {OptimizerKind::kAdam, OptimizerKind::kRmsProp}) {
    Optimizer opt(OptimizerConfig::defaults(kind));
    ScalarAdam adam{0.001, 0.9, 0.999, 1e-7};
    ScalarRmsProp rms{0.001, 0.9, 1e-7};
    Tensor w = Tensor::from_list({-0.7});
    double ref = -0.7;
    for (int step = 0; step < 20; ++step) {
      const std::vector<Tensor> grads{Tensor::from_list({quad_grad(w[0])})};
      ref = kind == OptimizerKind::kAdam ? adam.step(ref, quad_grad(ref)) : rms.step(ref, quad_grad(ref));
      std::vector<Tensor*> params{&w};
      opt.step(params, grads);
      bitwise &= w[0] == ref;
    }
  }

  double worst = 0;
  for (double scale = 1e-3; scale <= 1e3 * 1.0001; scale *= 10) {
    Tensor w = Tensor::from_list({0.0}), m = Tensor::from_list({0.0}), v = Tensor::from_list({0.0});
    adam_step(w, Tensor::from_list({scale}), m, v, 1, OptimizerConfig::defaults(OptimizerKind::kAdam));
    worst = std::max(worst, std::abs(std::abs(w[0]) - 0.001) / 0.001);
  }
  Outcome o;
  o.pass = sgd_exact && bitwise && worst < 0.01;
  o.detail = std::string("sgd ") + (sgd_exact ? "exact" : "MISMATCH") + ", adam/rmsprop 20 steps " +
             (bitwise ? "bit-identical" : "DIFFER") + ", adam first step off by " + fmt("%.3f%%", worst * 100);
  return o;
}

// --- 5 -----------------------------------------------------------------

Outcome metrics_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> label(0, 2);
  std::vector<int> truth(1000), pred(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    truth[i] = label(rng);
    pred[i] = rng() % 4 == 0 ? label(rng) : truth[i];
  }
  const MetricsReport r = make_report(confusion_matrix(truth, pred, 3));
  const auto ref = count_metrics(truth, pred, 3);
  double worst = std::abs(r.accuracy - counted_accuracy(truth, pred));
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& m = r.classes[c];
    const double n = static_cast<double>(ref[c].support);
    worst = std::max({worst, std::abs(m.precision - ref[c].precision), std::abs(m.recall - ref[c].recall),
                      std::abs(m.f1 - ref[c].f1)});
    const double radius = 1.96 * std::sqrt(ref[c].f1 * (1 - ref[c].f1) / n);
    worst = std::max(worst, std::abs(confidence_radius(m.f1, ref[c].support, 1.96) - radius));
  }
  const double acc_radius = 1.96 * std::sqrt(r.accuracy * (1 - r.accuracy) / 1000.0);
  worst = std::max(worst, std::abs((r.accuracy_ci.hi - r.accuracy_ci.lo) / 2 - acc_radius));
  const double spot = std::abs(confidence_radius(0.5, 100, 1.96) - 0.098);
  Outcome o;
  o.pass = worst < 1e-12 && spot < 1e-12;
  o.detail = "1000 pairs K=3, max deviation " + fmt("%.1e", worst) + ", r(0.5,100) error " + fmt("%.1e", spot);
  return o;
}

// --- 6 and 10 ----------------------------------------------------------

struct SweepRun {
  std::string preset;
  std::string optimizer;
  History history;
  double val_acc = 0.0;
};

Dataset materialize(const DatasetIndex& index, const LoadOptions& load) {
  std::vector<Tensor> images;
  std::vector<int> labels;
  for (const auto& s : index.samples) {
    images.push_back(load_sample(s.path, load));
    labels.push_back(s.label);
  }
  return Dataset::from_tensors(index.classes, std::move(images), std::move(labels));
}

std::vector<SweepRun> run_sweep(const fs::path& out_dir, double& seconds) {
  const auto start = Clock::now();
  TempDir dir("acceptance_corpus");
  SynthOptions synth;
  synth.per_class = 200;
  synth.val_per_class = 60;
  synth.classes = 3;
  synth.resolution = 64;
  synth.seed = 42;
  synth_dataset(dir.path, synth);
  const LoadOptions load{1, 64, PreprocessMode::kRescale};
  const DatasetSplits splits = load_splits(dir.path, 0.0, 42);
  const Dataset train_set = materialize(splits.train, load);
  const Dataset val_set = materialize(splits.val, load);

  std::vector<SweepRun> runs;
  for (const auto& preset : preset_names()) {
    for (const char* opt : {"sgd", "rmsprop", "adam"}) {
      const auto run_start = Clock::now();
      TrainConfig cfg;
      cfg.epochs = 20;
      cfg.batch_size = 16;
      cfg.patience = 5;
      cfg.seed = 42;
      cfg.resolution = 64;
      cfg.optimizer = OptimizerConfig::defaults(parse_optimizer(opt));
      Network net = instantiate(builtin_preset(preset, 1, 64, 3), cfg.seed);
      net.set_class_names(train_set.classes());
      SweepRun run{preset, opt, train(net, train_set, val_set, cfg), 0.0};
      run.val_acc = evaluate(net, val_set).report.accuracy;
      std::printf("  %-15s %-8s val_acc %.4f  best epoch %2zu of %2zu  %.0f s\n", preset.c_str(), opt, run.val_acc,
                  run.history.best_epoch, run.history.epochs_run, seconds_since(run_start));
      std::fflush(stdout);
      if (!out_dir.empty()) write_history(run.history, out_dir / (preset + "_" + opt + ".csv"));
      runs.push_back(std::move(run));
    }
  }
  seconds = seconds_since(start);
  return runs;
}

Outcome end_to_end(const std::vector<SweepRun>& runs, double seconds) {
  std::size_t at90 = 0, at95 = 0;
  double lowest = 1.0;
  for (const auto& r : runs) {
    at90 += r.val_acc >= 0.90;
    at95 += r.val_acc >= 0.95;
    lowest = std::min(lowest, r.val_acc);
  }
  Outcome o;
  o.pass = runs.size() == 9 && at90 == 9 && at95 >= 7;
  o.detail = std::to_string(at90) + "/9 runs >= 90%, " + std::to_string(at95) + "/9 >= 95%, lowest " +
             fmt("%.4f", lowest) + ", " + fmt("%.0f s", seconds);
  return o;
}

Outcome curve_shape(const std::vector<SweepRun>& runs, const fs::path& out_dir) {
  std::vector<NamedHistory> named;
  for (const auto& r : runs) named.push_back({r.preset + "/" + r.optimizer, r.history});
  const std::string csv = report_to_csv(report_rows(named));
  if (!out_dir.empty()) std::ofstream(out_dir / "report.csv") << csv;
  const std::vector<ReportRow> rows = report_from_csv(csv);

  Outcome o;
  double lowest = 1.0;
  std::size_t rising = 0;
  for (const auto& r : runs) {
    const std::string name = r.preset + "/" + r.optimizer;
    std::vector<double> epochs, acc;
    for (const auto& row : rows) {
      if (row.run == name && row.split == "train" && row.metric == "acc") {
        epochs.push_back(static_cast<double>(row.epoch));
        acc.push_back(row.value);
      }
    }
    const double rho = spearman(epochs, acc);
    const bool up = acc.size() >= 2 && acc.back() > acc.front();
    rising += up;
    lowest = std::min(lowest, rho);
    if (!up || !(rho > 0.5)) {
      o.pass = false;
      o.detail += name + fmt(" rho %.3f", rho) + (up ? "" : " not rising") + "; ";
    }
  }
  o.pass = o.pass && runs.size() == 9;
  o.detail += std::to_string(rising) + "/9 final > first epoch, min Spearman " + fmt("%.3f", lowest);
  return o;
}

// --- 7 -----------------------------------------------------------------

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t b : bytes) h = (h ^ b) * 1099511628211ULL;
  return h;
}

Outcome early_stopping() {
  std::mt19937_64 rng(7);
  std::vector<Tensor> images;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 12; ++i) {
    images.push_back(preprocess(synth_image(i % 3, 16, rng, 10.0), PreprocessMode::kRescale));
    labels.push_back(static_cast<int>(i % 3));
  }
  const Dataset data = Dataset::from_tensors({"a", "b", "c"}, images, labels);
  Network net = instantiate(parse_model_spec("input 1 16\nconv 4 3 2 1 relu\nmaxpool 2 2\nglobalavgpool\nsoftmax 3\n"), 1);

  // Best at epoch 3; epoch 8 only ties it, which is not a new minimum.
  const std::vector<double> losses{1.0, 0.8, 0.6, 0.65, 0.7, 0.61, 0.9, 0.6, 0.5, 0.4, 0.3, 0.2};
  std::vector<std::uint64_t> hashes;
  TrainHooks hooks;
  hooks.val_loss_override = [&](std::size_t epoch, double) { return losses.at(epoch - 1); };
  hooks.on_epoch_end = [&](std::size_t, const Network& n, const EpochRecord&) {
    hashes.push_back(fnv1a(serialize_checkpoint(n)));
  };
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.batch_size = 4;
  cfg.patience = 5;
  cfg.resolution = 16;
  const History h = train(net, data, data, cfg, hooks);
  const std::uint64_t final_hash = fnv1a(serialize_checkpoint(net));
  Outcome o;
  o.pass = h.best_epoch == 3 && h.epochs_run == 8 && h.stopped_early && hashes.size() == 8 &&
           final_hash == hashes[2] && final_hash != hashes.back();
  char buf[160];
  std::snprintf(buf, sizeof buf, "best epoch %zu, stopped after %zu, restored hash %016llx %s epoch-%zu hash",
                h.best_epoch, h.epochs_run, static_cast<unsigned long long>(final_hash),
                hashes.size() > 2 && final_hash == hashes[2] ? "==" : "!=", std::size_t{3});
  o.detail = buf;
  return o;
}

// --- 8 -----------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism(const std::string& binary) {
  TempDir dir("acceptance_det");
  const std::string data = (dir.path / "data").string();
  auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };
  Outcome o;
  if (sh("'" + binary + "' synth --out '" + data + "' --per-class 20 --val-per-class 6 --resolution 32") != 0) {
    o.pass = false;
    o.detail = "synth failed";
    return o;
  }
  for (const char* tag : {"a", "b"}) {
    const std::string stem = (dir.path / tag).string();
    const int rc = sh("'" + binary + "' train --data '" + data +
                      "' --preset mini-inception --resolution 32 --epochs 3 --seed 42 --out-checkpoint '" + stem +
                      ".gkpt' --out-history '" + stem + ".csv'");
    if (rc != 0) {
      o.pass = false;
      o.detail = std::string("train run ") + tag + " failed";
      return o;
    }
  }
  const std::string ha = slurp(dir.path / "a.csv"), hb = slurp(dir.path / "b.csv");
  const std::string ca = slurp(dir.path / "a.gkpt"), cb = slurp(dir.path / "b.gkpt");
  o.pass = !ha.empty() && !ca.empty() && ha == hb && ca == cb;
  o.detail = "history " + std::to_string(ha.size()) + " bytes " + (ha == hb ? "identical" : "DIFFER") +
             ", checkpoint " + std::to_string(ca.size()) + " bytes " + (ca == cb ? "identical" : "DIFFER");
  return o;
}

// --- 9 -----------------------------------------------------------------

Outcome preprocessing_contract() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> px(0, 255);
  Tensor full({1, 16, 16});
  for (double& v : full.data()) v = px(rng);
  full[0] = 0;
  full[1] = 255;
  const Tensor r = preprocess(full, PreprocessMode::kRescale);
  const auto [lo, hi] = std::minmax_element(r.data().begin(), r.data().end());
  bool in_range = *lo == 0.0 && *hi == 1.0;

  double worst_mean = 0, worst_std = 0;
  for (int i = 0; i < 200; ++i) {
    Tensor img = i % 2 ? synth_image(static_cast<std::size_t>(i) % 3, 32, rng, 10.0) : Tensor({3, 9, 7});
    if (i % 2 == 0)
      for (double& v : img.data()) v = px(rng);
    const Tensor s = preprocess(img, PreprocessMode::kSamplewise);
    const double n = static_cast<double>(s.size());
    double mean = 0, var = 0;
    for (double v : s.data()) mean += v;
    mean /= n;
    for (double v : s.data()) var += (v - mean) * (v - mean);
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_std = std::max(worst_std, std::abs(std::sqrt(var / n) - 1.0));
    const Tensor rs = preprocess(img, PreprocessMode::kRescale);
    for (double v : rs.data()) in_range &= v >= 0.0 && v <= 1.0;
  }
  Outcome o;
  o.pass = in_range && worst_mean < 1e-9 && worst_std < 1e-9;
  o.detail = std::string("rescale ") + (in_range ? "in [0,1] with both extrema" : "OUT OF RANGE") +
             ", samplewise max |mean| " + fmt("%.1e", worst_mean) + ", max |std-1| " + fmt("%.1e", worst_std);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::vector<int> only;
  std::string cli_binary = GKNET_CLI_PATH;
  std::string out_dir;
  app.add_option("--only", only, "Run only these criteria (1-10)")->delimiter(',')->check(CLI::Range(1, 10));
  app.add_option("--cli", cli_binary, "gknet executable used by the determinism check")->capture_default_str();
  app.add_option("--out-dir", out_dir, "Keep the sweep histories and report CSV here");
  CLI11_PARSE(app, argc, argv);
  if (!out_dir.empty()) fs::create_directories(out_dir);

  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };

  std::vector<SweepRun> sweep;
  double sweep_seconds = 0.0;
  if (wanted(6) || wanted(10)) sweep = run_sweep(out_dir, sweep_seconds);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"convolution worked example", convolution_oracle},
      {"gradient soundness", gradient_suite},
      {"softmax and loss identities", softmax_identities},
      {"optimizer oracles", optimizer_oracles},
      {"metrics oracle", metrics_oracle},
      {"desk-scale end-to-end", [&] { return end_to_end(sweep, sweep_seconds); }},
      {"early stopping", early_stopping},
      {"CLI determinism", [&] { return cli_determinism(cli_binary); }},
      {"preprocessing contract", preprocessing_contract},
      {"accuracy curve shape", [&] { return curve_shape(sweep, out_dir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!wanted(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
