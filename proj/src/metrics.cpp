#include "gknet/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gknet/error.hpp"

namespace gknet {

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::string> names)
    : classes_(classes), names_(std::move(names)), counts_(classes * classes, 0) {
  if (classes == 0) throw ConfigError("confusion matrix needs at least one class");
  if (names_.empty()) {
    for (std::size_t c = 0; c < classes; ++c) names_.push_back("class" + std::to_string(c));
  }
  if (names_.size() != classes) throw ConfigError("class name count does not match class count");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes_ || predicted >= classes_) throw ConfigError("label out of range");
  ++counts_[truth * classes_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < classes_; ++p) t += count(c, p);
  return t;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t c) const {
  std::uint64_t t = 0;
  for (std::size_t r = 0; r < classes_; ++r) t += count(r, c);
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t classes, std::vector<std::string> names) {
  if (truth.size() != predicted.size()) throw ShapeError("label lists differ in length");
  ConfusionMatrix cm(classes, std::move(names));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0) throw ConfigError("negative label");
    cm.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return cm;
}

namespace {
double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out(cm.classes());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const std::uint64_t tp = cm.count(c, c);
    ClassMetrics& m = out[c];
    m.precision = ratio(tp, cm.column_sum(c));
    m.recall = ratio(tp, cm.row_sum(c));
    const double denom = m.precision + m.recall;
    m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
  }
  return out;
}

double accuracy(const ConfusionMatrix& cm) {
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) trace += cm.count(c, c);
  return ratio(trace, cm.total());
}

double confidence_radius(double metric, std::int64_t n, double z) {
  if (n <= 0) throw ConfigError("confidence interval needs a positive sample count");
  if (!(z > 0.0)) throw ConfigError("confidence level multiplier must be positive");
  if (metric < 0.0 || metric > 1.0) throw ConfigError("metric must lie in [0,1]");
  return z * std::sqrt(metric * (1.0 - metric) / static_cast<double>(n));
}

Interval confidence_interval(double metric, std::int64_t n, double z) {
  if (n == 0) return {metric, metric};
  const double r = confidence_radius(metric, n, z);
  return {std::max(0.0, metric - r), std::min(1.0, metric + r)};
}

MetricsReport make_report(const ConfusionMatrix& cm, double z) {
  MetricsReport rep;
  rep.z = z;
  rep.total = cm.total();
  const auto metrics = per_class_metrics(cm);
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    ClassReport cr;
    cr.name = cm.names()[c];
    cr.precision = metrics[c].precision;
    cr.recall = metrics[c].recall;
    cr.f1 = metrics[c].f1;
    cr.support = cm.row_sum(c);
    const auto n = static_cast<std::int64_t>(cr.support);
    cr.precision_ci = confidence_interval(cr.precision, n, z);
    cr.recall_ci = confidence_interval(cr.recall, n, z);
    cr.f1_ci = confidence_interval(cr.f1, n, z);
    rep.macro_precision += cr.precision;
    rep.macro_recall += cr.recall;
    rep.macro_f1 += cr.f1;
    rep.classes.push_back(std::move(cr));
  }
  const auto k = static_cast<double>(cm.classes());
  rep.macro_precision /= k;
  rep.macro_recall /= k;
  rep.macro_f1 /= k;
  rep.accuracy = accuracy(cm);
  rep.accuracy_ci = confidence_interval(rep.accuracy, static_cast<std::int64_t>(rep.total), z);
  return rep;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  using nlohmann::json;
  json classes = json::array();
  for (const auto& c : report.classes) {
    classes.push_back({
        {"name", c.name},
        {"precision", c.precision},
        {"recall", c.recall},
        {"f1", c.f1},
        {"ci", {c.f1_ci.lo, c.f1_ci.hi}},
        {"precision_ci", {c.precision_ci.lo, c.precision_ci.hi}},
        {"recall_ci", {c.recall_ci.lo, c.recall_ci.hi}},
        {"support", c.support},
    });
  }
  return json{
      {"classes", classes},
      {"accuracy", report.accuracy},
      {"accuracy_ci", {report.accuracy_ci.lo, report.accuracy_ci.hi}},
      {"macro_precision", report.macro_precision},
      {"macro_recall", report.macro_recall},
      {"macro_f1", report.macro_f1},
      {"total", report.total},
      {"z", report.z},
  };
}

std::vector<int> argmax_rows(const Tensor& probabilities) {
  if (probabilities.rank() != 2) throw ShapeError("argmax_rows expects [B,K]");
  const std::size_t rows = probabilities.extent(0), k = probabilities.extent(1);
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (probabilities.at(r, c) > probabilities.at(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

double top_k_accuracy(const Tensor& probabilities, std::span<const int> labels, std::size_t k) {
  if (probabilities.rank() != 2 || probabilities.extent(0) != labels.size()) {
    throw ShapeError("top_k_accuracy: probabilities and labels disagree");
  }
  if (k == 0) throw ConfigError("top_k_accuracy: k must be positive");
  const std::size_t rows = probabilities.extent(0), classes = probabilities.extent(1);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double own = probabilities.at(r, static_cast<std::size_t>(labels[r]));
    // Rank = number of classes that beat the label (ties resolved toward lower ids).
    std::size_t ahead = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double v = probabilities.at(r, c);
      if (v > own || (v == own && c < static_cast<std::size_t>(labels[r]))) ++ahead;
    }
    if (ahead < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows);
}

}  // namespace gknet
