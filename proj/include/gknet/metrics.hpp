#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gknet/tensor.hpp"

namespace gknet {

/// z multiplier of a two-sided 95% normal interval.
inline constexpr double kZ95 = 1.96;

/// K x K counts; rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes, std::vector<std::string> names = {});

  std::size_t classes() const { return classes_; }
  const std::vector<std::string>& names() const { return names_; }
  std::uint64_t count(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  void add(std::size_t truth, std::size_t predicted);

  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t c) const;
  std::uint64_t column_sum(std::size_t c) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::string> names_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t classes, std::vector<std::string> names = {});

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// One-vs-rest precision/recall/F1. A ratio with a zero denominator is 0,
/// and F1 is 0 when P + R = 0.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

/// trace / total; 0 for an empty matrix.
double accuracy(const ConfusionMatrix& cm);

/// Half-width r = z * sqrt(p (1 - p) / n). Throws for n <= 0.
double confidence_radius(double metric, std::int64_t n, double z = kZ95);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// [metric - r, metric + r] clamped to [0, 1]; degenerate at the metric when n = 0.
Interval confidence_interval(double metric, std::int64_t n, double z = kZ95);

struct ClassReport {
  std::string name;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  Interval precision_ci, recall_ci, f1_ci;
  std::uint64_t support = 0;
};

struct MetricsReport {
  std::vector<ClassReport> classes;
  double accuracy = 0.0;
  Interval accuracy_ci;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double z = kZ95;
  std::uint64_t total = 0;
};

/// Per-class intervals use the class support as N; accuracy uses the total.
MetricsReport make_report(const ConfusionMatrix& cm, double z = kZ95);

/// {classes:[{name,precision,recall,f1,ci:[lo,hi],support,...}], accuracy,
///  accuracy_ci:[lo,hi], macro_f1, z}. "ci" is the F1 interval.
nlohmann::json report_to_json(const MetricsReport& report);

/// Index of the largest entry of each row; ties go to the lowest index.
std::vector<int> argmax_rows(const Tensor& probabilities);

/// Fraction of rows whose true label is among the k highest scores.
double top_k_accuracy(const Tensor& probabilities, std::span<const int> labels, std::size_t k);

}  // namespace gknet
