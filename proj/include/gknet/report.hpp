#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gknet/metrics.hpp"
#include "gknet/trainer.hpp"

namespace gknet {

/// One row of the long-format plot data.
struct ReportRow {
  std::string run;
  std::size_t epoch = 0;
  std::string split;   // train | val
  std::string metric;  // loss | acc | prec | rec
  double value = 0.0;
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct NamedHistory {
  std::string run;
  History history;
};

inline constexpr char kReportHeader[] = "run,epoch,split,metric,value";

/// Eight rows per epoch (train/val x loss/acc/prec/rec), runs in input order.
std::vector<ReportRow> report_rows(std::span<const NamedHistory> runs);
std::string report_to_csv(std::span<const ReportRow> rows);
std::vector<ReportRow> report_from_csv(std::string_view text);

/// One row per class of one sweep run; ci_lo/ci_hi bound the F1 score.
struct SweepRow {
  std::string model;
  std::string optimizer;
  std::string class_name;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
};

inline constexpr char kSweepHeader[] = "model,optimizer,class,precision,recall,f1,ci_lo,ci_hi";

std::vector<SweepRow> sweep_rows(const std::string& model, const std::string& optimizer,
                                 const MetricsReport& report);
std::string sweep_to_csv(std::span<const SweepRow> rows);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace gknet
