#include "gknet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "gknet/error.hpp"

namespace gknet {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::vector<ReportRow> report_rows(std::span<const NamedHistory> runs) {
  std::vector<ReportRow> rows;
  for (const auto& run : runs) {
    for (const auto& r : run.history.records) {
      const std::pair<const char*, double> train[] = {
          {"loss", r.train_loss}, {"acc", r.train_acc}, {"prec", r.train_prec}, {"rec", r.train_rec}};
      const std::pair<const char*, double> val[] = {
          {"loss", r.val_loss}, {"acc", r.val_acc}, {"prec", r.val_prec}, {"rec", r.val_rec}};
      for (const auto& [m, v] : train) rows.push_back({run.run, r.epoch, "train", m, v});
      for (const auto& [m, v] : val) rows.push_back({run.run, r.epoch, "val", m, v});
    }
  }
  return rows;
}

std::string report_to_csv(std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << kReportHeader << '\n';
  for (const auto& r : rows) {
    os << r.run << ',' << r.epoch << ',' << r.split << ',' << r.metric << ',' << fmt(r.value) << '\n';
  }
  return os.str();
}

std::vector<ReportRow> report_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<ReportRow> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kReportHeader) throw ConfigError("report: unexpected header");
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ConfigError("report line " + std::to_string(line_no) + ": expected 5 fields");
    try {
      rows.push_back({cells[0], std::stoul(cells[1]), cells[2], cells[3], std::stod(cells[4])});
    } catch (const std::logic_error&) {
      throw ConfigError("report line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

std::vector<SweepRow> sweep_rows(const std::string& model, const std::string& optimizer,
                                 const MetricsReport& report) {
  std::vector<SweepRow> rows;
  for (const auto& c : report.classes) {
    rows.push_back({model, optimizer, c.name, c.precision, c.recall, c.f1, c.f1_ci.lo, c.f1_ci.hi});
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << r.model << ',' << r.optimizer << ',' << r.class_name << ',' << fmt(r.precision) << ',' << fmt(r.recall)
       << ',' << fmt(r.f1) << ',' << fmt(r.ci_lo) << ',' << fmt(r.ci_hi) << '\n';
  }
  return os.str();
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace gknet
