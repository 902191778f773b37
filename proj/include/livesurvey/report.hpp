#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "livesurvey/benchmark.hpp"
#include "livesurvey/metrics.hpp"

namespace livesurvey {

struct ReportHeader {
  MetricSettings settings;
  std::string embedding_model;  // empty when embedding metrics are absent
};

/// One line per scalar metric of the report: the value behind every cell of
/// the text summary.
struct SummaryRow {
  std::string method;
  std::string metric;
  std::string group;  // survey name, "macro" or "micro"
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> stddev;
};

/// Names of the per-step metrics that are aggregated, in report order.
const std::vector<std::string>& report_metrics();

std::vector<SummaryRow> summarize(const std::vector<StepEvaluation>& evals);

std::string header_lines(const ReportHeader& header);
std::string steps_csv(const ReportHeader& header, const std::vector<StepEvaluation>& evals);
std::string summary_csv(const ReportHeader& header, const std::vector<SummaryRow>& rows);
std::string summary_text(const ReportHeader& header, const std::vector<SummaryRow>& rows);

/// Writes steps.csv, summary.csv and summary.txt into `dir`.
void write_report(const std::filesystem::path& dir, const ReportHeader& header,
                  const std::vector<StepEvaluation>& evals);

}  // namespace livesurvey
