#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stitch/harness.hpp"

namespace stitch {

enum class ReportFormat { table, csv };

ReportFormat parse_report_format(const std::string& s);

/// One row per method. Columns:
/// mean sutures to failure, single-suture, three-throw and full-wound success
/// rates, mean time per suture, I/E/H/T error counts, mean sutures to intervention.
std::string report_render(const std::vector<std::pair<std::string, MetricsReport>>& rows, ReportFormat format);
std::string report_render(const std::string& method, const MetricsReport& metrics, ReportFormat format);

/// Histogram of sutures to failure as CSV: method,sutures,trials.
std::string render_histogram_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows);

std::string format_percent(double fraction);  // 0.6939 -> "69.4%"
std::string format_mean(double value);        // 2.9333 -> "2.93"
std::string format_seconds(double value);     // 159.27 -> "159.3"

}  // namespace stitch
