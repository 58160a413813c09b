#include "stitch/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace stitch {

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

const std::vector<std::string> kHeadings = {
    "Method", "Mean Sutures to Failure", "Single-Suture Success Rate", "Three Throw Success Rate",
    "Full Wound Success Rate", "Mean Time per Suture (s)", "I", "E", "H", "T", "Mean Sutures to Intervention",
};

const std::vector<std::string> kCsvHeadings = {
    "method", "mean_sutures_to_failure", "single_suture_success_pct", "three_throw_success_pct",
    "full_wound_success_pct", "mean_time_per_suture_s", "errors_I", "errors_E", "errors_H", "errors_T",
    "mean_sutures_to_intervention",
};

std::vector<std::string> cells(const std::string& method, const MetricsReport& m, bool csv) {
  auto pct = [&](double f) { return csv ? fixed(100.0 * f, 1) : format_percent(f); };
  return {
      method,
      format_mean(m.mean_sutures_to_failure),
      pct(m.single_suture_success_rate),
      pct(m.three_throw_success_rate),
      pct(m.full_wound_success_rate),
      m.mean_time_per_suture ? format_seconds(*m.mean_time_per_suture) : (csv ? "" : "-"),
      std::to_string(m.errors(ErrorKind::I)),
      std::to_string(m.errors(ErrorKind::E)),
      std::to_string(m.errors(ErrorKind::H)),
      std::to_string(m.errors(ErrorKind::T)),
      m.mean_sutures_to_intervention ? format_mean(*m.mean_sutures_to_intervention) : (csv ? "" : "-"),
  };
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ReportFormat parse_report_format(const std::string& s) {
  if (s == "table") return ReportFormat::table;
  if (s == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown report format '" + s + "' (expected table or csv)");
}

std::string format_percent(double fraction) { return fixed(100.0 * fraction, 1) + "%"; }
std::string format_mean(double value) { return fixed(value, 2); }
std::string format_seconds(double value) { return fixed(value, 1); }

std::string report_render(const std::vector<std::pair<std::string, MetricsReport>>& rows, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    for (std::size_t c = 0; c < kCsvHeadings.size(); ++c) out << (c ? "," : "") << kCsvHeadings[c];
    out << '\n';
    for (const auto& [method, m] : rows) {
      const auto row = cells(method, m, true);
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(row[c]);
      out << '\n';
    }
    return out.str();
  }

  std::vector<std::vector<std::string>> table{kHeadings};
  for (const auto& [method, m] : rows) table.push_back(cells(method, m, false));
  std::vector<std::size_t> width(kHeadings.size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << " | ";
      const std::size_t pad = width[c] - row[c].size();
      if (c == 0) {
        out << row[c] << std::string(pad, ' ');
      } else {
        out << std::string(pad, ' ') << row[c];
      }
    }
    out << '\n';
  };
  line(table.front());
  for (std::size_t c = 0; c < width.size(); ++c) out << (c ? "-+-" : "") << std::string(width[c], '-');
  out << '\n';
  for (std::size_t r = 1; r < table.size(); ++r) line(table[r]);
  return out.str();
}

std::string report_render(const std::string& method, const MetricsReport& metrics, ReportFormat format) {
  return report_render(std::vector<std::pair<std::string, MetricsReport>>{{method, metrics}}, format);
}

std::string render_histogram_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::ostringstream out;
  out << "method,sutures,trials\n";
  for (const auto& [method, m] : rows) {
    for (std::size_t n = 0; n < m.histogram.size(); ++n) out << csv_escape(method) << ',' << n << ',' << m.histogram[n] << '\n';
  }
  return out.str();
}

}  // namespace stitch
