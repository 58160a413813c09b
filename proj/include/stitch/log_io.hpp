#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stitch/harness.hpp"
#include "stitch/parse_error.hpp"

namespace stitch {

/// Line-delimited JSON: a header record with trial and event counts, then
/// each trial record followed by its events, one record per line.
void write_logs(std::ostream& out, std::span<const TrialLog> logs);
void write_logs_file(const std::string& path, std::span<const TrialLog> logs);

/// Inverse of write_logs. Malformed or truncated input throws ParseError with the line number.
std::vector<TrialLog> read_logs(std::istream& in, const std::string& source = "<logs>");
std::vector<TrialLog> read_logs_file(const std::string& path);

}  // namespace stitch
