#pragma once

// Structured key=value reports for cleaning and benchmark runs.
//
// One `key=value` pair per line; lines starting with '#' are comments. List
// values are comma separated. Component numbers in reports are one-based and
// refer to positions in the `correlations` list. Per-window entries use keys
// of the form `window.<k>.<field>` with k one-based.

#include "icanclean/cleaner.hpp"
#include "icanclean/synth_bench.hpp"

#include <map>
#include <string>

namespace icanclean {

inline constexpr int kReportFormatVersion = 1;

struct CleanRunInfo {
  std::string mode;  // "batch" or "sliding"
  Eigen::Index n_samples = 0;
  Eigen::Index n_data = 0;
  Eigen::Index n_noise = 0;
  CleanConfig config;
  double elapsed_seconds = 0.0;
};

std::string format_clean_report(const CleanReport& report, const CleanRunInfo& info);
std::string format_bench_report(const BenchReport& report);

/// Parses key=value text; throws ParseError on a line without '=' or a repeated key.
std::map<std::string, std::string> parse_report(const std::string& text);

}  // namespace icanclean
