#include "icanclean/report.hpp"

#include <cstdio>
#include <sstream>

namespace icanclean {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += num(v(i));
  }
  return out;
}

std::string join_one_based(const std::vector<Eigen::Index>& idx) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(idx[i] + 1);
  }
  return out;
}

void put(std::ostringstream& os, const std::string& key, const std::string& value) {
  os << key << '=' << value << '\n';
}

}  // namespace

std::string format_clean_report(const CleanReport& report, const CleanRunInfo& info) {
  std::ostringstream os;
  os << "# icanclean clean report\n";
  put(os, "format_version", std::to_string(kReportFormatVersion));
  put(os, "mode", info.mode);
  put(os, "n_samples", std::to_string(info.n_samples));
  put(os, "n_data", std::to_string(info.n_data));
  put(os, "n_noise", std::to_string(info.n_noise));
  put(os, "thresh", num(info.config.thresh));
  put(os, "source", info.config.source == ComponentSource::DataVariates ? "u" : "v");
  put(os, "window_len", std::to_string(info.config.window_len));
  put(os, "window_hop", std::to_string(info.config.effective_hop()));
  put(os, "n_comp", std::to_string(report.n_comp));
  put(os, "correlations", join(report.correlations));
  put(os, "n_bad", std::to_string(report.bad_indices.size()));
  put(os, "bad_components", join_one_based(report.bad_indices));
  put(os, "variance_removed", join(report.variance_removed_per_channel));
  put(os, "windows_processed", std::to_string(report.windows_processed));
  put(os, "elapsed_seconds", num(info.elapsed_seconds));
  for (std::size_t k = 0; k < report.windows.size(); ++k) {
    const auto& w = report.windows[k];
    const std::string prefix = "window." + std::to_string(k + 1) + ".";
    put(os, prefix + "start", std::to_string(w.start));
    put(os, prefix + "length", std::to_string(w.length));
    put(os, prefix + "refit", w.refit ? "1" : "0");
    put(os, prefix + "n_comp", std::to_string(w.correlations.size()));
    put(os, prefix + "n_bad", std::to_string(w.bad_indices.size()));
    put(os, prefix + "bad_components", join_one_based(w.bad_indices));
  }
  return os.str();
}

std::string format_bench_report(const BenchReport& r) {
  std::ostringstream os;
  os << "# icanclean throughput report\n";
  put(os, "format_version", std::to_string(kReportFormatVersion));
  put(os, "n_samples", std::to_string(r.params.n_samples));
  put(os, "n_data", std::to_string(r.params.n_data));
  put(os, "n_noise", std::to_string(r.params.n_noise));
  put(os, "sampling_rate_hz", num(r.params.sampling_rate_hz));
  put(os, "repetitions", std::to_string(r.params.repetitions));
  put(os, "window_len", std::to_string(r.params.window_len));
  put(os, "window_hop", std::to_string(r.params.window_hop > 0 ? r.params.window_hop : r.params.window_len));
  put(os, "batch_seconds", num(r.batch_seconds));
  put(os, "batch_samples_per_second", num(r.batch_samples_per_second));
  put(os, "sliding_seconds", num(r.sliding_seconds));
  put(os, "sliding_windows", std::to_string(r.sliding_windows));
  put(os, "seconds_per_window", num(r.seconds_per_window));
  put(os, "sliding_samples_per_second", num(r.sliding_samples_per_second));
  put(os, "sliding_realtime_factor", num(r.sliding_realtime_factor));
  return os.str();
}

std::map<std::string, std::string> parse_report(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("report line " + std::to_string(line_no) + ": missing '='");
    auto key = line.substr(0, eq);
    if (!out.emplace(key, line.substr(eq + 1)).second) {
      throw ParseError("report line " + std::to_string(line_no) + ": repeated key '" + key + "'");
    }
  }
  return out;
}

}  // namespace icanclean
