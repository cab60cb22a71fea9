#include "icanclean/recording_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unistd.h>
#include <vector>

namespace icanclean {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(const std::string& source, std::size_t line_no, const std::string& msg) {
  throw ParseError(source + ":" + std::to_string(line_no) + ": " + msg);
}

double parse_number(std::string_view cell, const std::string& source, std::size_t line_no,
                    std::size_t column) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    fail(source, line_no, "column " + std::to_string(column + 1) + ": not a number: '" +
                              std::string(cell) + "'");
  }
  if (!std::isfinite(value)) {
    fail(source, line_no, "column " + std::to_string(column + 1) + ": non-finite value");
  }
  return value;
}

void append_number(std::string& out, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

Recording parse_recording(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(source_name, 1, "empty file, expected header");
  ++line_no;

  const auto header = split_commas(trim(line));
  if (header.size() < 2 || trim(header[0]) != "time") {
    fail(source_name, line_no, "header must be 'time,<label1>,...,<labelN>'");
  }
  Recording rec;
  for (std::size_t i = 1; i < header.size(); ++i) {
    auto label = trim(header[i]);
    if (label.empty()) fail(source_name, line_no, "empty channel label in column " + std::to_string(i + 1));
    if (std::find(rec.channel_labels.begin(), rec.channel_labels.end(), label) != rec.channel_labels.end()) {
      fail(source_name, line_no, "duplicate channel label '" + std::string(label) + "'");
    }
    rec.channel_labels.emplace_back(label);
  }
  const std::size_t n_ch = rec.channel_labels.size();

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split_commas(body);
    if (cells.size() != n_ch + 1) {
      fail(source_name, line_no, "expected " + std::to_string(n_ch + 1) + " fields, got " +
                                     std::to_string(cells.size()));
    }
    const double t = parse_number(cells[0], source_name, line_no, 0);
    if (!times.empty() && !(t > times.back())) fail(source_name, line_no, "time is not strictly increasing");
    times.push_back(t);
    for (std::size_t c = 0; c < n_ch; ++c) values.push_back(parse_number(cells[c + 1], source_name, line_no, c + 1));
  }

  if (times.size() < 2) fail(source_name, line_no, "need at least two samples to infer the sampling rate");

  std::vector<double> deltas(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) deltas[i] = times[i + 1] - times[i];
  std::vector<double> sorted = deltas;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  double median = *mid;
  if (sorted.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(sorted.begin(), mid));
  }
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (std::abs(deltas[i] - median) > kTimeJitterTolerance * median) {
      // data rows start on line 2
      fail(source_name, i + 3, "non-uniform time step");
    }
  }
  rec.sampling_rate_hz = 1.0 / median;

  const auto n_rows = static_cast<Eigen::Index>(times.size());
  rec.samples = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n_rows, static_cast<Eigen::Index>(n_ch));
  return rec;
}

Recording read_recording(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return parse_recording(in, path.string());
}

void format_recording(const Recording& rec, std::ostream& out) {
  rec.validate();
  std::string buf = "time";
  for (const auto& label : rec.channel_labels) {
    buf += ',';
    buf += label;
  }
  buf += '\n';
  out << buf;
  for (Eigen::Index i = 0; i < rec.n_samples(); ++i) {
    buf.clear();
    append_number(buf, static_cast<double>(i) / rec.sampling_rate_hz);
    for (Eigen::Index j = 0; j < rec.n_channels(); ++j) {
      buf += ',';
      append_number(buf, rec.samples(i, j));
    }
    buf += '\n';
    out << buf;
  }
}

void write_recording(const Recording& rec, const std::filesystem::path& path) {
  std::ostringstream os;
  format_recording(rec, os);
  write_file_atomic(path, os.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

}  // namespace icanclean
