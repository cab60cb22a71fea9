#pragma once

// CSV interchange for recordings.
//
//   time,<label1>,...,<labelN>
//   t0,v,...,v
//
// The time column must be strictly increasing and uniform; the sampling rate is
// 1 / median(delta). Values are written with 17 significant digits, so a write
// followed by a read reproduces every sample bit for bit.

#include "icanclean/recording.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace icanclean {

/// Maximum relative deviation of any time step from the median step.
inline constexpr double kTimeJitterTolerance = 1e-6;

Recording read_recording(const std::filesystem::path& path);
Recording parse_recording(std::istream& in, const std::string& source_name = "<stream>");

void write_recording(const Recording& rec, const std::filesystem::path& path);
void format_recording(const Recording& rec, std::ostream& out);

/// Writes to a sibling temporary file and renames it over path on success.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace icanclean
