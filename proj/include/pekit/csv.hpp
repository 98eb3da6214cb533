#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "pekit/timeseries.hpp"

namespace pekit {

/// File-level failure (missing file, malformed content). Carries the path
/// and, for parse errors, the 1-based line number.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Reads a time series from CSV with header `k,z1,...,z<eta>` and one row
/// per sample. Parse failures report the offending line number.
TimeSeries read_timeseries_csv(const std::filesystem::path& path);

/// Writes the CSV counterpart of read_timeseries_csv. The write is atomic
/// (temp file + rename).
void write_timeseries_csv(const TimeSeries& z, const std::filesystem::path& path);

/// Atomically replaces `path` with `content`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace pekit
