#pragma once

// File formats: matrix CSV, moment-series CSV and metadata headers.

#include <cstdint>
#include <string>

#include "mlyap/core.hpp"
#include "mlyap/dynamics.hpp"

namespace mlyap {

inline constexpr const char* kToolName = "mlyap";
#ifdef MLYAP_VERSION
inline constexpr const char* kToolVersion = MLYAP_VERSION;
#else
inline constexpr const char* kToolVersion = "0.0.0";
#endif

/// Matrix from CSV: one row per line, comma separated, no header. Lines
/// starting with '#' and blank lines are skipped.
MatrixXd read_matrix_csv(const std::string& path);
MatrixXd parse_matrix_csv(const std::string& text);
std::string matrix_csv(const MatrixXd& A);

/// 16-digit hex of the FNV-1a hash of `text`.
std::string hash_hex(const std::string& text);

/// "# key=value" metadata lines for CSV outputs.
std::string csv_metadata(const std::string& config_hash, std::uint64_t seed);

/// Columns t, p, estimate, stderr, flagged_runs.
std::string series_csv(const MomentSeries& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mlyap
