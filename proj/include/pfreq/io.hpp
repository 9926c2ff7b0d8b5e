#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pfreq {

/// Shortest round-trip-safe text form (%.17g); NaN and infinities as nan/inf.
std::string format_double(double v);

/// Quotes a CSV field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);
void write_csv_row(std::ostream& os, const std::vector<double>& values);

/// Writes `path`.partial, flushes, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace pfreq
