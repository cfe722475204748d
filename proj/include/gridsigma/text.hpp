#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridsigma::text {

/// Fixed-point rendering rounded half-away-from-zero by printf, with "-0.000"
/// normalized to "0.000".
std::string fixed(double value, int decimals);

/// Fixed-point rendering truncated toward zero. For any threshold t that is
/// exactly representable with `decimals` digits, parse(truncated(v)) >= t iff
/// v >= t (for v >= 0).
std::string truncated(double value, int decimals);

/// Shortest-round-trip style "%.17g" rendering.
std::string exact(double value);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::string lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Strict full-string decimal parse; returns false on any trailing garbage.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace gridsigma::text
