#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file readers and writers.
namespace binderlsc::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);

// Locale-independent number parsing of the whole field; nullopt on junk.
std::optional<double> parse_double(std::string_view s);
std::optional<float> parse_float(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest decimal that round-trips to the same value.
std::string format_double(double v);
std::string format_float(float v);
// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Splits text into lines, dropping a trailing '\r' on each.
std::vector<std::string_view> lines(std::string_view text);

}  // namespace binderlsc::text
