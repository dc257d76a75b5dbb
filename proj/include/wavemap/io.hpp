#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace wavemap::io {

/// Shortest decimal form that parses back to the same double. Non-finite
/// values are written as nan, inf, -inf.
std::string format_double(double x);

/// Inverse of format_double; throws std::invalid_argument on malformed input.
double parse_double(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Writes atomically-ish: to <path>.tmp then renames over <path>.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace wavemap::io
