#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qdm::text {

/// Shortest decimal form that round-trips to the same double. "nan"/"inf"
/// for non-finite values.
std::string format_double(double value);

/// Strict parse of a full token; throws DomainError on trailing garbage.
double parse_double(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace qdm::text
