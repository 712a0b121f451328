#pragma once

#include "vtseg/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vtseg {

// Flat "key = value" text: one pair per line, '#' comments, blank lines
// ignored. Later keys override earlier ones.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> read_kv_file(const std::string& path);

// Value parsers. A triple is either "a,b,c" or a single scalar applied to
// all three axes.
Index3 parse_int3(const std::string& key, const std::string& value);
Vec3 parse_double3(const std::string& key, const std::string& value);
std::int64_t parse_int(const std::string& key, const std::string& value);
std::uint64_t parse_uint(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);

std::string format_int3(const Index3& v);
std::string format_double3(const Vec3& v);
std::string format_double(double v); // round-trip precision

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

} // namespace vtseg
