#include "vtseg/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace vtseg {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::map<std::string, std::string> parse_kv_text(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

std::map<std::string, std::string> read_kv_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_kv_text(ss.str());
}

namespace {

double to_double(const std::string& key, const std::string& value)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + value + "'");
    }
}

} // namespace

std::int64_t parse_int(const std::string& key, const std::string& value)
{
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size())
        throw ConfigError("key '" + key + "': cannot parse integer '" + value + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value)
{
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size())
        throw ConfigError("key '" + key + "': cannot parse unsigned integer '" + value + "'");
    return v;
}

double parse_double(const std::string& key, const std::string& value)
{
    return to_double(key, value);
}

Index3 parse_int3(const std::string& key, const std::string& value)
{
    const auto parts = split(value, ',');
    if (parts.size() == 1) {
        const int v = static_cast<int>(parse_int(key, trim(parts[0])));
        return Index3(v, v, v);
    }
    if (parts.size() != 3)
        throw ConfigError("key '" + key + "': expected one or three comma-separated integers");
    return Index3(static_cast<int>(parse_int(key, trim(parts[0]))),
                  static_cast<int>(parse_int(key, trim(parts[1]))),
                  static_cast<int>(parse_int(key, trim(parts[2]))));
}

Vec3 parse_double3(const std::string& key, const std::string& value)
{
    const auto parts = split(value, ',');
    if (parts.size() == 1) {
        const double v = to_double(key, trim(parts[0]));
        return Vec3(v, v, v);
    }
    if (parts.size() != 3)
        throw ConfigError("key '" + key + "': expected one or three comma-separated numbers");
    return Vec3(to_double(key, trim(parts[0])), to_double(key, trim(parts[1])),
                to_double(key, trim(parts[2])));
}

std::string format_int3(const Index3& v)
{
    std::ostringstream os;
    os << v.x() << ',' << v.y() << ',' << v.z();
    return os.str();
}

std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    std::string s = os.str();
    return s;
}

std::string format_double3(const Vec3& v)
{
    return format_double(v.x()) + "," + format_double(v.y()) + "," + format_double(v.z());
}

} // namespace vtseg
