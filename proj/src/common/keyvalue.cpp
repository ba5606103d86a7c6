#include "common/keyvalue.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ptych {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text)
{
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
    return v;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

KeyValue KeyValue::parse(const std::string& text, const std::string& origin)
{
    KeyValue kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (kv.contains(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.entries_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValue KeyValue::load(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path.string());
}

std::string KeyValue::serialize() const
{
    std::string out;
    for (const auto& [k, v] : entries_)
        out += k + " = " + v + "\n";
    return out;
}

void KeyValue::set(const std::string& key, const std::string& value) { entries_[key] = value; }
void KeyValue::set(const std::string& key, double value) { entries_[key] = format_double(value); }
void KeyValue::set(const std::string& key, std::uint64_t value) { entries_[key] = std::to_string(value); }

std::optional<std::string> KeyValue::find(const std::string& key) const
{
    if (auto it = entries_.find(key); it != entries_.end())
        return it->second;
    return std::nullopt;
}

std::string KeyValue::get_string(const std::string& key) const
{
    if (auto v = find(key))
        return *v;
    throw ConfigError("missing key '" + key + "'");
}

std::string KeyValue::get_string(const std::string& key, const std::string& fallback) const
{
    return find(key).value_or(fallback);
}

double KeyValue::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

double KeyValue::get_double(const std::string& key, double fallback) const
{
    auto v = find(key);
    return v ? parse_double(key, *v) : fallback;
}

std::uint64_t KeyValue::get_u64(const std::string& key) const { return parse_u64(key, get_string(key)); }

std::uint64_t KeyValue::get_u64(const std::string& key, std::uint64_t fallback) const
{
    auto v = find(key);
    return v ? parse_u64(key, *v) : fallback;
}

bool KeyValue::get_bool(const std::string& key, bool fallback) const
{
    auto v = find(key);
    if (!v)
        return fallback;
    if (*v == "true" || *v == "1" || *v == "on" || *v == "yes")
        return true;
    if (*v == "false" || *v == "0" || *v == "off" || *v == "no")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValue::get_doubles(const std::string& key, std::vector<double> fallback) const
{
    auto v = find(key);
    if (!v)
        return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*v))
        out.push_back(parse_double(key, item));
    return out;
}

std::vector<std::string> KeyValue::get_strings(const std::string& key,
                                               std::vector<std::string> fallback) const
{
    auto v = find(key);
    return v ? split_list(*v) : fallback;
}

std::vector<std::uint64_t> KeyValue::get_u64s(const std::string& key,
                                              std::vector<std::uint64_t> fallback) const
{
    auto v = find(key);
    if (!v)
        return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(*v))
        out.push_back(parse_u64(key, item));
    return out;
}

KeyValue KeyValue::section(const std::string& prefix) const
{
    KeyValue out;
    const std::string p = prefix + ".";
    for (const auto& [k, v] : entries_)
        if (k.rfind(p, 0) == 0)
            out.entries_[k.substr(p.size())] = v;
    return out;
}

void KeyValue::merge(const KeyValue& other)
{
    for (const auto& [k, v] : other.entries_)
        entries_[k] = v;
}

void KeyValue::require_known(const std::vector<std::string>& allowed, const std::string& what) const
{
    for (const auto& [k, v] : entries_)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError(what + ": unknown key '" + k + "'");
}

} // namespace ptych
