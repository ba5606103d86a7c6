#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ptych {

// `key = value` lines; `#` starts a comment; blank lines ignored. Keys are
// unique. Used for config files and manifests.
class KeyValue {
public:
    KeyValue() = default;

    static KeyValue parse(const std::string& text, const std::string& origin = "<text>");
    static KeyValue load(const std::filesystem::path& path);

    std::string serialize() const;

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, std::uint64_t value);
    void set(const std::string& key, int value) { set(key, static_cast<std::uint64_t>(value)); }
    void set(const std::string& key, unsigned value) { set(key, static_cast<std::uint64_t>(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

    std::optional<std::string> find(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
    std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> fallback) const;
    std::vector<std::uint64_t> get_u64s(const std::string& key, std::vector<std::uint64_t> fallback) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

    // Keys starting with `prefix.`, with the prefix stripped.
    KeyValue section(const std::string& prefix) const;
    // Overlays other's entries on top of this.
    void merge(const KeyValue& other);

    // Throws ConfigError naming any key not in `allowed`.
    void require_known(const std::vector<std::string>& allowed, const std::string& what) const;

private:
    std::map<std::string, std::string> entries_;
};

// Round-trip-exact formatting of a double.
std::string format_double(double v);

std::vector<std::string> split_list(const std::string& text);

} // namespace ptych
