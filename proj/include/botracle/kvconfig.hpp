#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace botracle {

/// Flat key = value config file, TOML-like:
///
///   # comment
///   seed = 7
///   [mix]
///   human = 0.5            # stored as "mix.human"
///   list = a, b, c
///
/// Section headers prefix keys with "section.". Values keep their raw text;
/// typed getters parse on demand.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig parse_file(const std::string& path);
    static KvConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    /// Keys under "prefix." with the prefix stripped, in sorted order.
    std::vector<std::pair<std::string, std::string>> section(const std::string& prefix) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace botracle
