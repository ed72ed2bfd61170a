#include "botracle/kvconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace botracle {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

}  // namespace

KvConfig KvConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

KvConfig KvConfig::parse_string(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = std::string::npos;
        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            if (line[i] == '#' && !in_quote) {
                hash = i;
                break;
            }
        }
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("bad section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("expected key = value at line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty())
            throw std::runtime_error("empty key at line " + std::to_string(lineno));
        if (!section.empty()) key = section + "." + key;
        cfg.values_[key] = value;
    }
    return cfg;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (...) {
        throw std::runtime_error("config key " + key + " is not an integer: " + it->second);
    }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (...) {
        throw std::runtime_error("config key " + key + " is not a number: " + it->second);
    }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key " + key + " is not a boolean: " + v);
}

std::vector<std::string> KvConfig::get_list(const std::string& key) const {
    auto it = values_.find(key);
    std::vector<std::string> out;
    if (it == values_.end()) return out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = unquote(trim(item));
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> KvConfig::section(const std::string& prefix) const {
    std::vector<std::pair<std::string, std::string>> out;
    const std::string p = prefix + ".";
    for (const auto& [k, v] : values_) {
        if (k.rfind(p, 0) == 0) out.emplace_back(k.substr(p.size()), v);
    }
    return out;
}

}  // namespace botracle
