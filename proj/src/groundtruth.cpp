#include "botracle/groundtruth.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "botracle/sim.hpp"

namespace botracle {

std::optional<std::pair<std::array<std::uint8_t, 16>, bool>> parse_ip(const std::string& ip) {
    std::array<std::uint8_t, 16> bytes{};
    in_addr v4{};
    if (inet_pton(AF_INET, ip.c_str(), &v4) == 1) {
        std::memcpy(bytes.data(), &v4, 4);
        return std::make_pair(bytes, false);
    }
    in6_addr v6{};
    if (inet_pton(AF_INET6, ip.c_str(), &v6) == 1) {
        std::memcpy(bytes.data(), &v6, 16);
        return std::make_pair(bytes, true);
    }
    return std::nullopt;
}

Cidr Cidr::parse(const std::string& text) {
    const std::size_t slash = text.find('/');
    if (slash == std::string::npos)
        throw std::invalid_argument("CIDR missing prefix length: " + text);
    const std::string addr = text.substr(0, slash);
    int len = 0;
    try {
        len = std::stoi(text.substr(slash + 1));
    } catch (...) {
        throw std::invalid_argument("bad CIDR prefix length: " + text);
    }
    auto parsed = parse_ip(addr);
    if (!parsed) throw std::invalid_argument("bad CIDR address: " + text);
    Cidr c;
    c.bytes = parsed->first;
    c.is_v6 = parsed->second;
    const int max_len = c.is_v6 ? 128 : 32;
    if (len < 0 || len > max_len)
        throw std::invalid_argument("CIDR prefix length out of range: " + text);
    c.prefix_len = len;
    return c;
}

bool Cidr::contains(const std::string& ip) const {
    auto parsed = parse_ip(ip);
    if (!parsed || parsed->second != is_v6) return false;
    const auto& addr = parsed->first;
    int bits = prefix_len;
    for (int i = 0; bits > 0; ++i, bits -= 8) {
        const std::uint8_t mask =
            bits >= 8 ? 0xff : static_cast<std::uint8_t>(0xff << (8 - bits));
        if ((addr[static_cast<std::size_t>(i)] & mask) !=
            (bytes[static_cast<std::size_t>(i)] & mask))
            return false;
    }
    return true;
}

void LabelingConfig::validate() const {
    if (min_hits_for_interval_test <= 0)
        throw std::invalid_argument("min_hits_for_interval_test must be > 0");
    if (interval_cv_threshold <= 0)
        throw std::invalid_argument("interval_cv_threshold must be > 0");
    if (min_window_axis_px <= 0)
        throw std::invalid_argument("min_window_axis_px must be > 0");
}

LabelingConfig LabelingConfig::defaults() {
    LabelingConfig cfg;
    for (const auto& id : simulated_internal_accounts()) cfg.internal_accounts.insert(id);
    for (const auto& c : simulated_cloud_cidrs()) cfg.cloud_cidrs.push_back(Cidr::parse(c));
    cfg.automation_ua_substrings = {"python-requests", "curl",      "wget",
                                    "scrapy",          "httpclient", "headless",
                                    "phantomjs",       "selenium"};
    // Legacy desktop agents shipped with Java applet support; a claim of that
    // identity without it is a forgery tell.
    cfg.ua_capability_table["Mozilla/4.0"] = {JavaEnabled::yes};
    cfg.ua_capability_table["Mozilla/5.0"] = {JavaEnabled::no, JavaEnabled::unknown};
    return cfg;
}

LabelReport& LabelReport::merge(const LabelReport& other) {
    bot_before += other.bot_before;
    human_before += other.human_before;
    unknown_before += other.unknown_before;
    promoted += other.promoted;
    conflicts += other.conflicts;
    anomalies += other.anomalies;
    return *this;
}

std::vector<HitRecord> label_by_assumptions(const std::vector<HitRecord>& hits,
                                            const LabelingConfig& cfg, std::size_t* anomalies) {
    cfg.validate();
    std::vector<HitRecord> out = hits;
    std::size_t bad_ips = 0;
    for (auto& hit : out) {
        if (hit.account_id && cfg.internal_accounts.count(*hit.account_id)) {
            hit.label = Label::human;
            continue;
        }
        if (!hit.ip.empty() && !parse_ip(hit.ip)) {
            ++bad_ips;
            hit.label = Label::unknown;
            continue;
        }
        bool cloud = false;
        for (const auto& cidr : cfg.cloud_cidrs) {
            if (cidr.contains(hit.ip)) {
                cloud = true;
                break;
            }
        }
        hit.label = cloud ? Label::bot : Label::unknown;
    }
    if (anomalies) *anomalies = bad_ips;
    return out;
}

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

HeuristicResult heuristic_forged_ua(const HitRecord& hit, const LabelingConfig& cfg) {
    const std::string ua = lower(hit.user_agent);
    for (const auto& needle : cfg.automation_ua_substrings) {
        if (!needle.empty() && ua.find(lower(needle)) != std::string::npos)
            return HeuristicResult::bot;
    }
    auto it = cfg.ua_capability_table.find(ua_family(hit.user_agent));
    if (it != cfg.ua_capability_table.end() && !it->second.count(hit.java_enabled))
        return HeuristicResult::bot;
    return HeuristicResult::pass;
}

HeuristicResult heuristic_interval_similarity(const Session& session, const LabelingConfig& cfg) {
    const auto gaps = session.intervals();
    if (static_cast<int>(gaps.size()) < cfg.min_hits_for_interval_test - 1)
        return HeuristicResult::pass;
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    if (mean <= 0.0) return HeuristicResult::pass;
    double var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var /= static_cast<double>(gaps.size());
    const double cv = std::sqrt(var) / mean;
    return cv < cfg.interval_cv_threshold ? HeuristicResult::bot : HeuristicResult::pass;
}

HeuristicResult heuristic_window_size(const HitRecord& hit, const LabelingConfig& cfg) {
    const int smaller = std::min(hit.browser_width, hit.browser_height);
    if (smaller > 0 && smaller < cfg.min_window_axis_px) return HeuristicResult::bot;
    return HeuristicResult::pass;
}

bool heuristics_flag_session(const Session& session, const LabelingConfig& cfg) {
    for (const auto& hit : session.hits) {
        if (heuristic_forged_ua(hit, cfg) == HeuristicResult::bot) return true;
        if (heuristic_window_size(hit, cfg) == HeuristicResult::bot) return true;
    }
    return heuristic_interval_similarity(session, cfg) == HeuristicResult::bot;
}

std::pair<std::vector<Session>, LabelReport> apply_heuristics(const std::vector<Session>& sessions,
                                                              const LabelingConfig& cfg) {
    cfg.validate();
    std::vector<Session> out = sessions;
    LabelReport report;
    for (auto& session : out) {
        Label label = session.hits.empty() ? Label::unknown : session.hits.front().label;
        switch (label) {
            case Label::bot: report.bot_before += session.hits.size(); break;
            case Label::human: report.human_before += session.hits.size(); break;
            case Label::unknown: report.unknown_before += session.hits.size(); break;
        }
        if (!heuristics_flag_session(session, cfg)) continue;
        if (label == Label::human) {
            report.conflicts += session.hits.size();  // recorded, never relabeled
        } else if (label == Label::unknown) {
            report.promoted += session.hits.size();
            for (auto& hit : session.hits) hit.label = Label::bot;
        }
    }
    return {std::move(out), report};
}

}  // namespace botracle
