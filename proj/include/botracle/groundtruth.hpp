#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "botracle/hit.hpp"

namespace botracle {

/// Parsed IPv4/IPv6 prefix for cloud-range membership tests.
struct Cidr {
    std::array<std::uint8_t, 16> bytes{};
    int prefix_len = 0;
    bool is_v6 = false;

    static Cidr parse(const std::string& text);  // throws std::invalid_argument
    bool contains(const std::string& ip) const;
};

/// Parses "a.b.c.d" or v6 text into address bytes; nullopt when invalid.
std::optional<std::pair<std::array<std::uint8_t, 16>, bool>> parse_ip(const std::string& ip);

struct LabelingConfig {
    std::set<std::string> internal_accounts;
    std::vector<Cidr> cloud_cidrs;
    std::vector<std::string> automation_ua_substrings;
    std::map<std::string, std::set<JavaEnabled>> ua_capability_table;
    int min_hits_for_interval_test = 5;
    double interval_cv_threshold = 0.05;
    int min_window_axis_px = 50;

    void validate() const;

    /// Matches the simulator's conventions (its cloud ranges, its internal
    /// account pool) plus the stock automation-agent substrings.
    static LabelingConfig defaults();
};

/// Hit counts around the assumption -> heuristic refinement step.
struct LabelReport {
    std::size_t bot_before = 0, human_before = 0, unknown_before = 0;
    std::size_t promoted = 0;   // unknown hits turned bot by heuristics
    std::size_t conflicts = 0;  // assumption-human hits a heuristic would flag
    std::size_t anomalies = 0;  // unparseable ips seen during assumption labeling

    std::size_t total() const { return bot_before + human_before + unknown_before; }
    std::size_t bot_after() const { return bot_before + promoted; }
    std::size_t human_after() const { return human_before; }
    std::size_t unknown_after() const { return unknown_before - promoted; }

    /// Share of assumption-humans the heuristics left alone.
    double recall_against_humans() const {
        return human_before == 0
                   ? 1.0
                   : 1.0 - static_cast<double>(conflicts) / static_cast<double>(human_before);
    }

    LabelReport& merge(const LabelReport& other);
};

enum class HeuristicResult { bot, pass };

/// §assumption rules: internal account => human, cloud ip => bot, else
/// unknown; human wins when both match. Unparseable ips stay unknown.
std::vector<HitRecord> label_by_assumptions(const std::vector<HitRecord>& hits,
                                            const LabelingConfig& cfg,
                                            std::size_t* anomalies = nullptr);

/// Automation-library agents and capability mismatches. Never says human.
HeuristicResult heuristic_forged_ua(const HitRecord& hit, const LabelingConfig& cfg);

/// Near-constant inter-hit timing on enough hits.
HeuristicResult heuristic_interval_similarity(const Session& session, const LabelingConfig& cfg);

/// A reported window axis too small to browse with.
HeuristicResult heuristic_window_size(const HitRecord& hit, const LabelingConfig& cfg);

/// True when any of the three heuristics flags the session.
bool heuristics_flag_session(const Session& session, const LabelingConfig& cfg);

/// Promotes unknown sessions flagged by heuristics to bot; assumption labels
/// are never overwritten. Conflicts on assumption-human sessions are counted
/// per hit but the label stays human.
std::pair<std::vector<Session>, LabelReport> apply_heuristics(const std::vector<Session>& sessions,
                                                              const LabelingConfig& cfg);

}  // namespace botracle
