#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace botracle {

enum class PageType { product, category, search, cart, checkout, content, other };
enum class JavaEnabled { yes, no, unknown };  // wire values Y / N / U
enum class Label { human, bot, unknown };

std::string to_string(PageType t);
std::string to_string(JavaEnabled j);
std::string to_string(Label l);

/// Unknown strings map to the catch-all member instead of failing.
PageType page_type_from_string(const std::string& s);
JavaEnabled java_enabled_from_string(const std::string& s);
Label label_from_string(const std::string& s);

/// One request against the web server; the atomic unit of the pipeline.
struct HitRecord {
    std::int64_t timestamp = 0;  // milliseconds UTC
    std::string ip;
    std::optional<std::string> account_id;
    std::string user_agent;
    int browser_width = 0;   // px, 0 = unknown
    int browser_height = 0;  // px, 0 = unknown
    JavaEnabled java_enabled = JavaEnabled::unknown;
    std::string pagename;
    std::optional<std::string> prev_pagename;
    std::optional<std::string> first_hit_pagename;
    PageType page_type = PageType::other;
    int visit_num = 1;
    int visit_page_num = 1;
    bool hourly_visitor = false;
    int last_purchase_num = 0;
    std::optional<std::string> session_id;
    Label label = Label::unknown;
};

/// Wire field names, in canonical order (JSONL keys and CSV header).
const std::vector<std::string>& hit_field_names();

nlohmann::ordered_json hit_to_json(const HitRecord& hit);

/// Throws std::runtime_error on records violating the hard invariants
/// (timestamp > 0, non-empty pagename). Missing optional fields default.
HitRecord hit_from_json(const nlohmann::json& j);

/// CSV row in hit_field_names() order; caller adds quoting.
std::vector<std::string> hit_to_csv_row(const HitRecord& hit);
HitRecord hit_from_csv_row(const std::vector<std::string>& header,
                           const std::vector<std::string>& row);

/// User-agent family: a known leading product token ("Mozilla/5.0",
/// "Mozilla/4.0") or the text before the first '/', ' ' or '('.
std::string ua_family(const std::string& user_agent);

/// Time-ordered hits of one client visit; the unit of graph analysis.
struct Session {
    std::string session_id;
    std::vector<HitRecord> hits;

    /// Inter-hit gaps in seconds, length hits.size() - 1.
    std::vector<double> intervals() const;
};

nlohmann::ordered_json session_to_json(const Session& s);
Session session_from_json(const nlohmann::json& j);

}  // namespace botracle
