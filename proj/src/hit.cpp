#include "botracle/hit.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace botracle {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string to_string(PageType t) {
    switch (t) {
        case PageType::product: return "product";
        case PageType::category: return "category";
        case PageType::search: return "search";
        case PageType::cart: return "cart";
        case PageType::checkout: return "checkout";
        case PageType::content: return "content";
        case PageType::other: return "other";
    }
    return "other";
}

std::string to_string(JavaEnabled j) {
    switch (j) {
        case JavaEnabled::yes: return "Y";
        case JavaEnabled::no: return "N";
        case JavaEnabled::unknown: return "U";
    }
    return "U";
}

std::string to_string(Label l) {
    switch (l) {
        case Label::human: return "human";
        case Label::bot: return "bot";
        case Label::unknown: return "unknown";
    }
    return "unknown";
}

PageType page_type_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "product") return PageType::product;
    if (v == "category") return PageType::category;
    if (v == "search") return PageType::search;
    if (v == "cart") return PageType::cart;
    if (v == "checkout") return PageType::checkout;
    if (v == "content") return PageType::content;
    return PageType::other;
}

JavaEnabled java_enabled_from_string(const std::string& s) {
    if (s == "Y" || s == "y") return JavaEnabled::yes;
    if (s == "N" || s == "n") return JavaEnabled::no;
    return JavaEnabled::unknown;
}

Label label_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "human") return Label::human;
    if (v == "bot") return Label::bot;
    return Label::unknown;
}

const std::vector<std::string>& hit_field_names() {
    static const std::vector<std::string> names = {
        "timestamp",     "ip",           "account_id",        "user_agent",
        "browser_width", "browser_height", "java_enabled",    "pagename",
        "prev_pagename", "first_hit_pagename", "page_type",   "visit_num",
        "visit_page_num", "hourly_visitor", "last_purchase_num", "session_id",
        "label"};
    return names;
}

nlohmann::ordered_json hit_to_json(const HitRecord& hit) {
    nlohmann::ordered_json j;
    j["timestamp"] = hit.timestamp;
    j["ip"] = hit.ip;
    if (hit.account_id) j["account_id"] = *hit.account_id;
    j["user_agent"] = hit.user_agent;
    j["browser_width"] = hit.browser_width;
    j["browser_height"] = hit.browser_height;
    j["java_enabled"] = to_string(hit.java_enabled);
    j["pagename"] = hit.pagename;
    if (hit.prev_pagename) j["prev_pagename"] = *hit.prev_pagename;
    if (hit.first_hit_pagename) j["first_hit_pagename"] = *hit.first_hit_pagename;
    j["page_type"] = to_string(hit.page_type);
    j["visit_num"] = hit.visit_num;
    j["visit_page_num"] = hit.visit_page_num;
    j["hourly_visitor"] = hit.hourly_visitor;
    j["last_purchase_num"] = hit.last_purchase_num;
    if (hit.session_id) j["session_id"] = *hit.session_id;
    j["label"] = to_string(hit.label);
    return j;
}

namespace {

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) {
        std::string v = it->get<std::string>();
        if (v.empty()) return std::nullopt;
        return v;
    }
    return std::nullopt;
}

int int_or(const nlohmann::json& j, const char* key, int fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (it->is_number()) return it->get<int>();
    if (it->is_string()) {
        try {
            return std::stoi(it->get<std::string>());
        } catch (...) {
            return fallback;
        }
    }
    return fallback;
}

}  // namespace

HitRecord hit_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::runtime_error("hit record is not a JSON object");
    HitRecord h;

    auto ts = j.find("timestamp");
    if (ts == j.end() || !ts->is_number()) throw std::runtime_error("missing or non-numeric timestamp");
    h.timestamp = ts->get<std::int64_t>();
    if (h.timestamp <= 0) throw std::runtime_error("timestamp must be positive");

    auto page = j.find("pagename");
    if (page == j.end() || !page->is_string() || page->get<std::string>().empty())
        throw std::runtime_error("missing pagename");
    h.pagename = page->get<std::string>();

    h.ip = j.value("ip", std::string{});
    h.account_id = opt_string(j, "account_id");
    h.user_agent = j.value("user_agent", std::string{});
    h.browser_width = std::max(0, int_or(j, "browser_width", 0));
    h.browser_height = std::max(0, int_or(j, "browser_height", 0));
    h.java_enabled = java_enabled_from_string(j.value("java_enabled", std::string{"U"}));
    h.prev_pagename = opt_string(j, "prev_pagename");
    h.first_hit_pagename = opt_string(j, "first_hit_pagename");
    h.page_type = page_type_from_string(j.value("page_type", std::string{"other"}));
    h.visit_num = std::max(1, int_or(j, "visit_num", 1));
    h.visit_page_num = std::max(1, int_or(j, "visit_page_num", 1));
    if (j.contains("hourly_visitor")) {
        const auto& hv = j["hourly_visitor"];
        h.hourly_visitor = hv.is_boolean() ? hv.get<bool>()
                         : hv.is_number() ? hv.get<int>() != 0
                         : hv.is_string() && (hv.get<std::string>() == "true" || hv.get<std::string>() == "1");
    }
    h.last_purchase_num = std::max(0, int_or(j, "last_purchase_num", 0));
    h.session_id = opt_string(j, "session_id");
    h.label = label_from_string(j.value("label", std::string{"unknown"}));

    // First hit of a visit cannot have a referrer page.
    if (h.visit_page_num == 1) h.prev_pagename = std::nullopt;
    return h;
}

std::vector<std::string> hit_to_csv_row(const HitRecord& hit) {
    return {
        std::to_string(hit.timestamp),
        hit.ip,
        hit.account_id.value_or(""),
        hit.user_agent,
        std::to_string(hit.browser_width),
        std::to_string(hit.browser_height),
        to_string(hit.java_enabled),
        hit.pagename,
        hit.prev_pagename.value_or(""),
        hit.first_hit_pagename.value_or(""),
        to_string(hit.page_type),
        std::to_string(hit.visit_num),
        std::to_string(hit.visit_page_num),
        hit.hourly_visitor ? "true" : "false",
        std::to_string(hit.last_purchase_num),
        hit.session_id.value_or(""),
        to_string(hit.label),
    };
}

HitRecord hit_from_csv_row(const std::vector<std::string>& header,
                           const std::vector<std::string>& row) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < header.size() && i < row.size(); ++i) {
        const std::string& name = header[i];
        const std::string& value = row[i];
        if (value.empty()) continue;
        if (name == "timestamp" || name == "browser_width" || name == "browser_height" ||
            name == "visit_num" || name == "visit_page_num" || name == "last_purchase_num") {
            try {
                j[name] = std::stoll(value);
            } catch (...) {
                throw std::runtime_error("non-numeric value in column " + name);
            }
        } else if (name == "hourly_visitor") {
            j[name] = (value == "true" || value == "1" || value == "Y");
        } else {
            j[name] = value;
        }
    }
    return hit_from_json(j);
}

std::string ua_family(const std::string& user_agent) {
    static const std::array<const char*, 2> known = {"Mozilla/5.0", "Mozilla/4.0"};
    const std::string ua_lower = lower(user_agent);
    for (const char* fam : known) {
        const std::string f = lower(fam);
        if (ua_lower.rfind(f, 0) == 0) return fam;
    }
    std::size_t cut = user_agent.find_first_of("/ (");
    std::string fam = user_agent.substr(0, cut);
    return fam.empty() ? "unknown" : fam;
}

std::vector<double> Session::intervals() const {
    std::vector<double> gaps;
    if (hits.size() < 2) return gaps;
    gaps.reserve(hits.size() - 1);
    for (std::size_t i = 1; i < hits.size(); ++i)
        gaps.push_back(static_cast<double>(hits[i].timestamp - hits[i - 1].timestamp) / 1000.0);
    return gaps;
}

nlohmann::ordered_json session_to_json(const Session& s) {
    nlohmann::ordered_json j;
    j["session_id"] = s.session_id;
    nlohmann::ordered_json hits = nlohmann::ordered_json::array();
    for (const auto& h : s.hits) hits.push_back(hit_to_json(h));
    j["hits"] = std::move(hits);
    return j;
}

Session session_from_json(const nlohmann::json& j) {
    Session s;
    s.session_id = j.at("session_id").get<std::string>();
    for (const auto& hj : j.at("hits")) s.hits.push_back(hit_from_json(hj));
    return s;
}

}  // namespace botracle
