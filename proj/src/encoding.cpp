#include "botracle/encoding.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace botracle {

namespace {

constexpr const char* kOther = "Other";

double numeric_field(const HitRecord& h, const std::string& name) {
    if (name == "browser_width") return h.browser_width;
    if (name == "browser_height") return h.browser_height;
    if (name == "visit_num") return h.visit_num;
    if (name == "visit_page_num") return h.visit_page_num;
    if (name == "last_purchase_num") return h.last_purchase_num;
    throw std::logic_error("unknown numeric feature: " + name);
}

std::string categorical_field(const HitRecord& h, const std::string& feature) {
    if (feature == "java_enabled") return to_string(h.java_enabled);
    if (feature == "user_agent") return ua_family(h.user_agent);
    if (feature == "page_type") return to_string(h.page_type);
    throw std::logic_error("unknown categorical feature: " + feature);
}

std::vector<std::string> fit_vocabulary(const std::vector<HitRecord>& hits,
                                        const std::string& feature, double rare_threshold) {
    std::map<std::string, std::size_t> counts;
    for (const auto& h : hits) ++counts[categorical_field(h, feature)];

    const double n = static_cast<double>(hits.size());
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [value, count] : counts) {
        // Strict "<": values exactly at the threshold stay in the vocabulary.
        if (static_cast<double>(count) / n < rare_threshold) continue;
        if (value == kOther) continue;  // reserved bucket name
        kept.emplace_back(value, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> vocab;
    vocab.reserve(kept.size() + 1);
    for (const auto& [value, count] : kept) {
        (void)count;
        vocab.push_back(value);
    }
    vocab.emplace_back(kOther);
    return vocab;
}

}  // namespace

FeatureEncoder FeatureEncoder::fit(const std::vector<HitRecord>& hits, double rare_threshold) {
    if (hits.empty()) throw std::invalid_argument("cannot fit encoder on empty input");
    FeatureEncoder enc;
    enc.rare_threshold_ = rare_threshold;

    for (const char* name : {"browser_width", "browser_height", "visit_num", "visit_page_num",
                             "last_purchase_num"}) {
        NumericSpec spec;
        spec.name = name;
        spec.min = numeric_field(hits.front(), name);
        spec.max = spec.min;
        for (const auto& h : hits) {
            const double v = numeric_field(h, name);
            spec.min = std::min(spec.min, v);
            spec.max = std::max(spec.max, v);
        }
        enc.numerics_.push_back(std::move(spec));
    }

    for (const char* feature : {"java_enabled", "user_agent", "page_type"})
        enc.categoricals_.push_back({feature, fit_vocabulary(hits, feature, rare_threshold)});

    enc.rebuild_feature_names();
    return enc;
}

void FeatureEncoder::rebuild_feature_names() {
    feature_names_.clear();
    for (const auto& n : numerics_) feature_names_.push_back(n.name);
    feature_names_.push_back("hourly_visitor");
    for (const auto& c : categoricals_)
        for (const auto& v : c.vocabulary) feature_names_.push_back(c.feature + "_" + v);
}

FeatureVector FeatureEncoder::encode(const HitRecord& hit) const {
    FeatureVector out;
    out.values.reserve(total_width());
    for (const auto& spec : numerics_) {
        const double v = numeric_field(hit, spec.name);
        double scaled = spec.max > spec.min ? (v - spec.min) / (spec.max - spec.min) : 0.0;
        out.values.push_back(std::clamp(scaled, 0.0, 1.0));
    }
    out.values.push_back(hit.hourly_visitor ? 1.0 : 0.0);
    for (const auto& spec : categoricals_) {
        const std::string value = categorical_field(hit, spec.feature);
        std::size_t slot = spec.vocabulary.size() - 1;  // Other
        for (std::size_t i = 0; i + 1 < spec.vocabulary.size(); ++i) {
            if (spec.vocabulary[i] == value) {
                slot = i;
                break;
            }
        }
        for (std::size_t i = 0; i < spec.vocabulary.size(); ++i)
            out.values.push_back(i == slot ? 1.0 : 0.0);
    }
    out.label = hit.label;
    return out;
}

nlohmann::ordered_json FeatureEncoder::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "botracle-encoder";
    j["version"] = 1;
    j["rare_threshold"] = rare_threshold_;
    auto nums = nlohmann::ordered_json::array();
    for (const auto& n : numerics_) nums.push_back({{"name", n.name}, {"min", n.min}, {"max", n.max}});
    j["numerics"] = std::move(nums);
    auto cats = nlohmann::ordered_json::array();
    for (const auto& c : categoricals_)
        cats.push_back({{"feature", c.feature}, {"vocabulary", c.vocabulary}});
    j["categoricals"] = std::move(cats);
    return j;
}

FeatureEncoder FeatureEncoder::from_json(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != "botracle-encoder")
        throw std::runtime_error("not an encoder document");
    FeatureEncoder enc;
    enc.rare_threshold_ = j.value("rare_threshold", 0.001);
    for (const auto& n : j.at("numerics"))
        enc.numerics_.push_back({n.at("name").get<std::string>(), n.at("min").get<double>(),
                                 n.at("max").get<double>()});
    for (const auto& c : j.at("categoricals")) {
        CategoricalSpec spec;
        spec.feature = c.at("feature").get<std::string>();
        for (const auto& v : c.at("vocabulary")) spec.vocabulary.push_back(v.get<std::string>());
        if (spec.vocabulary.empty() || spec.vocabulary.back() != kOther)
            throw std::runtime_error("vocabulary missing Other bucket: " + spec.feature);
        enc.categoricals_.push_back(std::move(spec));
    }
    enc.rebuild_feature_names();
    return enc;
}

}  // namespace botracle
