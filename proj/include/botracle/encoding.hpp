#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "botracle/hit.hpp"

namespace botracle {

/// Numeric encoding of a hit for per-hit classification.
struct FeatureVector {
    std::vector<double> values;
    Label label = Label::unknown;
};

/// Fitted vocabularies and scaling bounds mapping hits onto fixed-width
/// vectors: min-max scaled numerics, a 0/1 flag, and one-hot categoricals
/// with an explicit Other bucket per block.
///
/// Identity fields (ip, account_id) are deliberately not encoded.
class FeatureEncoder {
public:
    struct NumericSpec {
        std::string name;
        double min = 0.0;
        double max = 0.0;
    };
    struct CategoricalSpec {
        std::string feature;                  // "java_enabled", "user_agent", "page_type"
        std::vector<std::string> vocabulary;  // frequency-descending, "Other" last
    };

    /// Builds vocabularies and bounds from a corpus. Categorical values seen
    /// with frequency strictly below rare_threshold fold into Other.
    static FeatureEncoder fit(const std::vector<HitRecord>& hits, double rare_threshold = 0.001);

    FeatureVector encode(const HitRecord& hit) const;

    std::size_t total_width() const { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<NumericSpec>& numeric_specs() const { return numerics_; }
    const std::vector<CategoricalSpec>& categorical_specs() const { return categoricals_; }
    double rare_threshold() const { return rare_threshold_; }

    nlohmann::ordered_json to_json() const;
    static FeatureEncoder from_json(const nlohmann::json& j);

private:
    void rebuild_feature_names();

    std::vector<NumericSpec> numerics_;
    std::vector<CategoricalSpec> categoricals_;
    std::vector<std::string> feature_names_;
    double rare_threshold_ = 0.001;
};

}  // namespace botracle
