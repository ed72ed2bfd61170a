#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "botracle/nn.hpp"

namespace botracle {

/// Corpus-level classification scores; fields are empty when undefined
/// (e.g. AUROC with a single class present, precision with no positives).
struct MetricReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> accuracy;
    std::optional<double> recall;
    std::optional<double> precision;
    std::optional<double> f1;
    std::optional<double> auroc;

    std::size_t total() const { return tp + fp + tn + fn; }
    nlohmann::ordered_json to_json() const;
};

struct Prediction {
    std::string subject;
    double p_bot = 0.0;
    bool truth_bot = false;
};

/// Threshold binarizes p_bot for the confusion counts; AUROC comes from the
/// rank statistic (ties contribute one half), no threshold involved.
MetricReport score(const std::vector<Prediction>& predictions, double threshold = 0.5);

/// Rank-statistic AUROC; nullopt when only one class is present.
std::optional<double> auroc(const std::vector<double>& scores, const std::vector<bool>& is_positive);

enum class Scoring { r2, negative_mse, accuracy };

std::string to_string(Scoring s);

/// s(y, y_hat) under the chosen scoring function.
double scoring_value(Scoring scoring, const std::vector<double>& y_true,
                     const std::vector<double>& y_pred);

struct ImportanceRow {
    std::string feature;
    double mean_importance = 0.0;  // s - mean_k s_{k,d}
    double stddev = 0.0;           // over the K shuffled re-scores
    Scoring scoring = Scoring::r2;
    bool constant_column = false;
};

/// Permutation importance: per feature column, K independent seeded shuffles,
/// re-scored through `predict`; rows sorted by importance descending.
/// The baseline score is computed once, before any shuffling.
std::vector<ImportanceRow> permutation_importance(
    const std::function<std::vector<double>(const nn::Matrix&)>& predict, const nn::Matrix& x,
    const std::vector<double>& y_true, const std::vector<std::string>& feature_names, int k,
    Scoring scoring, std::uint64_t seed);

struct SizeBucket {
    int nodes = 0;
    std::size_t count = 0;
    MetricReport metrics;
};

/// Buckets graph predictions by node count 1..max_nodes; single-class
/// buckets leave AUROC undefined. Empty buckets report count 0.
std::vector<SizeBucket> graph_size_study(
    const std::vector<std::tuple<int, double, bool>>& node_count_pbot_truth, int max_nodes = 10);

}  // namespace botracle
