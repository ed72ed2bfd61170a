#include "botracle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "botracle/rng.hpp"

namespace botracle {

nlohmann::ordered_json MetricReport::to_json() const {
    nlohmann::ordered_json j;
    j["tp"] = tp;
    j["fp"] = fp;
    j["tn"] = tn;
    j["fn"] = fn;
    auto put = [&](const char* name, const std::optional<double>& v) {
        if (v) j[name] = *v;
        else j[name] = nullptr;
    };
    put("accuracy", accuracy);
    put("recall", recall);
    put("precision", precision);
    put("f1", f1);
    put("auroc", auroc);
    return j;
}

std::optional<double> auroc(const std::vector<double>& scores,
                            const std::vector<bool>& is_positive) {
    if (scores.size() != is_positive.size())
        throw std::invalid_argument("auroc: size mismatch");
    std::size_t n_pos = 0;
    for (bool b : is_positive) n_pos += b ? 1 : 0;
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    // Mann-Whitney: mean rank of positives, ties averaged.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (is_positive[order[t]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricReport score(const std::vector<Prediction>& predictions, double threshold) {
    if (predictions.empty()) throw std::invalid_argument("score: empty prediction set");
    MetricReport r;
    std::vector<double> scores;
    std::vector<bool> positives;
    scores.reserve(predictions.size());
    positives.reserve(predictions.size());
    for (const auto& p : predictions) {
        const bool predicted_bot = p.p_bot >= threshold;
        if (p.truth_bot && predicted_bot) ++r.tp;
        else if (p.truth_bot) ++r.fn;
        else if (predicted_bot) ++r.fp;
        else ++r.tn;
        scores.push_back(p.p_bot);
        positives.push_back(p.truth_bot);
    }
    const double total = static_cast<double>(r.total());
    r.accuracy = static_cast<double>(r.tp + r.tn) / total;
    if (r.tp + r.fn > 0) r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    if (r.tp + r.fp > 0) r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    if (r.precision && r.recall && (*r.precision + *r.recall) > 0)
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    r.auroc = auroc(scores, positives);
    return r;
}

std::string to_string(Scoring s) {
    switch (s) {
        case Scoring::r2: return "r2";
        case Scoring::negative_mse: return "negative_mse";
        case Scoring::accuracy: return "accuracy";
    }
    return "r2";
}

double scoring_value(Scoring scoring, const std::vector<double>& y_true,
                     const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw std::invalid_argument("scoring: size mismatch or empty input");
    const double n = static_cast<double>(y_true.size());
    switch (scoring) {
        case Scoring::negative_mse: {
            double sse = 0.0;
            for (std::size_t i = 0; i < y_true.size(); ++i) {
                const double d = y_true[i] - y_pred[i];
                sse += d * d;
            }
            return -sse / n;
        }
        case Scoring::r2: {
            double mean = 0.0;
            for (double y : y_true) mean += y;
            mean /= n;
            double ss_res = 0.0, ss_tot = 0.0;
            for (std::size_t i = 0; i < y_true.size(); ++i) {
                ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
                ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
            }
            if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
            return 1.0 - ss_res / ss_tot;
        }
        case Scoring::accuracy: {
            double correct = 0.0;
            for (std::size_t i = 0; i < y_true.size(); ++i)
                correct += ((y_pred[i] >= 0.5) == (y_true[i] >= 0.5)) ? 1.0 : 0.0;
            return correct / n;
        }
    }
    return 0.0;
}

std::vector<ImportanceRow> permutation_importance(
    const std::function<std::vector<double>(const nn::Matrix&)>& predict, const nn::Matrix& x,
    const std::vector<double>& y_true, const std::vector<std::string>& feature_names, int k,
    Scoring scoring, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("permutation importance needs K >= 1");
    if (x.rows() < 2) throw std::invalid_argument("permutation importance needs >= 2 rows");
    if (static_cast<Eigen::Index>(y_true.size()) != x.rows())
        throw std::invalid_argument("label count does not match rows");
    if (static_cast<Eigen::Index>(feature_names.size()) != x.cols())
        throw std::invalid_argument("feature name count does not match columns");

    const double baseline = scoring_value(scoring, y_true, predict(x));

    std::vector<ImportanceRow> rows;
    rows.reserve(feature_names.size());
    const auto n = x.rows();
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
        const bool constant = (x.col(d).array() == x(0, d)).all();
        double sum = 0.0, sum_sq = 0.0;
        nn::Matrix shuffled = x;
        for (int rep = 0; rep < k; ++rep) {
            // Independent seeded draw per (feature, repeat) pair.
            Rng rng = Rng(seed).split(0x10000ULL * static_cast<std::uint64_t>(d) +
                                      static_cast<std::uint64_t>(rep) + 1);
            shuffled.col(d) = x.col(d);
            for (Eigen::Index i = n; i > 1; --i) {
                const auto j = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(i)));
                std::swap(shuffled(i - 1, d), shuffled(j, d));
            }
            const double s = scoring_value(scoring, y_true, predict(shuffled));
            sum += s;
            sum_sq += s * s;
        }
        const double mean_shuffled = sum / k;
        const double var = std::max(0.0, sum_sq / k - mean_shuffled * mean_shuffled);
        ImportanceRow row;
        row.feature = feature_names[static_cast<std::size_t>(d)];
        row.mean_importance = baseline - mean_shuffled;
        row.stddev = std::sqrt(var);
        row.scoring = scoring;
        row.constant_column = constant;
        if (constant) {
            row.mean_importance = 0.0;
            row.stddev = 0.0;
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ImportanceRow& a, const ImportanceRow& b) {
        return a.mean_importance > b.mean_importance;
    });
    return rows;
}

std::vector<SizeBucket> graph_size_study(
    const std::vector<std::tuple<int, double, bool>>& node_count_pbot_truth, int max_nodes) {
    std::vector<SizeBucket> buckets;
    for (int size = 1; size <= max_nodes; ++size) {
        SizeBucket bucket;
        bucket.nodes = size;
        std::vector<Prediction> preds;
        for (const auto& [n, p_bot, truth_bot] : node_count_pbot_truth) {
            if (n != size) continue;
            preds.push_back({"", p_bot, truth_bot});
        }
        bucket.count = preds.size();
        if (!preds.empty()) bucket.metrics = score(preds);
        buckets.push_back(std::move(bucket));
    }
    return buckets;
}

}  // namespace botracle
