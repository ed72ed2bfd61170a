#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "botracle/analysis.hpp"
#include "botracle/rng.hpp"

using namespace botracle;
using nn::Matrix;

namespace {

std::vector<Prediction> preds(const std::vector<double>& scores, const std::vector<bool>& truth) {
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < scores.size(); ++i)
        out.push_back({"s" + std::to_string(i), scores[i], truth[i]});
    return out;
}

// Trapezoidal ROC integration oracle, sweeping thresholds over tied groups.
double trapezoid_auroc(const std::vector<double>& scores, const std::vector<bool>& truth) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double pos = 0, neg = 0;
    for (bool t : truth) (t ? pos : neg) += 1;
    double area = 0.0, tpr = 0.0, fpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double dp = 0, dn = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (truth[order[j]] ? dp : dn) += 1;
            ++j;
        }
        const double next_tpr = tpr + dp / pos;
        const double next_fpr = fpr + dn / neg;
        area += (next_fpr - fpr) * (tpr + next_tpr) / 2.0;
        tpr = next_tpr;
        fpr = next_fpr;
        i = j;
    }
    return area;
}

}  // namespace

TEST_CASE("score on hand-checked sets") {
    // perfect separation
    MetricReport perfect = score(preds({0.9, 0.8, 0.4, 0.3}, {true, true, false, false}));
    CHECK(perfect.auroc.value() == doctest::Approx(1.0));
    CHECK(perfect.accuracy.value() == doctest::Approx(1.0));
    CHECK(perfect.f1.value() == doctest::Approx(1.0));
    CHECK(perfect.tp == 2);
    CHECK(perfect.tn == 2);

    // all ties: auroc is one half
    MetricReport ties = score(preds({0.5, 0.5, 0.5, 0.5}, {true, false, true, false}));
    CHECK(ties.auroc.value() == doctest::Approx(0.5));

    // 3 of 4 bot-human pairs ordered correctly:
    // bots score {0.9, 0.4}, humans {0.3, 0.8} -> only (0.4, 0.8) inverted
    MetricReport mixed = score(preds({0.9, 0.3, 0.8, 0.4}, {true, false, false, true}));
    CHECK(mixed.auroc.value() == doctest::Approx(0.75));

    CHECK_THROWS_AS(score({}), std::invalid_argument);
}

TEST_CASE("single-class truth leaves auroc undefined, other metrics defined") {
    MetricReport r = score(preds({0.9, 0.8}, {true, true}));
    CHECK(!r.auroc.has_value());
    CHECK(r.accuracy.value() == doctest::Approx(1.0));
    CHECK(!r.precision.has_value() == false);  // both predicted bot -> precision defined
    MetricReport none_positive = score(preds({0.1, 0.2}, {false, false}));
    CHECK(!none_positive.precision.has_value());  // nothing predicted bot
    CHECK(!none_positive.auroc.has_value());
}

TEST_CASE("rank-statistic auroc equals trapezoidal integration on random score sets") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(40));
        std::vector<double> scores;
        std::vector<bool> truth;
        bool has_pos = false, has_neg = false;
        for (int i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            scores.push_back(std::round(rng.uniform() * 10.0) / 10.0);
            truth.push_back(rng.bernoulli(0.5));
            (truth.back() ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        const auto fast = auroc(scores, truth);
        REQUIRE(fast.has_value());
        CHECK(*fast == doctest::Approx(trapezoid_auroc(scores, truth)).epsilon(1e-9));
    }
}

TEST_CASE("score is invariant under subject reordering") {
    Rng rng(8);
    std::vector<Prediction> p = preds({0.9, 0.2, 0.7, 0.4, 0.6}, {true, false, true, false, true});
    MetricReport base = score(p);
    for (int trial = 0; trial < 10; ++trial) {
        rng.shuffle(p);
        MetricReport again = score(p);
        CHECK(again.accuracy.value() == base.accuracy.value());
        CHECK(again.auroc.value() == base.auroc.value());
        CHECK(again.tp == base.tp);
    }
}

TEST_CASE("scoring functions") {
    // r2 of a perfect prediction is 1, of the mean predictor 0
    CHECK(scoring_value(Scoring::r2, {0, 1, 0, 1}, {0, 1, 0, 1}) == doctest::Approx(1.0));
    CHECK(scoring_value(Scoring::r2, {0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5}) == doctest::Approx(0.0));
    CHECK(scoring_value(Scoring::negative_mse, {0, 1}, {0, 1}) == doctest::Approx(0.0));
    CHECK(scoring_value(Scoring::negative_mse, {0, 1}, {1, 0}) == doctest::Approx(-1.0));
    CHECK(scoring_value(Scoring::accuracy, {0, 1, 1, 0}, {0.1, 0.9, 0.2, 0.3}) ==
          doctest::Approx(0.75));
}

TEST_CASE("permutation importance ranks a label copy first and noise near zero") {
    Rng rng(99);
    const int n = 600;
    Matrix x(n, 3);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double label = rng.bernoulli(0.5) ? 1.0 : 0.0;
        y[static_cast<std::size_t>(i)] = label;
        x(i, 0) = label;                  // exact copy of the label
        x(i, 1) = rng.uniform();          // pure noise
        x(i, 2) = 0.5 * label + 0.25 * rng.uniform();  // weak signal
    }
    // "model": reads the copy feature plus a pinch of the weak one
    const auto predict = [](const Matrix& data) {
        std::vector<double> out(static_cast<std::size_t>(data.rows()));
        for (Eigen::Index r = 0; r < data.rows(); ++r)
            out[static_cast<std::size_t>(r)] =
                std::clamp(0.9 * data(r, 0) + 0.1 * data(r, 2), 0.0, 1.0);
        return out;
    };

    for (Scoring scoring : {Scoring::r2, Scoring::negative_mse}) {
        auto rows = permutation_importance(predict, x, y, {"copy", "noise", "weak"}, 50, scoring,
                                           7);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].feature == "copy");
        CHECK(rows[0].mean_importance > 0.1);
        for (const auto& row : rows)
            if (row.feature == "noise") CHECK(std::abs(row.mean_importance) < 0.02);
    }
}

TEST_CASE("permutation importance edge cases") {
    Matrix x(4, 2);
    x << 1, 0, 1, 1, 1, 0, 1, 1;  // first column constant
    std::vector<double> y = {0, 1, 0, 1};
    const auto predict = [](const Matrix& data) {
        std::vector<double> out(static_cast<std::size_t>(data.rows()));
        for (Eigen::Index r = 0; r < data.rows(); ++r) out[static_cast<std::size_t>(r)] = data(r, 1);
        return out;
    };

    // K = 1: single shuffle, zero spread
    auto rows = permutation_importance(predict, x, y, {"const", "signal"}, 1, Scoring::r2, 3);
    for (const auto& row : rows) {
        if (row.feature == "const") {
            CHECK(row.constant_column);
            CHECK(row.mean_importance == 0.0);
            CHECK(row.stddev == 0.0);
        } else {
            CHECK(row.stddev == 0.0);  // one repeat has no spread
        }
    }

    // shuffling never changes the baseline: an ignored, constant column scores 0 exactly
    auto rows2 = permutation_importance(predict, x, y, {"const", "signal"}, 5, Scoring::r2, 3);
    CHECK(rows2[0].feature == "signal");

    CHECK_THROWS_AS(
        permutation_importance(predict, x, y, {"a", "b"}, 0, Scoring::r2, 1),
        std::invalid_argument);
}

TEST_CASE("permutation importance is reproducible per seed") {
    Rng rng(5);
    Matrix x(50, 2);
    std::vector<double> y(50);
    for (int i = 0; i < 50; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
        y[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    const auto predict = [](const Matrix& data) {
        std::vector<double> out(static_cast<std::size_t>(data.rows()));
        for (Eigen::Index r = 0; r < data.rows(); ++r)
            out[static_cast<std::size_t>(r)] = 0.5 * (data(r, 0) + data(r, 1));
        return out;
    };
    auto a = permutation_importance(predict, x, y, {"f0", "f1"}, 10, Scoring::r2, 42);
    auto b = permutation_importance(predict, x, y, {"f0", "f1"}, 10, Scoring::r2, 42);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].feature == b[i].feature);
        CHECK(a[i].mean_importance == b[i].mean_importance);
        CHECK(a[i].stddev == b[i].stddev);
    }
}

TEST_CASE("graph size study buckets by node count and respects the auroc exclusion") {
    // only 3-node graphs -> single non-empty row
    std::vector<std::tuple<int, double, bool>> only3 = {
        {3, 0.9, true}, {3, 0.1, false}, {3, 0.8, true}};
    auto buckets = graph_size_study(only3, 5);
    REQUIRE(buckets.size() == 5);
    for (const auto& b : buckets) {
        if (b.nodes == 3) {
            CHECK(b.count == 3);
            CHECK(b.metrics.accuracy.value() == doctest::Approx(1.0));
        } else {
            CHECK(b.count == 0);
            CHECK(!b.metrics.accuracy.has_value());
        }
    }

    // a single-class bucket reports metrics but no auroc
    std::vector<std::tuple<int, double, bool>> single_class = {{2, 0.9, true}, {2, 0.7, true}};
    auto buckets2 = graph_size_study(single_class, 3);
    CHECK(buckets2[1].count == 2);
    CHECK(buckets2[1].metrics.accuracy.has_value());
    CHECK(!buckets2[1].metrics.auroc.has_value());
}

TEST_CASE("metric report serializes undefined values as null") {
    MetricReport r = score(preds({0.9}, {true}));
    auto j = r.to_json();
    CHECK(j["auroc"].is_null());
    CHECK(j["accuracy"].get<double>() == doctest::Approx(1.0));
}
