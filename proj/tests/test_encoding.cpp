#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "botracle/encoding.hpp"
#include "botracle/rng.hpp"

using namespace botracle;

namespace {

HitRecord basic_hit(const std::string& ua, PageType pt = PageType::product) {
    HitRecord h;
    h.timestamp = 1000;
    h.pagename = "p";
    h.user_agent = ua;
    h.page_type = pt;
    h.java_enabled = JavaEnabled::no;
    return h;
}

const std::string kChrome =
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 Chrome/124.0 Safari/537.36";

}  // namespace

TEST_CASE("rare category folding uses a strict threshold") {
    // 999 common + 1 rare = exactly the 0.001 default threshold: kept.
    std::vector<HitRecord> hits;
    for (int i = 0; i < 999; ++i) hits.push_back(basic_hit(kChrome));
    hits.push_back(basic_hit("FooBot/1.0"));

    auto enc = FeatureEncoder::fit(hits, 0.001);
    const auto& ua_vocab = enc.categorical_specs()[1].vocabulary;
    CHECK(std::count(ua_vocab.begin(), ua_vocab.end(), "FooBot") == 1);

    // a higher threshold folds it into Other
    auto enc2 = FeatureEncoder::fit(hits, 0.002);
    const auto& ua_vocab2 = enc2.categorical_specs()[1].vocabulary;
    CHECK(std::count(ua_vocab2.begin(), ua_vocab2.end(), "FooBot") == 0);
    CHECK(ua_vocab2.back() == "Other");

    // the folded value one-hots into the Other slot
    FeatureVector v = enc2.encode(basic_hit("FooBot/1.0"));
    const auto& names = enc2.feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "user_agent_Other") CHECK(v.values[i] == 1.0);
        else if (names[i].rfind("user_agent_", 0) == 0) CHECK(v.values[i] == 0.0);
    }
}

TEST_CASE("single-valued categorical still carries an Other bucket") {
    std::vector<HitRecord> hits(10, basic_hit(kChrome, PageType::search));
    auto enc = FeatureEncoder::fit(hits);
    const auto& pt_vocab = enc.categorical_specs()[2].vocabulary;
    CHECK(pt_vocab.size() == 2);
    CHECK(pt_vocab[0] == "search");
    CHECK(pt_vocab[1] == "Other");
}

TEST_CASE("fitting is deterministic") {
    std::vector<HitRecord> hits;
    Rng rng(4);
    const std::vector<std::string> uas = {kChrome, "curl/8.4.0", "python-requests/2.31"};
    for (int i = 0; i < 200; ++i) {
        HitRecord h = basic_hit(uas[rng.uniform_index(3)]);
        h.browser_width = static_cast<int>(rng.uniform_index(2000));
        hits.push_back(h);
    }
    auto a = FeatureEncoder::fit(hits);
    auto b = FeatureEncoder::fit(hits);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.feature_names() == b.feature_names());
}

TEST_CASE("numeric scaling pins min to 0 and max to 1, clamping outside") {
    std::vector<HitRecord> hits;
    for (int w : {200, 600, 1000}) {
        HitRecord h = basic_hit(kChrome);
        h.browser_height = w;
        hits.push_back(h);
    }
    auto enc = FeatureEncoder::fit(hits);

    HitRecord max_h = basic_hit(kChrome);
    max_h.browser_height = 1000;
    CHECK(enc.encode(max_h).values[1] == doctest::Approx(1.0));

    HitRecord min_h = basic_hit(kChrome);
    min_h.browser_height = 200;
    CHECK(enc.encode(min_h).values[1] == doctest::Approx(0.0));

    HitRecord mid = basic_hit(kChrome);
    mid.browser_height = 600;
    CHECK(enc.encode(mid).values[1] == doctest::Approx(0.5));

    HitRecord beyond = basic_hit(kChrome);
    beyond.browser_height = 5000;
    CHECK(enc.encode(beyond).values[1] == doctest::Approx(1.0));  // clamped
}

TEST_CASE("java one-hot block singles out the observed value") {
    std::vector<HitRecord> hits;
    for (JavaEnabled j : {JavaEnabled::yes, JavaEnabled::no, JavaEnabled::unknown})
        for (int i = 0; i < 5; ++i) {
            HitRecord h = basic_hit(kChrome);
            h.java_enabled = j;
            hits.push_back(h);
        }
    auto enc = FeatureEncoder::fit(hits);
    HitRecord h = basic_hit(kChrome);
    h.java_enabled = JavaEnabled::no;
    FeatureVector v = enc.encode(h);
    const auto& names = enc.feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "java_enabled_N") CHECK(v.values[i] == 1.0);
        if (names[i] == "java_enabled_Y") CHECK(v.values[i] == 0.0);
        if (names[i] == "java_enabled_U") CHECK(v.values[i] == 0.0);
    }
}

TEST_CASE("encoded vectors have stable width, clamped values and one-hot partitions") {
    Rng rng(9);
    std::vector<HitRecord> hits;
    const std::vector<std::string> uas = {kChrome, "curl/8.4.0", "Scrapy/2.11", "Wget/1.21.3"};
    for (int i = 0; i < 300; ++i) {
        HitRecord h = basic_hit(uas[rng.uniform_index(4)],
                                static_cast<PageType>(rng.uniform_index(7)));
        h.browser_width = static_cast<int>(rng.uniform_index(3000));
        h.browser_height = static_cast<int>(rng.uniform_index(2000));
        h.visit_num = 1 + static_cast<int>(rng.uniform_index(50));
        h.visit_page_num = 1 + static_cast<int>(rng.uniform_index(100));
        h.last_purchase_num = static_cast<int>(rng.uniform_index(10));
        h.hourly_visitor = rng.bernoulli(0.3);
        h.java_enabled = static_cast<JavaEnabled>(rng.uniform_index(3));
        h.label = rng.bernoulli(0.5) ? Label::bot : Label::human;
        hits.push_back(h);
    }
    auto enc = FeatureEncoder::fit(hits);

    for (int trial = 0; trial < 50; ++trial) {
        const HitRecord& h = hits[rng.uniform_index(hits.size())];
        FeatureVector v = enc.encode(h);
        CHECK(v.values.size() == enc.total_width());
        CHECK(v.label == h.label);
        for (double x : v.values) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
        // each categorical block holds exactly one 1
        std::size_t offset = enc.numeric_specs().size() + 1;
        for (const auto& spec : enc.categorical_specs()) {
            double block_sum = 0;
            for (std::size_t i = 0; i < spec.vocabulary.size(); ++i)
                block_sum += v.values[offset + i];
            CHECK(block_sum == doctest::Approx(1.0));
            offset += spec.vocabulary.size();
        }
        // purity
        FeatureVector v2 = enc.encode(h);
        CHECK(v.values == v2.values);
    }
}

TEST_CASE("encoder persists through json") {
    std::vector<HitRecord> hits = {basic_hit(kChrome), basic_hit("curl/8.4.0")};
    hits[0].browser_width = 1200;
    auto enc = FeatureEncoder::fit(hits);
    auto restored = FeatureEncoder::from_json(enc.to_json());
    CHECK(restored.feature_names() == enc.feature_names());
    CHECK(restored.encode(hits[0]).values == enc.encode(hits[0]).values);
}

TEST_CASE("fit on empty input is an error") {
    CHECK_THROWS_AS(FeatureEncoder::fit({}), std::invalid_argument);
}
