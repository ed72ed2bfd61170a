#include "botracle/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <stdexcept>

#include "botracle/csv.hpp"
#include "botracle/rng.hpp"

namespace botracle {

namespace {

// 2026-01-01T00:00:00Z; sessions start within the following 24h.
constexpr std::int64_t kCorpusEpochMs = 1'767'225'600'000LL;

}  // namespace

std::string to_string(ActorKind k) {
    switch (k) {
        case ActorKind::human: return "human";
        case ActorKind::scraper_bot: return "scraper_bot";
        case ActorKind::monitor_bot: return "monitor_bot";
        case ActorKind::scalper_bot: return "scalper_bot";
        case ActorKind::stealth_bot: return "stealth_bot";
    }
    return "human";
}

ActorKind actor_kind_from_string(const std::string& s) {
    if (s == "human") return ActorKind::human;
    if (s == "scraper_bot") return ActorKind::scraper_bot;
    if (s == "monitor_bot") return ActorKind::monitor_bot;
    if (s == "scalper_bot") return ActorKind::scalper_bot;
    if (s == "stealth_bot") return ActorKind::stealth_bot;
    throw std::invalid_argument("unknown actor kind: " + s);
}

void ActorProfile::validate() const {
    if (interval_model.mean_s <= 0) throw std::invalid_argument("interval mean must be > 0");
    if (interval_model.cv < 0) throw std::invalid_argument("interval CV must be >= 0");
    if (session_length_model.lo < 1) throw std::invalid_argument("session length must be >= 1");
}

namespace {

std::vector<ActorProfile::UaChoice> browser_ua_pool() {
    return {
        {"Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) "
         "Chrome/124.0.0.0 Safari/537.36",
         JavaEnabled::no},
        {"Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) AppleWebKit/605.1.15 (KHTML, like Gecko) "
         "Version/17.4 Safari/605.1.15",
         JavaEnabled::no},
        {"Mozilla/5.0 (X11; Linux x86_64; rv:125.0) Gecko/20100101 Firefox/125.0", JavaEnabled::no},
        {"Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) "
         "Chrome/123.0.0.0 Safari/537.36 Edg/123.0.2420.81",
         JavaEnabled::no},
    };
}

ActorProfile::WindowModel desktop_window_model() {
    ActorProfile::WindowModel w;
    w.width = {1500.0, 350.0, 320, 3840};
    w.height = {900.0, 220.0, 240, 2160};
    return w;
}

std::vector<ActorProfile> build_presets() {
    std::vector<ActorProfile> presets;

    {
        ActorProfile p;
        p.kind = ActorKind::human;
        p.description =
            "Shopper on a desktop browser: irregular pacing with think-pauses, targeted "
            "navigation toward products, realistic window, genuine browser agent.";
        p.interval_model = {18.0, 0.85, 0.12, 0.15};
        p.window_model = desktop_window_model();
        p.ua_model = {browser_ua_pool(), false};
        p.traversal_model = TraversalModel::targeted_walk;
        p.session_length_model = {true, 8.0, 1, 30};
        p.visit_num_lo = 1;
        p.visit_num_hi = 6;
        p.purchase_lo = 1;
        p.purchase_hi = 3;
        p.purchase_zero_prob = 0.7;
        presets.push_back(p);
    }
    {
        ActorProfile p;
        p.kind = ActorKind::scraper_bot;
        p.description =
            "Catalog scraper: breadth-exhaustive sweep at sub-second pace, automation "
            "library agents (one forged legacy browser identity), window unreported or tiny.";
        p.interval_model = {0.8, 0.3, 0.0, 0.0};
        p.window_model.tiny_window_session_fraction = 0.35;
        p.ua_model.pool = {
            {"Scrapy/2.11 (+https://scrapy.org)", JavaEnabled::unknown},
            {"python-requests/2.28.1", JavaEnabled::unknown},
            {"Wget/1.21.3", JavaEnabled::unknown},
            {"Mozilla/4.0 (compatible; MSIE 6.0; Windows NT 5.1)", JavaEnabled::no},
        };
        p.ua_model.forged = true;
        p.traversal_model = TraversalModel::breadth_exhaustive;
        p.session_length_model = {false, 0.0, 25, 60};
        p.visit_num_lo = 1;
        p.visit_num_hi = 2;
        presets.push_back(p);
    }
    {
        ActorProfile p;
        p.kind = ActorKind::monitor_bot;
        p.description =
            "Uptime monitor: hits one page on a near-perfect clock (interval CV 0.005), "
            "plain HTTP client agent, no window metrics, very high visit number.";
        p.interval_model = {60.0, 0.005, 0.0, 0.0};
        p.ua_model.pool = {
            {"python-requests/2.31.0", JavaEnabled::unknown},
            {"curl/8.4.0", JavaEnabled::unknown},
        };
        p.traversal_model = TraversalModel::single_page_repeat;
        p.session_length_model = {false, 0.0, 12, 60};
        p.visit_num_lo = 50;
        p.visit_num_hi = 400;
        p.hourly_visitor = true;
        presets.push_back(p);
    }
    {
        ActorProfile p;
        p.kind = ActorKind::scalper_bot;
        p.description =
            "Checkout rusher: loops product-cart-checkout every second or so from a "
            "headless browser, heavy purchase history.";
        p.interval_model = {1.2, 0.25, 0.0, 0.0};
        p.window_model.width = {800.0, 0.0, 800, 800};
        p.window_model.height = {600.0, 0.0, 600, 600};
        p.ua_model.pool = {
            {"Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 (KHTML, like Gecko) "
             "HeadlessChrome/124.0.0.0 Safari/537.36",
             JavaEnabled::no},
        };
        p.ua_model.forged = true;
        p.traversal_model = TraversalModel::purchase_rush;
        p.session_length_model = {false, 0.0, 9, 24};
        p.visit_num_lo = 1;
        p.visit_num_hi = 8;
        p.purchase_lo = 4;
        p.purchase_hi = 20;
        presets.push_back(p);
    }
    {
        ActorProfile p;
        p.kind = ActorKind::stealth_bot;
        p.description =
            "Evasive bot: genuine browser agent, human-like window and capabilities; "
            "gives itself away only behaviorally (exhaustive sweeps or single-page "
            "hammering at a pace no shopper sustains).";
        p.interval_model = {2.5, 0.5, 0.0, 0.15};
        p.window_model = desktop_window_model();
        p.ua_model = {browser_ua_pool(), false};
        p.traversal_model = TraversalModel::breadth_exhaustive;
        p.alt_traversal = TraversalModel::single_page_repeat;
        p.alt_traversal_prob = 0.4;
        p.session_length_model = {false, 0.0, 20, 70};
        p.visit_num_lo = 1;
        p.visit_num_hi = 3;
        presets.push_back(p);
    }

    for (const auto& p : presets) p.validate();
    return presets;
}

}  // namespace

const std::vector<ActorProfile>& describe_profiles() {
    static const std::vector<ActorProfile> presets = build_presets();
    return presets;
}

const ActorProfile& profile_for(ActorKind kind) {
    for (const auto& p : describe_profiles())
        if (p.kind == kind) return p;
    throw std::logic_error("no preset for actor kind");
}

void CorpusSpec::validate() const {
    if (n_sessions <= 0) throw std::invalid_argument("n_sessions must be positive");
    double total = 0.0;
    for (const auto& [kind, frac] : mix) {
        (void)kind;
        if (frac < 0.0 || frac > 1.0)
            throw std::invalid_argument("mix fraction out of [0,1]: " + std::to_string(frac));
        total += frac;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("mix fractions sum to " + std::to_string(total) +
                                    ", expected 1");
    if (cloud_ip_fraction_for_bots < 0 || cloud_ip_fraction_for_bots > 1)
        throw std::invalid_argument("cloud_ip_fraction_for_bots out of [0,1]");
    if (internal_account_fraction_for_humans < 0 || internal_account_fraction_for_humans > 1)
        throw std::invalid_argument("internal_account_fraction_for_humans out of [0,1]");
    if (!sitemap.pages.empty()) sitemap.validate();
}

const std::vector<std::string>& simulated_cloud_cidrs() {
    static const std::vector<std::string> cidrs = {
        "3.120.0.0/14", "13.52.0.0/14", "34.64.0.0/10", "52.32.0.0/11"};
    return cidrs;
}

std::vector<std::string> simulated_internal_accounts() {
    std::vector<std::string> ids;
    ids.reserve(50);
    for (int i = 0; i < 50; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "emp-%03d", i);
        ids.emplace_back(buf);
    }
    return ids;
}

namespace {

std::string octet_ip(int a, int b, int c, int d) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%d.%d.%d.%d", a, b, c, d);
    return buf;
}

std::string draw_cloud_ip(Rng& rng) {
    switch (rng.uniform_index(4)) {
        case 0: return octet_ip(3, 120 + static_cast<int>(rng.uniform_index(4)),
                                static_cast<int>(rng.uniform_index(256)),
                                static_cast<int>(rng.uniform_index(254)) + 1);
        case 1: return octet_ip(13, 52 + static_cast<int>(rng.uniform_index(4)),
                                static_cast<int>(rng.uniform_index(256)),
                                static_cast<int>(rng.uniform_index(254)) + 1);
        case 2: return octet_ip(34, 64 + static_cast<int>(rng.uniform_index(64)),
                                static_cast<int>(rng.uniform_index(256)),
                                static_cast<int>(rng.uniform_index(254)) + 1);
        default: return octet_ip(52, 32 + static_cast<int>(rng.uniform_index(32)),
                                 static_cast<int>(rng.uniform_index(256)),
                                 static_cast<int>(rng.uniform_index(254)) + 1);
    }
}

std::string draw_residential_ip(Rng& rng) {
    static const int firsts[] = {84, 92, 176, 188};
    return octet_ip(firsts[rng.uniform_index(4)],
                    static_cast<int>(rng.uniform_index(256)),
                    static_cast<int>(rng.uniform_index(256)),
                    static_cast<int>(rng.uniform_index(254)) + 1);
}

std::string draw_noncloud_bot_ip(Rng& rng) {
    static const std::pair<int, int> bases[] = {{203, 0}, {198, 51}, {45, 83}};
    auto [a, b] = bases[rng.uniform_index(3)];
    return octet_ip(a, b, static_cast<int>(rng.uniform_index(256)),
                    static_cast<int>(rng.uniform_index(254)) + 1);
}

int draw_session_length(const ActorProfile::SessionLengthModel& m, Rng& rng) {
    if (m.geometric) {
        int n = rng.geometric(1.0 / std::max(1.0, m.mean));
        return std::clamp(n, m.lo, m.hi);
    }
    return static_cast<int>(rng.uniform_int(m.lo, m.hi));
}

double population_cv(const std::vector<double>& xs, std::size_t count) {
    double mean = 0.0;
    for (std::size_t i = 0; i < count; ++i) mean += xs[i];
    mean /= static_cast<double>(count);
    if (mean <= 0.0) return 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < count; ++i) var += (xs[i] - mean) * (xs[i] - mean);
    var /= static_cast<double>(count);
    return std::sqrt(var) / mean;
}

std::vector<double> draw_intervals(const ActorProfile::IntervalModel& m, int n_gaps, Rng& rng) {
    std::vector<double> gaps(static_cast<std::size_t>(std::max(0, n_gaps)));
    if (n_gaps <= 0) return gaps;
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (auto& g : gaps) {
            if (m.cv < 0.02) {
                // Clockwork pacing: tight relative jitter around the mean.
                double z = std::clamp(rng.normal(), -3.0, 3.0);
                g = std::max(0.001, m.mean_s * (1.0 + m.cv * z));
            } else {
                g = rng.lognormal_mean_cv(m.mean_s, m.cv);
                if (m.pause_prob > 0 && rng.bernoulli(m.pause_prob)) g *= rng.uniform(4.0, 10.0);
                g = std::max(0.05, g);
            }
        }
        if (m.min_prefix_cv <= 0.0) return gaps;
        bool ok = true;
        for (std::size_t k = 4; k <= gaps.size(); ++k) {
            if (population_cv(gaps, k) < m.min_prefix_cv) {
                ok = false;
                break;
            }
        }
        if (ok) return gaps;
    }
    return gaps;  // last attempt; vanishingly rare with the preset models
}

std::vector<std::string> walk_targeted(const SiteMap& sm, int length, Rng& rng) {
    std::vector<std::string> pages;
    std::string current = sm.entry_pages[rng.uniform_index(sm.entry_pages.size())];
    pages.push_back(current);
    while (static_cast<int>(pages.size()) < length) {
        const auto& out = sm.links_from(current);
        if (out.empty()) {
            current = sm.entry_pages[rng.uniform_index(sm.entry_pages.size())];
            pages.push_back(current);
            continue;
        }
        // Shoppers drift toward the catalog and occasionally circle back to hubs.
        std::vector<double> weights(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            switch (sm.type_of(out[i])) {
                case PageType::product: weights[i] = 4.0; break;
                case PageType::category: weights[i] = 2.5; break;
                case PageType::search: weights[i] = 1.2; break;
                case PageType::cart: weights[i] = 0.8; break;
                case PageType::checkout: weights[i] = 1.5; break;
                case PageType::content: weights[i] = 0.5; break;
                case PageType::other: weights[i] = 1.0; break;
            }
        }
        current = out[rng.weighted_index(weights)];
        pages.push_back(current);
    }
    return pages;
}

std::vector<std::string> walk_exhaustive(const SiteMap& sm, int length, Rng& rng) {
    // Systematic breadth-first sweep; wraps into further sweeps when the site
    // is smaller than the session.
    std::vector<std::string> order;
    std::set<std::string> seen;
    std::deque<std::string> queue;
    const std::string entry = sm.entry_pages[rng.uniform_index(sm.entry_pages.size())];
    queue.push_back(entry);
    seen.insert(entry);
    while (!queue.empty()) {
        std::string page = queue.front();
        queue.pop_front();
        order.push_back(page);
        auto targets = sm.links_from(page);
        std::sort(targets.begin(), targets.end());
        for (const auto& t : targets) {
            if (seen.insert(t).second) queue.push_back(t);
        }
    }
    std::vector<std::string> pages;
    pages.reserve(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) pages.push_back(order[static_cast<std::size_t>(i) % order.size()]);
    return pages;
}

std::vector<std::string> walk_single_page(const SiteMap& sm, int length, Rng& rng) {
    const std::string page = sm.entry_pages[rng.uniform_index(sm.entry_pages.size())];
    std::vector<std::string> pages(static_cast<std::size_t>(length), page);
    if (length > 3 && rng.bernoulli(0.3)) {
        // Dual-target variant: alternates with one linked page.
        const auto& out = sm.links_from(page);
        if (!out.empty()) {
            const std::string alt = out[rng.uniform_index(out.size())];
            for (std::size_t i = 1; i < pages.size(); i += 2) pages[i] = alt;
        }
    }
    return pages;
}

std::vector<std::string> walk_purchase_rush(const SiteMap& sm, int length, Rng& rng) {
    std::vector<std::string> products;
    for (const auto& p : sm.pages)
        if (p.page_type == PageType::product) products.push_back(p.pagename);
    std::vector<std::string> pages;
    pages.reserve(static_cast<std::size_t>(length));
    std::string target =
        products.empty() ? sm.entry_pages[0] : products[rng.uniform_index(products.size())];
    while (static_cast<int>(pages.size()) < length) {
        pages.push_back(target);
        if (static_cast<int>(pages.size()) < length) pages.push_back("cart");
        if (static_cast<int>(pages.size()) < length) pages.push_back("checkout");
        if (!products.empty() && rng.bernoulli(0.3))
            target = products[rng.uniform_index(products.size())];
    }
    return pages;
}

std::vector<std::string> draw_pages(const ActorProfile& profile, const SiteMap& sm, int length,
                                    Rng& rng) {
    TraversalModel model = profile.traversal_model;
    if (profile.alt_traversal_prob > 0 && rng.bernoulli(profile.alt_traversal_prob))
        model = profile.alt_traversal;
    switch (model) {
        case TraversalModel::targeted_walk: return walk_targeted(sm, length, rng);
        case TraversalModel::breadth_exhaustive: return walk_exhaustive(sm, length, rng);
        case TraversalModel::single_page_repeat: return walk_single_page(sm, length, rng);
        case TraversalModel::purchase_rush: return walk_purchase_rush(sm, length, rng);
    }
    return walk_targeted(sm, length, rng);
}

int draw_axis(const ActorProfile::AxisModel& m, Rng& rng) {
    if (m.mean <= 0.0) return 0;
    double v = rng.normal(m.mean, m.stddev);
    return std::clamp(static_cast<int>(std::lround(v)), m.min_px, m.max_px);
}

struct SessionDraw {
    std::vector<HitRecord> hits;
};

SessionDraw generate_session(const CorpusSpec& spec, const SiteMap& sm,
                             const ActorProfile& profile, const std::string& session_id,
                             Rng rng) {
    SessionDraw out;
    const int length = draw_session_length(profile.session_length_model, rng);
    const auto pages = draw_pages(profile, sm, length, rng);
    const auto gaps = draw_intervals(profile.interval_model, length - 1, rng);

    const std::int64_t start_ms = kCorpusEpochMs + static_cast<std::int64_t>(rng.uniform_index(86'400'000));

    const bool is_bot = profile.kind != ActorKind::human;
    std::string ip;
    std::optional<std::string> account;
    if (is_bot) {
        ip = rng.bernoulli(spec.cloud_ip_fraction_for_bots) ? draw_cloud_ip(rng)
                                                            : draw_noncloud_bot_ip(rng);
    } else {
        ip = draw_residential_ip(rng);
        if (rng.bernoulli(spec.internal_account_fraction_for_humans)) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "emp-%03d", static_cast<int>(rng.uniform_index(50)));
            account = std::string(buf);
        }
    }

    const auto& ua = profile.ua_model.pool[rng.uniform_index(profile.ua_model.pool.size())];

    int width = draw_axis(profile.window_model.width, rng);
    int height = draw_axis(profile.window_model.height, rng);
    if (profile.window_model.tiny_window_session_fraction > 0 &&
        rng.bernoulli(profile.window_model.tiny_window_session_fraction)) {
        width = static_cast<int>(rng.uniform_int(8, 45));
        height = static_cast<int>(rng.uniform_int(8, 45));
    }

    const int visit_num = static_cast<int>(rng.uniform_int(profile.visit_num_lo, profile.visit_num_hi));
    int purchases = 0;
    if (profile.purchase_hi > 0 && !rng.bernoulli(profile.purchase_zero_prob))
        purchases = static_cast<int>(rng.uniform_int(profile.purchase_lo, profile.purchase_hi));

    std::int64_t ts = start_ms;
    out.hits.reserve(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
        if (i > 0) ts += static_cast<std::int64_t>(std::llround(gaps[static_cast<std::size_t>(i - 1)] * 1000.0));
        HitRecord h;
        h.timestamp = ts;
        h.ip = ip;
        h.account_id = account;
        h.user_agent = ua.agent;
        h.browser_width = width;
        h.browser_height = height;
        h.java_enabled = ua.java;
        h.pagename = pages[static_cast<std::size_t>(i)];
        if (i > 0) h.prev_pagename = pages[static_cast<std::size_t>(i - 1)];
        h.first_hit_pagename = pages[0];
        h.page_type = sm.type_of(h.pagename);
        h.visit_num = visit_num;
        h.visit_page_num = i + 1;
        h.hourly_visitor = profile.hourly_visitor;
        h.last_purchase_num = purchases;
        h.session_id = session_id;
        h.label = is_bot ? Label::bot : Label::human;
        if (h.page_type == PageType::checkout) ++purchases;
        out.hits.push_back(std::move(h));
    }
    return out;
}

}  // namespace

Corpus generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    const SiteMap& sm = spec.sitemap.pages.empty() ? default_store() : spec.sitemap;

    // Largest-remainder apportionment so session counts hit the mix exactly.
    const ActorKind kind_order[] = {ActorKind::human, ActorKind::scraper_bot,
                                    ActorKind::monitor_bot, ActorKind::scalper_bot,
                                    ActorKind::stealth_bot};
    std::vector<std::pair<ActorKind, double>> fracs;
    for (ActorKind k : kind_order) {
        auto it = spec.mix.find(k);
        if (it != spec.mix.end() && it->second > 0.0) fracs.emplace_back(k, it->second);
    }
    std::vector<int> counts(fracs.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t i = 0; i < fracs.size(); ++i) {
        double exact = fracs[i].second * spec.n_sessions;
        counts[i] = static_cast<int>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < spec.n_sessions - assigned; ++i)
        ++counts[remainders[static_cast<std::size_t>(i) % remainders.size()].second];

    std::vector<ActorKind> kinds;
    kinds.reserve(static_cast<std::size_t>(spec.n_sessions));
    for (std::size_t i = 0; i < fracs.size(); ++i)
        kinds.insert(kinds.end(), static_cast<std::size_t>(counts[i]), fracs[i].first);

    Rng root(spec.seed);
    Rng shuffle_rng = root.split(0);
    shuffle_rng.shuffle(kinds);

    Corpus corpus;
    std::vector<std::vector<HitRecord>> per_session;
    per_session.reserve(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "s%06zu", i + 1);
        const std::string sid(buf);
        const ActorProfile& profile = profile_for(kinds[i]);
        auto draw = generate_session(spec, sm, profile, sid, root.split(1000 + i));
        corpus.truth[sid] = kinds[i] == ActorKind::human ? Label::human : Label::bot;
        corpus.kinds[sid] = kinds[i];
        per_session.push_back(std::move(draw.hits));
    }

    std::size_t total = 0;
    for (const auto& v : per_session) total += v.size();
    corpus.hits.reserve(total);
    for (auto& v : per_session)
        for (auto& h : v) corpus.hits.push_back(std::move(h));
    std::stable_sort(corpus.hits.begin(), corpus.hits.end(),
                     [](const HitRecord& a, const HitRecord& b) {
                         if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                         if (a.session_id != b.session_id) return a.session_id < b.session_id;
                         return a.visit_page_num < b.visit_page_num;
                     });
    return corpus;
}

void write_truth_csv(const std::string& path, const std::map<std::string, Label>& truth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    csv::write_record(out, {"session_id", "label"});
    for (const auto& [sid, label] : truth) csv::write_record(out, {sid, to_string(label)});
}

std::map<std::string, Label> read_truth_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open truth file: " + path);
    std::map<std::string, Label> truth;
    std::vector<std::string> row;
    bool first = true;
    while (csv::read_record(in, row)) {
        if (first) {
            first = false;
            if (!row.empty() && row[0] == "session_id") continue;
        }
        if (row.size() < 2 || row[0].empty()) continue;
        truth[row[0]] = label_from_string(row[1]);
    }
    return truth;
}

}  // namespace botracle
