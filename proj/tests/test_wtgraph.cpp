#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "botracle/rake.hpp"
#include "botracle/rng.hpp"
#include "botracle/wtgraph.hpp"

using namespace botracle;

namespace {

Session make_session(const std::vector<std::string>& pages, std::int64_t step_ms = 10'000) {
    Session s;
    s.session_id = "s1";
    std::int64_t ts = 1'000'000;
    for (std::size_t i = 0; i < pages.size(); ++i) {
        HitRecord h;
        h.timestamp = ts;
        h.pagename = pages[i];
        h.session_id = "s1";
        h.visit_page_num = static_cast<int>(i + 1);
        if (i > 0) h.prev_pagename = pages[i - 1];
        h.first_hit_pagename = pages[0];
        s.hits.push_back(h);
        ts += step_ms;
    }
    return s;
}

// Exhaustive betweenness oracle: enumerate every simple path between every
// ordered pair, keep the shortest, and count interior appearances.
std::map<std::string, double> brute_force_betweenness(const WTGraph& g) {
    std::vector<std::string> names;
    for (const auto& [name, label] : g.nodes) names.push_back(name);
    const int n = static_cast<int>(names.size());
    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[names[static_cast<std::size_t>(i)]] = i;

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [edge, w] : g.edges) {
        (void)w;
        if (edge.first == edge.second) continue;
        adj[static_cast<std::size_t>(index[edge.first])].push_back(index[edge.second]);
    }

    std::vector<double> score(static_cast<std::size_t>(n), 0.0);
    for (int s = 0; s < n; ++s) {
        for (int t = 0; t < n; ++t) {
            if (s == t) continue;
            // enumerate all simple paths s -> t via DFS
            std::vector<std::vector<int>> paths;
            std::vector<int> stack{s};
            std::vector<bool> on_path(static_cast<std::size_t>(n), false);
            on_path[static_cast<std::size_t>(s)] = true;
            std::function<void()> dfs = [&]() {
                const int v = stack.back();
                if (v == t) {
                    paths.push_back(stack);
                    return;
                }
                for (int w : adj[static_cast<std::size_t>(v)]) {
                    if (on_path[static_cast<std::size_t>(w)]) continue;
                    on_path[static_cast<std::size_t>(w)] = true;
                    stack.push_back(w);
                    dfs();
                    stack.pop_back();
                    on_path[static_cast<std::size_t>(w)] = false;
                }
            };
            dfs();
            if (paths.empty()) continue;
            std::size_t best = SIZE_MAX;
            for (const auto& p : paths) best = std::min(best, p.size());
            std::vector<std::vector<int>> shortest;
            for (const auto& p : paths)
                if (p.size() == best) shortest.push_back(p);
            for (const auto& p : shortest)
                for (std::size_t i = 1; i + 1 < p.size(); ++i)
                    score[static_cast<std::size_t>(p[i])] +=
                        1.0 / static_cast<double>(shortest.size());
        }
    }

    std::map<std::string, double> out;
    const double norm = n > 2 ? static_cast<double>((n - 1) * (n - 2)) : 0.0;
    for (int i = 0; i < n; ++i)
        out[names[static_cast<std::size_t>(i)]] =
            norm > 0 ? score[static_cast<std::size_t>(i)] / norm : 0.0;
    return out;
}

WTGraph random_graph(Rng& rng, int max_nodes = 6) {
    const int n = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_nodes)));
    WTGraph g;
    g.session_id = "r";
    for (int i = 0; i < n; ++i) {
        NodeLabel label;
        label.first_visit_timestamp = 1000 + i;
        label.hit_count = 1 + static_cast<std::int64_t>(rng.uniform_index(5));
        label.page_type = static_cast<PageType>(rng.uniform_index(7));
        g.nodes["n" + std::to_string(i)] = label;
    }
    g.entry_pagename = "n0";
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (rng.bernoulli(0.35))
                g.edges[{"n" + std::to_string(u), "n" + std::to_string(v)}] =
                    1 + static_cast<std::int64_t>(rng.uniform_index(3));
    return g;
}

}  // namespace

TEST_CASE("build_graph traces nodes, edges and hit counts") {
    WTGraph g = build_graph(make_session({"A", "B", "A"}));
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 2);
    CHECK(g.nodes.at("A").hit_count == 2);
    CHECK(g.nodes.at("B").hit_count == 1);
    CHECK(g.edges.at({"A", "B"}) == 1);
    CHECK(g.edges.at({"B", "A"}) == 1);
    CHECK(g.entry_pagename == "A");

    WTGraph single = build_graph(make_session({"A"}));
    CHECK(single.node_count() == 1);
    CHECK(single.edge_count() == 0);
    CHECK(single.entry_pagename == "A");

    // refresh: A,A,A self-loops
    WTGraph loops = build_graph(make_session({"A", "A", "A"}));
    CHECK(loops.node_count() == 1);
    CHECK(loops.nodes.at("A").hit_count == 3);
    CHECK(loops.edges.at({"A", "A"}) == 2);
}

TEST_CASE("update_graph is the incremental form of build_graph") {
    Session s = make_session({"A", "B", "C", "B", "B"});
    WTGraph batch = build_graph(s);
    WTGraph incremental;
    for (const auto& h : s.hits) update_graph(incremental, h);
    CHECK(incremental.session_id == batch.session_id);
    CHECK(incremental.entry_pagename == batch.entry_pagename);
    REQUIRE(incremental.node_count() == batch.node_count());
    REQUIRE(incremental.edge_count() == batch.edge_count());
    for (const auto& [name, label] : batch.nodes) {
        CHECK(incremental.nodes.at(name).hit_count == label.hit_count);
        CHECK(incremental.nodes.at(name).first_visit_timestamp == label.first_visit_timestamp);
    }
    for (const auto& [edge, weight] : batch.edges) CHECK(incremental.edges.at(edge) == weight);

    // a new pagename bumps the node count; a revisit bumps only the weight
    WTGraph g = build_graph(make_session({"A", "B"}));
    HitRecord fresh;
    fresh.timestamp = 2'000'000;
    fresh.pagename = "C";
    fresh.prev_pagename = "B";
    fresh.session_id = "s1";
    update_graph(g, fresh);
    CHECK(g.node_count() == 3);
    const auto edges_before = g.edge_count();
    HitRecord revisit;
    revisit.timestamp = 2'100'000;
    revisit.pagename = "C";
    revisit.prev_pagename = "B";
    revisit.session_id = "s1";
    update_graph(g, revisit);
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == edges_before);
    CHECK(g.edges.at({"B", "C"}) == 2);

    HitRecord wrong;
    wrong.timestamp = 1;
    wrong.pagename = "X";
    wrong.session_id = "other";
    CHECK_THROWS_AS(update_graph(g, wrong), std::invalid_argument);
}

TEST_CASE("incremental equals batch on random sessions") {
    Rng rng(77);
    const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g"};
    for (int trial = 0; trial < 100; ++trial) {
        const int len = 1 + static_cast<int>(rng.uniform_index(50));
        std::vector<std::string> pages;
        for (int i = 0; i < len; ++i) pages.push_back(pool[rng.uniform_index(pool.size())]);
        Session s = make_session(pages);
        WTGraph batch = build_graph(s);
        WTGraph inc;
        for (const auto& h : s.hits) update_graph(inc, h);
        REQUIRE(inc.node_count() == batch.node_count());
        REQUIRE(inc.edge_count() == batch.edge_count());
        for (const auto& [name, label] : batch.nodes)
            CHECK(inc.nodes.at(name).hit_count == label.hit_count);
        for (const auto& [edge, weight] : batch.edges) CHECK(inc.edges.at(edge) == weight);
        CHECK(batch.total_hits() == len);
    }
}

TEST_CASE("metrics on the directed 3-cycle") {
    Session s = make_session({"A", "B", "C", "A"});
    s.hits.pop_back();  // A -> B -> C, then close the cycle by hand
    WTGraph g = build_graph(make_session({"A", "B", "C"}));
    g.edges[{"C", "A"}] = 1;

    GraphMetrics m = compute_metrics(g);
    for (const auto& name : {"A", "B", "C"}) {
        CHECK(m.node_degree.at(name) == 2);
        CHECK(m.degree_centrality.at(name) == doctest::Approx(1.0));
        CHECK(m.betweenness_centrality.at(name) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("metrics on the path A->B->C and a single node") {
    WTGraph path = build_graph(make_session({"A", "B", "C"}));
    GraphMetrics m = compute_metrics(path);
    CHECK(m.betweenness_centrality.at("B") == doctest::Approx(0.5));
    CHECK(m.betweenness_centrality.at("A") == doctest::Approx(0.0));
    CHECK(m.betweenness_centrality.at("C") == doctest::Approx(0.0));
    CHECK(m.node_degree.at("B") == 2);
    CHECK(m.degree_centrality.at("B") == doctest::Approx(1.0));

    Session one = make_session({"A"});
    one.hits[0].page_type = PageType::cart;
    GraphMetrics m1 = compute_metrics(build_graph(one));
    CHECK(m1.node_count == 1);
    CHECK(m1.degree_centrality.at("A") == 0.0);
    CHECK(m1.betweenness_centrality.at("A") == 0.0);
    CHECK(m1.page_type_distribution.at(PageType::cart) == doctest::Approx(1.0));
}

TEST_CASE("hit-weighted page type distribution sums to one") {
    Session s = make_session({"A", "B", "A", "C", "A"});
    s.hits[0].page_type = s.hits[2].page_type = s.hits[4].page_type = PageType::product;
    s.hits[1].page_type = PageType::cart;
    s.hits[3].page_type = PageType::search;
    GraphMetrics m = compute_metrics(build_graph(s));
    CHECK(m.page_type_distribution.at(PageType::product) == doctest::Approx(0.6));
    CHECK(m.page_type_distribution.at(PageType::cart) == doctest::Approx(0.2));
    CHECK(m.page_type_distribution.at(PageType::search) == doctest::Approx(0.2));
    double total = 0;
    for (const auto& [pt, f] : m.page_type_distribution) total += f;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.number_of_hits == 5);
    std::int64_t per_page = 0;
    for (const auto& [name, hits] : m.hits_per_subpage) per_page += hits;
    CHECK(per_page == m.number_of_hits);
}

TEST_CASE("betweenness matches exhaustive enumeration on random digraphs") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        WTGraph g = random_graph(rng);
        auto fast = betweenness_centrality(g);
        auto slow = brute_force_betweenness(g);
        REQUIRE(fast.size() == slow.size());
        for (const auto& [name, value] : slow)
            CHECK(fast.at(name) == doctest::Approx(value).epsilon(1e-9));
    }
}

TEST_CASE("degree-1 leaves of a DAG have zero betweenness") {
    //   A -> B -> C, A -> C; leaf D hangs off C
    WTGraph g = build_graph(make_session({"A", "B", "C", "D"}));
    g.edges[{"A", "C"}] = 1;
    auto bc = betweenness_centrality(g);
    CHECK(bc.at("D") == doctest::Approx(0.0));
    CHECK(bc.at("A") == doctest::Approx(0.0));
}

TEST_CASE("self-loops count in degree once and never enter shortest paths") {
    WTGraph g = build_graph(make_session({"A", "A", "B", "A"}));
    GraphMetrics m = compute_metrics(g);
    // edges: (A,A), (A,B), (B,A) -> degree(A) = 1 (self) + 2 = 3
    CHECK(m.node_degree.at("A") == 3);
    CHECK(m.node_degree.at("B") == 2);
    CHECK(m.betweenness_centrality.at("A") == 0.0);
}

TEST_CASE("rake scores the documented examples") {
    const std::set<std::string> stop = {"for"};
    auto scores = rake_scores({"deep learning", "bot detection"}, stop).phrase_scores;
    CHECK(scores.at("deep learning") == doctest::Approx(4.0));
    CHECK(scores.at("bot detection") == doctest::Approx(4.0));
    auto keywords = rake_keywords({"deep learning", "bot detection"}, stop);
    CHECK(keywords.count("deep learning") == 1);
    CHECK(keywords.count("bot detection") == 1);

    CHECK(rake_keywords({"the of and"}, default_stopwords()).empty());

    auto single = rake_scores({"checkout"}, default_stopwords()).phrase_scores;
    CHECK(single.at("checkout") == doctest::Approx(1.0));
    CHECK(rake_keywords({"checkout"}, default_stopwords()).count("checkout") == 1);
}

TEST_CASE("session topics come from page titles, missing titles skipped") {
    WTGraph g = build_graph(make_session({"product_sun_hat", "cart_page"}));
    std::map<std::string, std::string> titles = {{"product_sun_hat", "summer sun hat"}};
    auto topics = session_topics(g, titles, default_stopwords());
    CHECK(topics.count("summer sun hat") == 1);
    CHECK(topics.size() == 1);
}

TEST_CASE("graph json round trip") {
    Session s = make_session({"A", "B", "A", "C"});
    s.hits[0].label = Label::bot;
    WTGraph g = build_graph(s);
    WTGraph restored = graph_from_json(graph_to_json(g));
    CHECK(restored.session_id == g.session_id);
    CHECK(restored.entry_pagename == g.entry_pagename);
    REQUIRE(restored.node_count() == g.node_count());
    for (const auto& [name, label] : g.nodes) {
        CHECK(restored.nodes.at(name).hit_count == label.hit_count);
        CHECK(restored.nodes.at(name).benchmark_label == label.benchmark_label);
    }
    for (const auto& [edge, weight] : g.edges) CHECK(restored.edges.at(edge) == weight);
}
