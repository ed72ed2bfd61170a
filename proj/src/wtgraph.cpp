#include "botracle/wtgraph.hpp"

#include <deque>
#include <fstream>
#include <stdexcept>

#include "botracle/rake.hpp"
#include "botracle/sitemap.hpp"

namespace botracle {

std::int64_t WTGraph::total_hits() const {
    std::int64_t total = 0;
    for (const auto& [name, label] : nodes) total += label.hit_count;
    return total;
}

void update_graph(WTGraph& g, const HitRecord& hit) {
    const std::string sid = hit.session_id.value_or("");
    if (!g.session_id.empty() && sid != g.session_id)
        throw std::invalid_argument("hit session '" + sid + "' does not match graph session '" +
                                    g.session_id + "'");
    if (g.session_id.empty()) g.session_id = sid;
    if (g.nodes.empty()) g.entry_pagename = hit.pagename;

    auto [it, inserted] = g.nodes.try_emplace(hit.pagename);
    NodeLabel& node = it->second;
    if (inserted) {
        node.page_type = hit.page_type;
        node.first_visit_timestamp = hit.timestamp;
        node.benchmark_label = hit.label;
    }
    ++node.hit_count;

    // Navigation edge only when the referrer is already part of the session.
    if (hit.prev_pagename && g.nodes.count(*hit.prev_pagename))
        ++g.edges[{*hit.prev_pagename, hit.pagename}];
}

WTGraph build_graph(const Session& session) {
    if (session.hits.empty()) throw std::invalid_argument("cannot build graph of empty session");
    WTGraph g;
    g.session_id = session.session_id;
    for (const auto& hit : session.hits) update_graph(g, hit);
    return g;
}

const std::vector<int>& default_prefix_hit_counts() {
    static const std::vector<int> counts = {1,  2,  3,  4,  5,  6,  7,  8,  10,
                                            12, 14, 16, 20, 24, 28, 32, 40, 48};
    return counts;
}

std::vector<WTGraph> prefix_graphs(const Session& session, const std::vector<int>& hit_counts) {
    std::vector<WTGraph> snapshots;
    WTGraph g;
    std::size_t next = 0;
    for (std::size_t i = 0; i < session.hits.size(); ++i) {
        update_graph(g, session.hits[i]);
        while (next < hit_counts.size() &&
               hit_counts[next] == static_cast<int>(i + 1)) {
            if (i + 1 < session.hits.size()) {
                WTGraph snap = g;
                snap.session_id += "@" + std::to_string(i + 1);
                snapshots.push_back(std::move(snap));
            }
            ++next;
        }
    }
    return snapshots;
}

std::map<std::string, double> betweenness_centrality(const WTGraph& g) {
    // Index nodes and build adjacency without self-loops.
    std::vector<std::string> names;
    names.reserve(g.nodes.size());
    std::map<std::string, int> index;
    for (const auto& [name, label] : g.nodes) {
        index[name] = static_cast<int>(names.size());
        names.push_back(name);
    }
    const int n = static_cast<int>(names.size());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [edge, weight] : g.edges) {
        (void)weight;
        if (edge.first == edge.second) continue;
        adj[static_cast<std::size_t>(index[edge.first])].push_back(index[edge.second]);
    }

    std::vector<double> score(static_cast<std::size_t>(n), 0.0);
    // Brandes accumulation: one BFS per source on the unweighted digraph.
    for (int s = 0; s < n; ++s) {
        std::vector<int> order;
        std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
        std::vector<double> sigma(static_cast<std::size_t>(n), 0.0);
        std::vector<int> dist(static_cast<std::size_t>(n), -1);
        sigma[static_cast<std::size_t>(s)] = 1.0;
        dist[static_cast<std::size_t>(s)] = 0;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (dist[static_cast<std::size_t>(w)] < 0) {
                    dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                    queue.push_back(w);
                }
                if (dist[static_cast<std::size_t>(w)] == dist[static_cast<std::size_t>(v)] + 1) {
                    sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
                    preds[static_cast<std::size_t>(w)].push_back(v);
                }
            }
        }
        std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int w = *it;
            for (int v : preds[static_cast<std::size_t>(w)])
                delta[static_cast<std::size_t>(v)] +=
                    sigma[static_cast<std::size_t>(v)] / sigma[static_cast<std::size_t>(w)] *
                    (1.0 + delta[static_cast<std::size_t>(w)]);
            if (w != s) score[static_cast<std::size_t>(w)] += delta[static_cast<std::size_t>(w)];
        }
    }

    std::map<std::string, double> out;
    const double norm = n > 2 ? static_cast<double>(n - 1) * static_cast<double>(n - 2) : 0.0;
    for (int i = 0; i < n; ++i)
        out[names[static_cast<std::size_t>(i)]] =
            norm > 0 ? score[static_cast<std::size_t>(i)] / norm : 0.0;
    return out;
}

GraphMetrics compute_metrics(const WTGraph& g) {
    GraphMetrics m;
    m.node_count = g.node_count();
    m.edge_count = g.edge_count();
    m.number_of_hits = g.total_hits();

    for (const auto& [name, label] : g.nodes) {
        m.node_degree[name] = 0;
        m.hits_per_subpage[name] = label.hit_count;
        if (m.number_of_hits > 0)
            m.page_type_distribution[label.page_type] +=
                static_cast<double>(label.hit_count) / static_cast<double>(m.number_of_hits);
    }
    for (const auto& [edge, weight] : g.edges) {
        (void)weight;
        if (edge.first == edge.second) {
            m.node_degree[edge.first] += 1;  // refresh loop touches one node once
        } else {
            m.node_degree[edge.first] += 1;
            m.node_degree[edge.second] += 1;
        }
    }

    const double denom = m.node_count > 1 ? static_cast<double>(m.node_count - 1) : 0.0;
    for (const auto& [name, degree] : m.node_degree)
        m.degree_centrality[name] = denom > 0 ? static_cast<double>(degree) / denom : 0.0;

    m.betweenness_centrality = betweenness_centrality(g);

    std::map<std::string, std::string> titles;
    for (const auto& [name, label] : g.nodes) titles[name] = SiteMap::title_of(name);
    m.session_topics = session_topics(g, titles, default_stopwords());
    return m;
}

std::set<std::string> session_topics(const WTGraph& g,
                                     const std::map<std::string, std::string>& page_titles,
                                     const std::set<std::string>& stopwords) {
    std::vector<std::string> texts;
    for (const auto& [name, label] : g.nodes) {
        (void)label;
        auto it = page_titles.find(name);
        if (it != page_titles.end()) texts.push_back(it->second);
    }
    return rake_keywords(texts, stopwords, 1.0);
}

nlohmann::ordered_json graph_to_json(const WTGraph& g) {
    nlohmann::ordered_json j;
    j["session_id"] = g.session_id;
    j["entry_pagename"] = g.entry_pagename;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& [name, label] : g.nodes) {
        nodes.push_back({{"pagename", name},
                         {"page_type", to_string(label.page_type)},
                         {"first_visit_timestamp", label.first_visit_timestamp},
                         {"hit_count", label.hit_count},
                         {"benchmark_label", to_string(label.benchmark_label)}});
    }
    j["nodes"] = std::move(nodes);
    auto edges = nlohmann::ordered_json::array();
    for (const auto& [edge, weight] : g.edges)
        edges.push_back({{"from", edge.first}, {"to", edge.second}, {"weight", weight}});
    j["edges"] = std::move(edges);
    return j;
}

WTGraph graph_from_json(const nlohmann::json& j) {
    WTGraph g;
    g.session_id = j.at("session_id").get<std::string>();
    g.entry_pagename = j.at("entry_pagename").get<std::string>();
    for (const auto& nj : j.at("nodes")) {
        NodeLabel label;
        label.page_type = page_type_from_string(nj.at("page_type").get<std::string>());
        label.first_visit_timestamp = nj.at("first_visit_timestamp").get<std::int64_t>();
        label.hit_count = nj.at("hit_count").get<std::int64_t>();
        label.benchmark_label = label_from_string(nj.at("benchmark_label").get<std::string>());
        g.nodes[nj.at("pagename").get<std::string>()] = label;
    }
    for (const auto& ej : j.at("edges")) {
        const auto from = ej.at("from").get<std::string>();
        const auto to = ej.at("to").get<std::string>();
        if (!g.nodes.count(from) || !g.nodes.count(to))
            throw std::runtime_error("edge endpoint missing from node list");
        g.edges[{from, to}] = ej.at("weight").get<std::int64_t>();
    }
    return g;
}

void write_graphs_jsonl(const std::string& path, const std::vector<WTGraph>& graphs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (const auto& g : graphs) out << graph_to_json(g).dump() << '\n';
}

std::vector<WTGraph> read_graphs_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::vector<WTGraph> graphs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        graphs.push_back(graph_from_json(nlohmann::json::parse(line)));
    }
    return graphs;
}

}  // namespace botracle
