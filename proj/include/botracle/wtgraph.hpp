#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "botracle/hit.hpp"

namespace botracle {

struct NodeLabel {
    PageType page_type = PageType::other;
    std::int64_t first_visit_timestamp = 0;
    std::int64_t hit_count = 0;
    Label benchmark_label = Label::unknown;
};

/// Website traversal graph of one session: pages as nodes, navigations as
/// directed edges weighted by visit frequency. Self-loops model refreshes.
struct WTGraph {
    std::string session_id;
    std::string entry_pagename;
    std::map<std::string, NodeLabel> nodes;
    std::map<std::pair<std::string, std::string>, std::int64_t> edges;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t edge_count() const { return edges.size(); }
    std::int64_t total_hits() const;
};

WTGraph build_graph(const Session& session);

/// Incremental form: folding update_graph over a session's hits equals
/// build_graph of the whole session. Throws on session_id mismatch.
void update_graph(WTGraph& g, const HitRecord& hit);

/// Snapshots of the growing graph after hit_counts[i] hits (strict prefixes
/// only). Snapshot ids carry an "@<hits>" suffix. Classifiers that gate a
/// live stream see partial sessions, so they should train on these too.
std::vector<WTGraph> prefix_graphs(const Session& session, const std::vector<int>& hit_counts);

/// Snapshot sizes dense enough that the streaming classifier meets partial
/// graphs close to ones it trained on.
const std::vector<int>& default_prefix_hit_counts();

struct GraphMetrics {
    std::map<std::string, int> node_degree;  // in + out, self-loop counted once
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::map<PageType, double> page_type_distribution;  // hit-weighted, sums to 1
    std::set<std::string> session_topics;
    std::int64_t number_of_hits = 0;
    std::map<std::string, std::int64_t> hits_per_subpage;
    std::map<std::string, double> degree_centrality;       // degree / (n-1)
    std::map<std::string, double> betweenness_centrality;  // normalized by (n-1)(n-2)
};

/// Degree, centralities, page-type distribution and RAKE topics (titles
/// synthesized from pagenames). Betweenness runs over directed unit-length
/// edges; self-loops never join shortest paths.
GraphMetrics compute_metrics(const WTGraph& g);

/// RAKE keywords (score >= 1) over the titles of the graph's pages.
/// Pages missing from page_titles are skipped.
std::set<std::string> session_topics(const WTGraph& g,
                                     const std::map<std::string, std::string>& page_titles,
                                     const std::set<std::string>& stopwords);

/// Brandes-style betweenness on the directed graph, unnormalized pair counts
/// divided by (n-1)(n-2) for n > 2.
std::map<std::string, double> betweenness_centrality(const WTGraph& g);

nlohmann::ordered_json graph_to_json(const WTGraph& g);
WTGraph graph_from_json(const nlohmann::json& j);

void write_graphs_jsonl(const std::string& path, const std::vector<WTGraph>& graphs);
std::vector<WTGraph> read_graphs_jsonl(const std::string& path);

}  // namespace botracle
