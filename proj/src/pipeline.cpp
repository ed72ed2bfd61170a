#include "botracle/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace botracle {

void PipelineConfig::validate() const {
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must lie in [0, 1]");
    if (max_session_hits < 1) throw std::invalid_argument("max_session_hits must be >= 1");
    if (dgcnn_recheck_stride < 1) throw std::invalid_argument("dgcnn_recheck_stride must be >= 1");
    labeling.validate();
}

std::string to_string(Decision d) {
    switch (d) {
        case Decision::bot: return "bot";
        case Decision::human: return "human";
        case Decision::undecided: return "undecided";
    }
    return "undecided";
}

std::string to_string(Stage s) {
    switch (s) {
        case Stage::heuristic: return "heuristic";
        case Stage::sgan: return "sgan";
        case Stage::dgcnn: return "dgcnn";
        case Stage::forced: return "forced";
    }
    return "heuristic";
}

Detector::Detector(const SganModel& sgan, const DgcnnModel& dgcnn, PipelineConfig config)
    : sgan_(sgan), dgcnn_(dgcnn), config_(std::move(config)) {
    config_.validate();
    if (!sgan_.encoder())
        throw std::invalid_argument("sgan model has no bound feature encoder");
    if (static_cast<int>(sgan_.encoder()->total_width()) != sgan_.feature_width())
        throw std::invalid_argument("sgan encoder width does not match model width");
}

std::string Detector::resolve_session_key(const HitRecord& hit) {
    if (hit.session_id && !hit.session_id->empty()) return *hit.session_id;
    // Keyless traffic falls back to (ip, agent); idle gaps roll the session over.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : hit.user_agent) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return hit.ip + "|" + std::string(buf, 8);
}

Verdict Detector::decide(SessionState& state, Verdict verdict) {
    state.open = false;
    // The stream-level record identifies the session; the caller still gets
    // the hit-scoped subject it asked about.
    Verdict session_verdict = verdict;
    session_verdict.subject = state.session_id;
    state.verdict = session_verdict;
    session_verdicts_.push_back(session_verdict);
    switch (verdict.stage) {
        case Stage::heuristic: ++counts_.heuristic; break;
        case Stage::sgan: ++counts_.sgan; break;
        case Stage::dgcnn: ++counts_.dgcnn; break;
        case Stage::forced: ++counts_.forced; break;
    }
    return verdict;
}

double Detector::dgcnn_p_bot(const SessionState& state) const {
    return dgcnn_.classify_graph(state.graph);
}

Verdict Detector::process_hit(const HitRecord& hit) {
    // Malformed hits never advance a session.
    if (hit.pagename.empty() || hit.timestamp <= 0) {
        Verdict v;
        v.subject = hit.session_id.value_or("") + "#anomaly";
        v.decision = Decision::undecided;
        v.stage = Stage::heuristic;
        v.timestamp = hit.timestamp;
        v.anomaly = true;
        return v;
    }

    const std::string key = resolve_session_key(hit);
    auto it = sessions_.find(key);
    if (it == sessions_.end()) {
        SessionState st;
        st.session_id = key;
        it = sessions_.emplace(key, std::move(st)).first;
    } else if (!hit.session_id && !it->second.timestamps.empty() &&
               static_cast<double>(hit.timestamp - it->second.timestamps.back()) / 1000.0 >
                   config_.idle_timeout_s) {
        // Idle rollover for keyless traffic: force-close the stale session
        // and start a new segment under the same key.
        SessionState& stale = it->second;
        if (stale.open) {
            const double p_bot = dgcnn_p_bot(stale);
            Verdict v;
            v.subject = stale.session_id;
            v.decision = p_bot >= 0.5 ? Decision::bot : Decision::human;
            v.probability = p_bot >= 0.5 ? p_bot : 1.0 - p_bot;
            v.stage = Stage::forced;
            v.timestamp = stale.timestamps.back();
            decide(stale, v);
        }
        SessionState fresh;
        fresh.segment = stale.segment + 1;
        fresh.session_id = key + "#" + std::to_string(fresh.segment);
        it->second = std::move(fresh);
    }
    SessionState& state = it->second;

    if (!state.open) {
        // Classified clients stay classified; report the standing verdict.
        Verdict v = state.verdict;
        v.timestamp = hit.timestamp;
        return v;
    }

    HitRecord tracked = hit;
    tracked.session_id = state.session_id;
    update_graph(state.graph, tracked);
    state.timestamps.push_back(tracked.timestamp);
    const int n_hits = static_cast<int>(state.timestamps.size());
    const std::string hit_id = state.session_id + "#" + std::to_string(n_hits);

    // Stage 1: heuristics (session timing state included).
    bool flagged = heuristic_forged_ua(tracked, config_.labeling) == HeuristicResult::bot ||
                   heuristic_window_size(tracked, config_.labeling) == HeuristicResult::bot;
    if (!flagged) {
        Session view;
        view.session_id = state.session_id;
        view.hits.resize(state.timestamps.size());
        for (std::size_t i = 0; i < state.timestamps.size(); ++i)
            view.hits[i].timestamp = state.timestamps[i];
        flagged = heuristic_interval_similarity(view, config_.labeling) == HeuristicResult::bot;
    }
    if (flagged) {
        Verdict v;
        v.subject = hit_id;
        v.decision = Decision::bot;
        v.probability = 1.0;
        v.stage = Stage::heuristic;
        v.timestamp = tracked.timestamp;
        return decide(state, v);
    }

    // Stage 2: per-hit classifier.
    const FeatureVector fv = sgan_.encoder()->encode(tracked);
    const auto [p_bot, p_human] = sgan_.classify(fv);
    if (std::max(p_bot, p_human) >= config_.lambda) {
        Verdict v;
        v.subject = hit_id;
        v.decision = p_bot >= p_human ? Decision::bot : Decision::human;
        v.probability = std::max(p_bot, p_human);
        v.stage = Stage::sgan;
        v.timestamp = tracked.timestamp;
        return decide(state, v);
    }

    // Stage 3: session graph classifier.
    const bool recheck = n_hits % config_.dgcnn_recheck_stride == 0 ||
                         n_hits >= config_.max_session_hits;
    double graph_p_bot = 0.5;
    if (recheck) {
        graph_p_bot = dgcnn_p_bot(state);
        const double confidence = std::max(graph_p_bot, 1.0 - graph_p_bot);
        if (confidence >= config_.lambda) {
            Verdict v;
            v.subject = state.session_id;
            v.decision = graph_p_bot >= 0.5 ? Decision::bot : Decision::human;
            v.probability = confidence;
            v.stage = Stage::dgcnn;
            v.timestamp = tracked.timestamp;
            return decide(state, v);
        }
        if (n_hits >= config_.max_session_hits) {
            Verdict v;
            v.subject = state.session_id;
            v.decision = graph_p_bot >= 0.5 ? Decision::bot : Decision::human;
            v.probability = std::max(graph_p_bot, 1.0 - graph_p_bot);
            v.stage = Stage::forced;
            v.timestamp = tracked.timestamp;
            return decide(state, v);
        }
    }

    Verdict v;
    v.subject = hit_id;
    v.decision = Decision::undecided;
    v.probability = std::max(graph_p_bot, 1.0 - graph_p_bot);
    v.stage = Stage::dgcnn;
    v.timestamp = tracked.timestamp;
    return v;
}

std::vector<Verdict> Detector::finalize() {
    std::vector<Verdict> forced;
    for (auto& [key, state] : sessions_) {
        (void)key;
        if (!state.open) continue;
        const double p_bot = dgcnn_p_bot(state);
        Verdict v;
        v.subject = state.session_id;
        v.decision = p_bot >= 0.5 ? Decision::bot : Decision::human;
        v.probability = p_bot >= 0.5 ? p_bot : 1.0 - p_bot;
        v.stage = Stage::forced;
        v.timestamp = state.timestamps.empty() ? 0 : state.timestamps.back();
        decide(state, v);
        forced.push_back(v);
    }
    sessions_.clear();
    return forced;
}

std::size_t Detector::open_sessions() const {
    std::size_t n = 0;
    for (const auto& [key, state] : sessions_) {
        (void)key;
        if (state.open) ++n;
    }
    return n;
}

StreamResult run_stream(const std::vector<HitRecord>& hits, const SganModel& sgan,
                        const DgcnnModel& dgcnn, const PipelineConfig& config) {
    Detector detector(sgan, dgcnn, config);
    for (const auto& hit : hits) detector.process_hit(hit);
    detector.finalize();
    StreamResult result;
    result.session_verdicts = detector.session_verdicts();
    result.counts = detector.stage_counts();
    return result;
}

nlohmann::ordered_json verdict_to_json(const Verdict& v) {
    nlohmann::ordered_json j;
    j["subject"] = v.subject;
    j["decision"] = to_string(v.decision);
    j["probability"] = v.probability;
    j["stage"] = to_string(v.stage);
    j["timestamp"] = v.timestamp;
    if (v.anomaly) j["anomaly"] = true;
    return j;
}

Verdict verdict_from_json(const nlohmann::json& j) {
    Verdict v;
    v.subject = j.at("subject").get<std::string>();
    const std::string d = j.at("decision").get<std::string>();
    v.decision = d == "bot" ? Decision::bot : d == "human" ? Decision::human : Decision::undecided;
    v.probability = j.at("probability").get<double>();
    const std::string s = j.at("stage").get<std::string>();
    v.stage = s == "sgan" ? Stage::sgan
            : s == "dgcnn" ? Stage::dgcnn
            : s == "forced" ? Stage::forced
                            : Stage::heuristic;
    v.timestamp = j.at("timestamp").get<std::int64_t>();
    v.anomaly = j.value("anomaly", false);
    return v;
}

void write_verdicts_jsonl(const std::string& path, const std::vector<Verdict>& verdicts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (const auto& v : verdicts) out << verdict_to_json(v).dump() << '\n';
}

std::vector<Verdict> read_verdicts_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open verdict file: " + path);
    std::vector<Verdict> verdicts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        verdicts.push_back(verdict_from_json(nlohmann::json::parse(line)));
    }
    return verdicts;
}

}  // namespace botracle
