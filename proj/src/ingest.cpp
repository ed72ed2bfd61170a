#include "botracle/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "botracle/csv.hpp"

namespace botracle {

namespace {

constexpr std::size_t kMaxDiagnostics = 10;

void note_skip(ParseResult& result, std::size_t lineno, const std::string& why) {
    ++result.skipped;
    if (result.diagnostics.size() < kMaxDiagnostics)
        result.diagnostics.push_back("line " + std::to_string(lineno) + ": " + why);
}

ParseResult parse_jsonl(std::istream& in) {
    ParseResult result;
    std::string line;
    std::size_t lineno = 0;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++seen;
        try {
            result.hits.push_back(hit_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            note_skip(result, lineno, e.what());
        }
    }
    if (seen > 0 && result.skipped * 2 > seen) {
        std::string msg = "more than half of " + std::to_string(seen) + " lines malformed";
        for (const auto& d : result.diagnostics) msg += "; " + d;
        throw std::runtime_error(msg);
    }
    return result;
}

ParseResult parse_csv(std::istream& in) {
    ParseResult result;
    std::vector<std::string> header;
    if (!csv::read_record(in, header)) return result;
    std::vector<std::string> row;
    std::size_t lineno = 1;
    std::size_t seen = 0;
    while (csv::read_record(in, row)) {
        ++lineno;
        if (row.size() == 1 && row[0].empty()) continue;
        ++seen;
        try {
            result.hits.push_back(hit_from_csv_row(header, row));
        } catch (const std::exception& e) {
            note_skip(result, lineno, e.what());
        }
    }
    if (seen > 0 && result.skipped * 2 > seen) {
        std::string msg = "more than half of " + std::to_string(seen) + " rows malformed";
        for (const auto& d : result.diagnostics) msg += "; " + d;
        throw std::runtime_error(msg);
    }
    return result;
}

// FNV-1a, for compact session keys from user-agent strings.
std::string short_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 8);
}

}  // namespace

ParseResult parse_hits(std::istream& source, HitFormat format) {
    if (!source) throw std::runtime_error("unreadable hit source");
    return format == HitFormat::jsonl ? parse_jsonl(source) : parse_csv(source);
}

ParseResult parse_hits_file(const std::string& path, HitFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return parse_hits(in, format);
}

std::vector<Session> sessionize(const std::vector<HitRecord>& hits, double idle_timeout_s) {
    // Stable sort preserves input order on equal timestamps per the contract.
    std::vector<const HitRecord*> ordered;
    ordered.reserve(hits.size());
    for (const auto& h : hits) ordered.push_back(&h);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const HitRecord* a, const HitRecord* b) { return a->timestamp < b->timestamp; });

    std::map<std::string, Session> by_id;
    struct KeyState {
        int segment = 0;
        std::int64_t last_ts = 0;
    };
    std::map<std::string, KeyState> key_state;

    for (const HitRecord* hit : ordered) {
        std::string sid;
        if (hit->session_id && !hit->session_id->empty()) {
            sid = *hit->session_id;
        } else {
            const std::string key = hit->ip + "|" + short_hash(hit->user_agent);
            auto& st = key_state[key];
            if (st.segment == 0) {
                st.segment = 1;
            } else if (static_cast<double>(hit->timestamp - st.last_ts) / 1000.0 > idle_timeout_s) {
                ++st.segment;
            }
            st.last_ts = hit->timestamp;
            sid = key + "#" + std::to_string(st.segment);
        }
        Session& s = by_id[sid];
        if (s.hits.empty()) s.session_id = sid;
        HitRecord copy = *hit;
        copy.session_id = sid;
        s.hits.push_back(std::move(copy));
    }

    std::vector<Session> out;
    out.reserve(by_id.size());
    for (auto& [sid, s] : by_id) out.push_back(std::move(s));
    return out;
}

void write_hits_jsonl(const std::string& path, const std::vector<HitRecord>& hits) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (const auto& h : hits) out << hit_to_json(h).dump() << '\n';
}

void write_sessions_jsonl(const std::string& path, const std::vector<Session>& sessions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (const auto& s : sessions) out << session_to_json(s).dump() << '\n';
}

std::vector<Session> read_sessions_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::vector<Session> sessions;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            sessions.push_back(session_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("bad session at line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return sessions;
}

}  // namespace botracle
