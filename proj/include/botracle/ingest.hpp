#pragma once

#include <istream>
#include <string>
#include <vector>

#include "botracle/hit.hpp"

namespace botracle {

enum class HitFormat { jsonl, csv };

struct ParseResult {
    std::vector<HitRecord> hits;
    std::size_t skipped = 0;                 // malformed lines dropped
    std::vector<std::string> diagnostics;    // first few skip reasons with line numbers
};

/// Parses a hit stream. Malformed lines are skipped and counted; if more than
/// half of the non-empty lines are malformed the whole source is rejected.
ParseResult parse_hits(std::istream& source, HitFormat format);
ParseResult parse_hits_file(const std::string& path, HitFormat format);

/// Groups hits into sessions. Hits with an explicit session_id group by it;
/// the rest key on (ip, user_agent) and split when the gap between
/// consecutive hits exceeds idle_timeout_s. Hits within a session are sorted
/// by timestamp (stable on ties); sessions are returned in session_id order.
std::vector<Session> sessionize(const std::vector<HitRecord>& hits,
                                double idle_timeout_s = 1800.0);

void write_hits_jsonl(const std::string& path, const std::vector<HitRecord>& hits);
void write_sessions_jsonl(const std::string& path, const std::vector<Session>& sessions);
std::vector<Session> read_sessions_jsonl(const std::string& path);

}  // namespace botracle
