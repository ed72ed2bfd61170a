#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "botracle/dgcnn.hpp"
#include "botracle/groundtruth.hpp"
#include "botracle/sgan.hpp"

namespace botracle {

struct PipelineConfig {
    double lambda = 0.9;  // confidence threshold in [0, 1]
    LabelingConfig labeling = LabelingConfig::defaults();
    int max_session_hits = 200;   // forced decision beyond this
    int dgcnn_recheck_stride = 1; // graph re-evaluation cadence in hits
    double idle_timeout_s = 1800.0;

    void validate() const;
};

enum class Decision { bot, human, undecided };
enum class Stage { heuristic, sgan, dgcnn, forced };

std::string to_string(Decision d);
std::string to_string(Stage s);

struct Verdict {
    std::string subject;  // hit id or session id
    Decision decision = Decision::undecided;
    double probability = 0.0;  // probability of the decided class
    Stage stage = Stage::heuristic;
    std::int64_t timestamp = 0;
    bool anomaly = false;
};

struct StageCounts {
    std::size_t heuristic = 0;
    std::size_t sgan = 0;
    std::size_t dgcnn = 0;
    std::size_t forced = 0;

    std::size_t total() const { return heuristic + sgan + dgcnn + forced; }
};

struct StreamResult {
    std::vector<Verdict> session_verdicts;  // one per session, in decision order
    StageCounts counts;
};

/// Streaming cascade: heuristics, then the per-hit classifier, then the
/// session-graph classifier, each gated by lambda. Sessions stay open until
/// a stage clears the threshold, the hit cap forces a decision, or the
/// stream is finalized.
class Detector {
public:
    Detector(const SganModel& sgan, const DgcnnModel& dgcnn, PipelineConfig config);

    /// Advances the owning session with one hit and returns the verdict for
    /// that hit. A decided session's verdict decides every later hit of the
    /// session too.
    Verdict process_hit(const HitRecord& hit);

    /// Forced argmax verdicts for all still-open sessions; drains the store
    /// (idempotent: a second call returns nothing).
    std::vector<Verdict> finalize();

    const std::vector<Verdict>& session_verdicts() const { return session_verdicts_; }
    StageCounts stage_counts() const { return counts_; }
    std::size_t open_sessions() const;

private:
    struct SessionState {
        std::string session_id;
        WTGraph graph;
        std::vector<std::int64_t> timestamps;
        bool open = true;
        Verdict verdict;  // meaningful once closed
        int segment = 1;
    };

    std::string resolve_session_key(const HitRecord& hit);
    Verdict decide(SessionState& state, Verdict verdict);
    double dgcnn_p_bot(const SessionState& state) const;

    const SganModel& sgan_;
    const DgcnnModel& dgcnn_;
    PipelineConfig config_;
    std::map<std::string, SessionState> sessions_;
    std::vector<Verdict> session_verdicts_;
    StageCounts counts_;
};

/// Folds process_hit over the stream, then finalizes.
StreamResult run_stream(const std::vector<HitRecord>& hits, const SganModel& sgan,
                        const DgcnnModel& dgcnn, const PipelineConfig& config);

nlohmann::ordered_json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);
void write_verdicts_jsonl(const std::string& path, const std::vector<Verdict>& verdicts);
std::vector<Verdict> read_verdicts_jsonl(const std::string& path);

}  // namespace botracle
