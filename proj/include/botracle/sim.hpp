#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "botracle/hit.hpp"
#include "botracle/sitemap.hpp"

namespace botracle {

enum class ActorKind { human, scraper_bot, monitor_bot, scalper_bot, stealth_bot };
enum class TraversalModel { targeted_walk, breadth_exhaustive, single_page_repeat, purchase_rush };

std::string to_string(ActorKind k);
ActorKind actor_kind_from_string(const std::string& s);

/// Behavioral + technical parameters of one traffic family.
struct ActorProfile {
    ActorKind kind = ActorKind::human;
    std::string description;

    struct IntervalModel {
        double mean_s = 10.0;  // > 0
        double cv = 0.5;       // >= 0, coefficient of variation
        double pause_prob = 0.0;        // chance of a long think-pause per gap
        double min_prefix_cv = 0.0;     // resample until every >=4-gap prefix clears this
    } interval_model;

    struct AxisModel {
        double mean = 0.0;  // 0 = axis reported as unknown
        double stddev = 0.0;
        int min_px = 0;
        int max_px = 0;
    };
    struct WindowModel {
        AxisModel width;
        AxisModel height;
        double tiny_window_session_fraction = 0.0;  // sessions reporting a sub-50px axis
    } window_model;

    struct UaChoice {
        std::string agent;
        JavaEnabled java = JavaEnabled::unknown;
    };
    struct UaModel {
        std::vector<UaChoice> pool;  // one entry picked per session
        bool forged = false;         // claims a browser identity it does not have
    } ua_model;

    TraversalModel traversal_model = TraversalModel::targeted_walk;
    TraversalModel alt_traversal = TraversalModel::targeted_walk;
    double alt_traversal_prob = 0.0;

    struct SessionLengthModel {
        bool geometric = true;  // otherwise uniform in [lo, hi]
        double mean = 8.0;
        int lo = 1;
        int hi = 30;
    } session_length_model;

    int visit_num_lo = 1, visit_num_hi = 3;
    bool hourly_visitor = false;
    int purchase_lo = 0, purchase_hi = 0;
    double purchase_zero_prob = 0.0;  // chance the purchase count is forced to 0

    void validate() const;
};

/// Built-in presets, one per ActorKind.
const std::vector<ActorProfile>& describe_profiles();
const ActorProfile& profile_for(ActorKind kind);

struct CorpusSpec {
    std::uint64_t seed = 0;
    int n_sessions = 0;
    std::map<ActorKind, double> mix;  // fractions, must sum to 1
    SiteMap sitemap;                  // empty = default store
    double cloud_ip_fraction_for_bots = 0.7;
    double internal_account_fraction_for_humans = 0.1;

    void validate() const;
};

struct Corpus {
    std::vector<HitRecord> hits;                // global stream, time-ordered
    std::map<std::string, Label> truth;         // session_id -> human | bot
    std::map<std::string, ActorKind> kinds;     // session_id -> generating family
};

/// Deterministic: equal specs (seed included) give byte-identical output.
Corpus generate_corpus(const CorpusSpec& spec);

/// IPv4 ranges the simulator uses for cloud-hosted bot traffic. The default
/// labeling config lists exactly these.
const std::vector<std::string>& simulated_cloud_cidrs();

/// Account ids the simulator assigns to internal human sessions.
std::vector<std::string> simulated_internal_accounts();

void write_truth_csv(const std::string& path, const std::map<std::string, Label>& truth);
std::map<std::string, Label> read_truth_csv(const std::string& path);

}  // namespace botracle
