// botracle - multi-stage web bot detection toolkit
//
// Subcommands cover the full flow: simulate traffic, ingest and sessionize
// hits, label them, train the two classifiers, run the detection cascade and
// evaluate the results. Every run echoes its resolved settings (seed
// included) to <output>.run.json so results can be reproduced exactly.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "botracle/analysis.hpp"
#include "botracle/csv.hpp"
#include "botracle/dgcnn.hpp"
#include "botracle/encoding.hpp"
#include "botracle/groundtruth.hpp"
#include "botracle/ingest.hpp"
#include "botracle/kvconfig.hpp"
#include "botracle/pipeline.hpp"
#include "botracle/sgan.hpp"
#include "botracle/sim.hpp"
#include "botracle/wtgraph.hpp"

namespace {

using namespace botracle;

std::uint64_t env_seed_or(std::uint64_t fallback) {
    if (const char* env = std::getenv("BOTRACLE_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw std::runtime_error("BOTRACLE_SEED is not an integer: " + std::string(env));
        }
    }
    return fallback;
}

void write_sidecar(const std::string& out_path, const nlohmann::ordered_json& resolved) {
    std::ofstream out(out_path + ".run.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write sidecar for " + out_path);
    out << resolved.dump(2) << '\n';
}

void log_line(const std::string& msg) { std::cerr << "[botracle] " << msg << '\n'; }

LabelingConfig load_labeling_config(const std::string& path) {
    LabelingConfig cfg = LabelingConfig::defaults();
    if (path.empty()) return cfg;
    KvConfig kv = KvConfig::parse_file(path);

    if (kv.has("internal_accounts")) {
        cfg.internal_accounts.clear();
        for (const auto& id : kv.get_list("internal_accounts")) cfg.internal_accounts.insert(id);
    }
    if (kv.has("cloud_cidrs")) {
        cfg.cloud_cidrs.clear();
        for (const auto& c : kv.get_list("cloud_cidrs")) cfg.cloud_cidrs.push_back(Cidr::parse(c));
    }
    if (kv.has("cloud_cidrs_file")) {
        cfg.cloud_cidrs.clear();
        std::ifstream in(kv.get_string("cloud_cidrs_file"));
        if (!in)
            throw std::runtime_error("cannot open cloud CIDR file: " +
                                     kv.get_string("cloud_cidrs_file"));
        std::string line;
        while (std::getline(in, line)) {
            const auto a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos || line[a] == '#') continue;
            const auto b = line.find_last_not_of(" \t\r");
            cfg.cloud_cidrs.push_back(Cidr::parse(line.substr(a, b - a + 1)));
        }
    }
    if (kv.has("automation_ua_substrings"))
        cfg.automation_ua_substrings = kv.get_list("automation_ua_substrings");
    cfg.min_hits_for_interval_test =
        static_cast<int>(kv.get_int("min_hits_for_interval_test", cfg.min_hits_for_interval_test));
    cfg.interval_cv_threshold = kv.get_double("interval_cv_threshold", cfg.interval_cv_threshold);
    cfg.min_window_axis_px =
        static_cast<int>(kv.get_int("min_window_axis_px", cfg.min_window_axis_px));

    const auto caps = kv.section("ua_capability");
    if (!caps.empty()) {
        cfg.ua_capability_table.clear();
        for (const auto& [family, values] : caps) {
            std::set<JavaEnabled> allowed;
            std::istringstream in(values);
            std::string item;
            while (std::getline(in, item, ','))
                if (const auto t = item.find_first_not_of(" \t"); t != std::string::npos)
                    allowed.insert(java_enabled_from_string(item.substr(t, 1)));
            cfg.ua_capability_table[family] = allowed;
        }
    }
    cfg.validate();
    return cfg;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_path,
                 const std::string& truth_path, std::int64_t seed_flag) {
    KvConfig kv = KvConfig::parse_file(spec_path);
    CorpusSpec spec;
    spec.seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                               : env_seed_or(static_cast<std::uint64_t>(kv.get_int("seed", 1)));
    spec.n_sessions = static_cast<int>(kv.get_int("n_sessions", 100));
    spec.cloud_ip_fraction_for_bots = kv.get_double("cloud_ip_fraction_for_bots", 0.7);
    spec.internal_account_fraction_for_humans =
        kv.get_double("internal_account_fraction_for_humans", 0.1);
    for (const auto& [kind, frac] : kv.section("mix"))
        spec.mix[actor_kind_from_string(kind)] = std::stod(frac);
    if (spec.mix.empty()) spec.mix = {{ActorKind::human, 0.5}, {ActorKind::scraper_bot, 0.5}};

    Corpus corpus = generate_corpus(spec);
    write_hits_jsonl(out_path, corpus.hits);
    write_truth_csv(truth_path, corpus.truth);

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "simulate";
    resolved["seed"] = spec.seed;
    resolved["n_sessions"] = spec.n_sessions;
    resolved["cloud_ip_fraction_for_bots"] = spec.cloud_ip_fraction_for_bots;
    resolved["internal_account_fraction_for_humans"] = spec.internal_account_fraction_for_humans;
    for (const auto& [kind, frac] : spec.mix) resolved["mix"][to_string(kind)] = frac;
    resolved["out"] = out_path;
    resolved["truth"] = truth_path;
    write_sidecar(out_path, resolved);
    log_line("simulated " + std::to_string(corpus.hits.size()) + " hits over " +
             std::to_string(corpus.truth.size()) + " sessions (seed " +
             std::to_string(spec.seed) + ")");
    return 0;
}

int cmd_ingest(const std::string& in_path, const std::string& format, const std::string& out_path,
               double idle_timeout) {
    const HitFormat fmt = format == "csv" ? HitFormat::csv : HitFormat::jsonl;
    ParseResult parsed = parse_hits_file(in_path, fmt);
    if (parsed.skipped > 0)
        log_line("skipped " + std::to_string(parsed.skipped) + " malformed lines");
    auto sessions = sessionize(parsed.hits, idle_timeout);
    write_sessions_jsonl(out_path, sessions);

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "ingest";
    resolved["in"] = in_path;
    resolved["format"] = format;
    resolved["idle_timeout_s"] = idle_timeout;
    resolved["hits"] = parsed.hits.size();
    resolved["skipped"] = parsed.skipped;
    resolved["sessions"] = sessions.size();
    write_sidecar(out_path, resolved);
    log_line("wrote " + std::to_string(sessions.size()) + " sessions");
    return 0;
}

int cmd_label(const std::string& in_path, const std::string& config_path,
              const std::string& out_path, const std::string& report_path) {
    LabelingConfig cfg = load_labeling_config(config_path);
    auto sessions = read_sessions_jsonl(in_path);

    std::size_t anomalies = 0;
    for (auto& s : sessions) {
        std::size_t a = 0;
        s.hits = label_by_assumptions(s.hits, cfg, &a);
        anomalies += a;
        // assumption labels are per session: any human hit wins, then any bot
        bool human = false, bot = false;
        for (const auto& h : s.hits) {
            human |= h.label == Label::human;
            bot |= h.label == Label::bot;
        }
        const Label session_label = human ? Label::human : bot ? Label::bot : Label::unknown;
        for (auto& h : s.hits) h.label = session_label;
    }

    auto [labeled, report] = apply_heuristics(sessions, cfg);
    report.anomalies = anomalies;
    write_sessions_jsonl(out_path, labeled);

    nlohmann::ordered_json jr;
    jr["hits_before"] = {{"bot", report.bot_before},
                         {"human", report.human_before},
                         {"unknown", report.unknown_before}};
    jr["hits_after"] = {{"bot", report.bot_after()},
                        {"human", report.human_after()},
                        {"unknown", report.unknown_after()}};
    jr["promoted_by_heuristics"] = report.promoted;
    jr["conflicts"] = report.conflicts;
    jr["anomalous_ips"] = report.anomalies;
    jr["recall_against_humans"] = report.recall_against_humans();
    std::ofstream rout(report_path, std::ios::binary);
    if (!rout) throw std::runtime_error("cannot write report: " + report_path);
    rout << jr.dump(2) << '\n';

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "label";
    resolved["in"] = in_path;
    resolved["config"] = config_path.empty() ? "<defaults>" : config_path;
    resolved["report"] = report_path;
    write_sidecar(out_path, resolved);
    log_line("labels: bot " + std::to_string(report.bot_after()) + ", human " +
             std::to_string(report.human_after()) + ", unknown " +
             std::to_string(report.unknown_after()));
    return 0;
}

int cmd_train_sgan(const std::string& in_path, const std::string& config_path,
                   const std::string& out_path, std::int64_t seed_flag) {
    KvConfig kv = config_path.empty() ? KvConfig{} : KvConfig::parse_file(config_path);
    SganConfig cfg;
    cfg.batch_size = static_cast<int>(kv.get_int("batch_size", cfg.batch_size));
    cfg.epochs = static_cast<int>(kv.get_int("epochs", cfg.epochs));
    cfg.seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                              : env_seed_or(static_cast<std::uint64_t>(kv.get_int("seed", 1)));
    const double rare_threshold = kv.get_double("rare_threshold", 0.001);

    auto sessions = read_sessions_jsonl(in_path);
    std::vector<HitRecord> all_hits;
    for (const auto& s : sessions)
        all_hits.insert(all_hits.end(), s.hits.begin(), s.hits.end());
    if (all_hits.empty()) throw std::runtime_error("no hits in " + in_path);

    FeatureEncoder encoder = FeatureEncoder::fit(all_hits, rare_threshold);
    std::vector<FeatureVector> labeled, unlabeled;
    for (const auto& h : all_hits) {
        FeatureVector v = encoder.encode(h);
        if (v.label == Label::unknown) unlabeled.push_back(std::move(v));
        else labeled.push_back(std::move(v));
    }
    log_line("training sgan on " + std::to_string(labeled.size()) + " labeled / " +
             std::to_string(unlabeled.size()) + " unlabeled hits, width " +
             std::to_string(encoder.total_width()));

    SganModel model = SganModel::build(cfg, static_cast<int>(encoder.total_width()), cfg.seed);
    model.train(labeled, unlabeled);
    model.bind_encoder(std::move(encoder));
    model.save(out_path);

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "train-sgan";
    resolved["in"] = in_path;
    resolved["seed"] = cfg.seed;
    resolved["batch_size"] = cfg.batch_size;
    resolved["epochs"] = cfg.epochs;
    resolved["rare_threshold"] = rare_threshold;
    write_sidecar(out_path, resolved);
    if (!model.history().classifier_loss.empty())
        log_line("final losses: L_C " + std::to_string(model.history().classifier_loss.back()) +
                 ", L_D " + std::to_string(model.history().discriminator_loss.back()) +
                 ", L_G " + std::to_string(model.history().generator_loss.back()));
    return 0;
}

int cmd_graphs(const std::string& in_path, const std::string& out_path,
               const std::string& metrics_path, bool prefixes) {
    auto sessions = read_sessions_jsonl(in_path);
    std::vector<WTGraph> graphs;
    graphs.reserve(sessions.size());
    std::size_t snapshot_count = 0;
    for (const auto& s : sessions) {
        if (s.hits.empty()) continue;
        graphs.push_back(build_graph(s));
        if (prefixes && s.hits.front().label != Label::unknown) {
            // partial-session snapshots calibrate a streaming classifier
            auto snaps = prefix_graphs(s, default_prefix_hit_counts());
            snapshot_count += snaps.size();
            for (auto& snap : snaps) graphs.push_back(std::move(snap));
        }
    }
    if (prefixes) log_line("added " + std::to_string(snapshot_count) + " prefix snapshots");
    write_graphs_jsonl(out_path, graphs);

    if (!metrics_path.empty()) {
        std::ofstream mout(metrics_path, std::ios::binary);
        if (!mout) throw std::runtime_error("cannot write metrics: " + metrics_path);
        csv::write_record(mout, {"session_id", "node_count", "edge_count", "number_of_hits",
                                 "mean_degree_centrality", "max_betweenness_centrality",
                                 "session_topics"});
        for (const auto& g : graphs) {
            GraphMetrics m = compute_metrics(g);
            double dc_sum = 0.0;
            for (const auto& [node, dc] : m.degree_centrality) dc_sum += dc;
            double bc_max = 0.0;
            for (const auto& [node, bc] : m.betweenness_centrality)
                bc_max = std::max(bc_max, bc);
            std::string topics;
            for (const auto& t : m.session_topics) {
                if (!topics.empty()) topics += ';';
                topics += t;
            }
            csv::write_record(
                mout,
                {g.session_id, std::to_string(m.node_count), std::to_string(m.edge_count),
                 std::to_string(m.number_of_hits),
                 std::to_string(m.node_count ? dc_sum / static_cast<double>(m.node_count) : 0.0),
                 std::to_string(bc_max), topics});
        }
    }

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "graphs";
    resolved["in"] = in_path;
    resolved["prefixes"] = prefixes;
    resolved["graphs"] = graphs.size();
    if (!metrics_path.empty()) resolved["metrics"] = metrics_path;
    write_sidecar(out_path, resolved);
    log_line("built " + std::to_string(graphs.size()) + " traversal graphs");
    return 0;
}

int cmd_train_dgcnn(const std::string& in_path, const std::string& config_path,
                    const std::string& out_path, std::int64_t seed_flag) {
    KvConfig kv = config_path.empty() ? KvConfig{} : KvConfig::parse_file(config_path);
    DgcnnConfig cfg;
    cfg.batch_size = static_cast<int>(kv.get_int("batch_size", cfg.batch_size));
    cfg.epochs = static_cast<int>(kv.get_int("epochs", cfg.epochs));
    cfg.sort_pool_k = static_cast<int>(kv.get_int("sort_pool_k", cfg.sort_pool_k));
    cfg.seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                              : env_seed_or(static_cast<std::uint64_t>(kv.get_int("seed", 1)));

    auto graphs = read_graphs_jsonl(in_path);
    GraphFeaturizer featurizer = GraphFeaturizer::standard();
    std::vector<GraphTensor> tensors;
    for (const auto& g : graphs) {
        GraphTensor t = featurizer.featurize(g);
        if (t.label >= 0) tensors.push_back(std::move(t));
    }
    log_line("training dgcnn on " + std::to_string(tensors.size()) + " labeled graphs of " +
             std::to_string(graphs.size()));

    DgcnnModel model = DgcnnModel::build(cfg, featurizer, cfg.seed);
    model.train(tensors);
    model.save(out_path);

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "train-dgcnn";
    resolved["in"] = in_path;
    resolved["seed"] = cfg.seed;
    resolved["batch_size"] = cfg.batch_size;
    resolved["epochs"] = cfg.epochs;
    resolved["sort_pool_k"] = cfg.sort_pool_k;
    write_sidecar(out_path, resolved);
    if (!model.history().loss.empty())
        log_line("final loss " + std::to_string(model.history().loss.back()));
    return 0;
}

int cmd_detect(const std::string& in_path, const std::string& sgan_path,
               const std::string& dgcnn_path, double lambda, const std::string& out_path,
               const std::string& labeling_path, int max_session_hits, int stride) {
    SganModel sgan = SganModel::load(sgan_path);
    DgcnnModel dgcnn = DgcnnModel::load(dgcnn_path);
    PipelineConfig cfg;
    cfg.lambda = lambda;
    cfg.labeling = load_labeling_config(labeling_path);
    cfg.max_session_hits = max_session_hits;
    cfg.dgcnn_recheck_stride = stride;

    ParseResult parsed = parse_hits_file(in_path, HitFormat::jsonl);
    StreamResult result = run_stream(parsed.hits, sgan, dgcnn, cfg);
    write_verdicts_jsonl(out_path, result.session_verdicts);

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "detect";
    resolved["in"] = in_path;
    resolved["sgan"] = sgan_path;
    resolved["dgcnn"] = dgcnn_path;
    resolved["lambda"] = lambda;
    resolved["max_session_hits"] = max_session_hits;
    resolved["dgcnn_recheck_stride"] = stride;
    resolved["decided"] = {{"heuristic", result.counts.heuristic},
                           {"sgan", result.counts.sgan},
                           {"dgcnn", result.counts.dgcnn},
                           {"forced", result.counts.forced}};
    write_sidecar(out_path, resolved);
    log_line("verdicts: heuristic " + std::to_string(result.counts.heuristic) + ", sgan " +
             std::to_string(result.counts.sgan) + ", dgcnn " +
             std::to_string(result.counts.dgcnn) + ", forced " +
             std::to_string(result.counts.forced));
    return 0;
}

int cmd_evaluate(const std::string& verdicts_path, const std::string& truth_path,
                 const std::string& out_path) {
    auto verdicts = read_verdicts_jsonl(verdicts_path);
    auto truth = read_truth_csv(truth_path);

    std::vector<Prediction> predictions;
    std::size_t missing = 0;
    for (const auto& v : verdicts) {
        auto it = truth.find(v.subject);
        if (it == truth.end()) {
            ++missing;
            continue;
        }
        Prediction p;
        p.subject = v.subject;
        p.p_bot = v.decision == Decision::bot ? v.probability : 1.0 - v.probability;
        p.truth_bot = it->second == Label::bot;
        predictions.push_back(std::move(p));
    }
    if (predictions.empty()) throw std::runtime_error("no verdicts matched the truth table");
    if (missing > 0)
        log_line("warning: " + std::to_string(missing) + " verdicts missing from truth table");

    MetricReport report = score(predictions);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + out_path);
    out << report.to_json().dump(2) << '\n';

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "evaluate";
    resolved["verdicts"] = verdicts_path;
    resolved["truth"] = truth_path;
    resolved["sessions_scored"] = predictions.size();
    write_sidecar(out_path, resolved);
    log_line("accuracy " + std::to_string(report.accuracy.value_or(0)) + ", f1 " +
             std::to_string(report.f1.value_or(0)) + ", auroc " +
             std::to_string(report.auroc.value_or(0)));
    return 0;
}

int cmd_importance(const std::string& model_path, const std::string& data_path, int k,
                   const std::string& out_path, std::int64_t seed_flag) {
    SganModel model = SganModel::load(model_path);
    if (!model.encoder()) throw std::runtime_error("model has no bound encoder");
    const std::uint64_t seed =
        seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : env_seed_or(1);

    auto sessions = read_sessions_jsonl(data_path);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (const auto& s : sessions) {
        for (const auto& h : s.hits) {
            if (h.label == Label::unknown) continue;
            FeatureVector v = model.encoder()->encode(h);
            rows.push_back(std::move(v.values));
            y.push_back(h.label == Label::bot ? 1.0 : 0.0);
        }
    }
    if (rows.size() < 2) throw std::runtime_error("need at least 2 labeled hits");

    nn::Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];

    const auto predict = [&](const nn::Matrix& data) {
        std::vector<double> out(static_cast<std::size_t>(data.rows()));
        for (Eigen::Index r = 0; r < data.rows(); ++r)
            out[static_cast<std::size_t>(r)] = model.classify_values(data.row(r).transpose()).first;
        return out;
    };

    const auto& names = model.encoder()->feature_names();
    auto r2_rows = permutation_importance(predict, x, y, names, k, Scoring::r2, seed);
    auto mse_rows = permutation_importance(predict, x, y, names, k, Scoring::negative_mse, seed);
    std::map<std::string, ImportanceRow> mse_by_name;
    for (const auto& row : mse_rows) mse_by_name[row.feature] = row;

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write importance csv: " + out_path);
    csv::write_record(out, {"feature", "r2_mean", "r2_std", "negative_mse_mean",
                            "negative_mse_std"});
    for (const auto& row : r2_rows) {
        const auto& mse = mse_by_name[row.feature];
        csv::write_record(out, {row.feature, std::to_string(row.mean_importance),
                                std::to_string(row.stddev), std::to_string(mse.mean_importance),
                                std::to_string(mse.stddev)});
    }

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "importance";
    resolved["model"] = model_path;
    resolved["data"] = data_path;
    resolved["k"] = k;
    resolved["seed"] = seed;
    resolved["rows"] = rows.size();
    write_sidecar(out_path, resolved);
    log_line("ranked " + std::to_string(names.size()) + " features over " +
             std::to_string(rows.size()) + " hits");
    return 0;
}

int cmd_size_study(const std::string& model_path, const std::string& graphs_path,
                   const std::string& truth_path, const std::string& out_path, int max_nodes) {
    DgcnnModel model = DgcnnModel::load(model_path);
    auto graphs = read_graphs_jsonl(graphs_path);
    std::map<std::string, Label> truth;
    if (!truth_path.empty()) truth = read_truth_csv(truth_path);

    std::vector<std::tuple<int, double, bool>> samples;
    for (const auto& g : graphs) {
        Label label = Label::unknown;
        if (!truth.empty()) {
            auto it = truth.find(g.session_id);
            if (it != truth.end()) label = it->second;
        } else if (!g.nodes.empty()) {
            label = g.nodes.begin()->second.benchmark_label;
        }
        if (label == Label::unknown) continue;
        samples.emplace_back(static_cast<int>(g.node_count()), model.classify_graph(g),
                             label == Label::bot);
    }
    if (samples.empty()) throw std::runtime_error("no labeled graphs to study");

    auto buckets = graph_size_study(samples, max_nodes);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write size study csv: " + out_path);
    csv::write_record(out, {"nodes", "graphs", "accuracy", "recall", "precision", "f1", "auroc"});
    auto cell = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string{};
    };
    for (const auto& b : buckets) {
        csv::write_record(out, {std::to_string(b.nodes), std::to_string(b.count),
                                cell(b.metrics.accuracy), cell(b.metrics.recall),
                                cell(b.metrics.precision), cell(b.metrics.f1),
                                cell(b.metrics.auroc)});
    }

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = "size-study";
    resolved["model"] = model_path;
    resolved["graphs"] = graphs_path;
    if (!truth_path.empty()) resolved["truth"] = truth_path;
    resolved["max_nodes"] = max_nodes;
    resolved["samples"] = samples.size();
    write_sidecar(out_path, resolved);
    log_line("bucketed " + std::to_string(samples.size()) + " graphs by node count");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"botracle - multi-stage web bot detection"};
    app.require_subcommand(1);
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker parallelism cap (processing is currently serial)");

    std::string in, out, truth, spec, config, format = "jsonl", report, sgan_path, dgcnn_path,
                model_path, graphs_path, labeling_path, metrics_path;
    double lambda = 0.9, idle_timeout = 1800.0;
    bool prefixes = false;
    int k = 50, max_nodes = 10, max_session_hits = 200, stride = 1;
    std::int64_t seed = -1;

    auto* c_sim = app.add_subcommand("simulate", "generate a labeled synthetic corpus");
    c_sim->add_option("--spec", spec, "corpus spec file")->required()->check(CLI::ExistingFile);
    c_sim->add_option("--out", out, "hit stream output (jsonl)")->required();
    c_sim->add_option("--truth", truth, "truth table output (csv)")->required();
    c_sim->add_option("--seed", seed, "seed override");

    auto* c_ing = app.add_subcommand("ingest", "parse hits and group them into sessions");
    c_ing->add_option("--in", in)->required()->check(CLI::ExistingFile);
    c_ing->add_option("--format", format)->check(CLI::IsMember({"jsonl", "csv"}));
    c_ing->add_option("--out", out, "sessions output (jsonl)")->required();
    c_ing->add_option("--idle-timeout", idle_timeout, "session idle timeout in seconds");

    auto* c_lab = app.add_subcommand("label", "assumption labels plus heuristic refinement");
    c_lab->add_option("--in", in, "sessions jsonl")->required()->check(CLI::ExistingFile);
    c_lab->add_option("--config", config, "labeling config")->check(CLI::ExistingFile);
    c_lab->add_option("--out", out, "labeled sessions output")->required();
    c_lab->add_option("--report", report, "label report json")->required();

    auto* c_tsg = app.add_subcommand("train-sgan", "train the per-hit classifier");
    c_tsg->add_option("--in", in, "labeled sessions jsonl")->required()->check(CLI::ExistingFile);
    c_tsg->add_option("--config", config, "training config")->check(CLI::ExistingFile);
    c_tsg->add_option("--out", out, "model output")->required();
    c_tsg->add_option("--seed", seed, "seed override");

    auto* c_gra = app.add_subcommand("graphs", "build website traversal graphs per session");
    c_gra->add_option("--in", in, "sessions jsonl")->required()->check(CLI::ExistingFile);
    c_gra->add_option("--out", out, "graphs output (jsonl)")->required();
    c_gra->add_option("--metrics", metrics_path, "per-graph metrics csv");
    c_gra->add_flag("--prefixes", prefixes,
                    "also emit partial-session snapshots of labeled sessions (for training "
                    "the streaming graph classifier)");

    auto* c_tdg = app.add_subcommand("train-dgcnn", "train the session-graph classifier");
    c_tdg->add_option("--in", in, "graphs jsonl")->required()->check(CLI::ExistingFile);
    c_tdg->add_option("--config", config, "training config")->check(CLI::ExistingFile);
    c_tdg->add_option("--out", out, "model output")->required();
    c_tdg->add_option("--seed", seed, "seed override");

    auto* c_det = app.add_subcommand("detect", "run the detection cascade over a hit stream");
    c_det->add_option("--in", in, "hits jsonl")->required()->check(CLI::ExistingFile);
    c_det->add_option("--sgan", sgan_path)->required();
    c_det->add_option("--dgcnn", dgcnn_path)->required();
    c_det->add_option("--lambda", lambda, "confidence threshold")->check(CLI::Range(0.0, 1.0));
    c_det->add_option("--out", out, "verdicts output (jsonl)")->required();
    c_det->add_option("--labeling", labeling_path, "labeling config for the heuristics stage")
        ->check(CLI::ExistingFile);
    c_det->add_option("--max-session-hits", max_session_hits);
    c_det->add_option("--recheck-stride", stride, "graph re-evaluation cadence in hits");

    auto* c_eva = app.add_subcommand("evaluate", "score verdicts against a truth table");
    c_eva->add_option("--verdicts", in)->required()->check(CLI::ExistingFile);
    c_eva->add_option("--truth", truth)->required()->check(CLI::ExistingFile);
    c_eva->add_option("--out", out, "metric report json")->required();

    auto* c_imp = app.add_subcommand("importance", "permutation feature importance of the sgan");
    c_imp->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    c_imp->add_option("--data", in, "labeled sessions jsonl")->required()->check(CLI::ExistingFile);
    c_imp->add_option("--k", k, "shuffles per feature")->check(CLI::PositiveNumber);
    c_imp->add_option("--out", out, "importance csv")->required();
    c_imp->add_option("--seed", seed, "seed override");

    auto* c_siz = app.add_subcommand("size-study", "classification quality by graph size");
    c_siz->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    c_siz->add_option("--graphs", graphs_path)->required()->check(CLI::ExistingFile);
    c_siz->add_option("--truth", truth, "session truth csv (default: benchmark labels)");
    c_siz->add_option("--out", out, "per-size csv")->required();
    c_siz->add_option("--max-nodes", max_nodes);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(spec, out, truth, seed);
        if (c_ing->parsed()) return cmd_ingest(in, format, out, idle_timeout);
        if (c_lab->parsed()) return cmd_label(in, config, out, report);
        if (c_tsg->parsed()) return cmd_train_sgan(in, config, out, seed);
        if (c_gra->parsed()) return cmd_graphs(in, out, metrics_path, prefixes);
        if (c_tdg->parsed()) return cmd_train_dgcnn(in, config, out, seed);
        if (c_det->parsed())
            return cmd_detect(in, sgan_path, dgcnn_path, lambda, out, labeling_path,
                              max_session_hits, stride);
        if (c_eva->parsed()) return cmd_evaluate(in, truth, out);
        if (c_imp->parsed()) return cmd_importance(model_path, in, k, out, seed);
        if (c_siz->parsed()) return cmd_size_study(model_path, graphs_path, truth, out, max_nodes);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
