#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "botracle/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(BOTRACLE_BIN) + " " + args + " 2>cli_stderr.log";
    const int raw = std::system(cmd.c_str());
    return {WEXITSTATUS(raw)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("botracle_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

}  // namespace

TEST_CASE("full command flow on a small corpus") {
    TempDir dir;

    write_file(dir.file("spec.toml"),
               "seed = 11\n"
               "n_sessions = 90\n"
               "cloud_ip_fraction_for_bots = 0.8\n"
               "internal_account_fraction_for_humans = 0.3\n"
               "[mix]\n"
               "human = 0.5\n"
               "scraper_bot = 0.2\n"
               "monitor_bot = 0.1\n"
               "stealth_bot = 0.2\n");
    write_file(dir.file("sgan.toml"), "epochs = 3\nbatch_size = 32\nseed = 5\n");
    write_file(dir.file("dgcnn.toml"), "epochs = 3\nbatch_size = 8\nseed = 5\n");

    // simulate
    CHECK(run("simulate --spec " + dir.file("spec.toml") + " --out " + dir.file("hits.jsonl") +
              " --truth " + dir.file("truth.csv"))
              .exit_code == 0);
    CHECK(fs::exists(dir.file("hits.jsonl")));
    CHECK(fs::exists(dir.file("truth.csv")));
    CHECK(fs::exists(dir.file("hits.jsonl") + ".run.json"));  // config echo sidecar

    // ingest
    CHECK(run("ingest --in " + dir.file("hits.jsonl") + " --format jsonl --out " +
              dir.file("sessions.jsonl"))
              .exit_code == 0);

    // label
    CHECK(run("label --in " + dir.file("sessions.jsonl") + " --out " + dir.file("labeled.jsonl") +
              " --report " + dir.file("report.json"))
              .exit_code == 0);
    auto report = nlohmann::json::parse(slurp(dir.file("report.json")));
    CHECK(report["hits_after"]["human"].get<std::size_t>() ==
          report["hits_before"]["human"].get<std::size_t>());
    CHECK(report["hits_after"]["bot"].get<std::size_t>() >=
          report["hits_before"]["bot"].get<std::size_t>());

    // train the per-hit classifier
    CHECK(run("train-sgan --in " + dir.file("labeled.jsonl") + " --config " +
              dir.file("sgan.toml") + " --out " + dir.file("sgan.model"))
              .exit_code == 0);

    // graphs + metrics, with partial-session snapshots for training
    CHECK(run("graphs --in " + dir.file("labeled.jsonl") + " --out " + dir.file("graphs.jsonl") +
              " --metrics " + dir.file("metrics.csv") + " --prefixes")
              .exit_code == 0);
    CHECK(slurp(dir.file("metrics.csv")).find("session_id") == 0);
    CHECK(slurp(dir.file("graphs.jsonl")).find("@") != std::string::npos);  // snapshots present

    // train the graph classifier
    CHECK(run("train-dgcnn --in " + dir.file("graphs.jsonl") + " --config " +
              dir.file("dgcnn.toml") + " --out " + dir.file("dgcnn.model"))
              .exit_code == 0);

    // detect
    CHECK(run("detect --in " + dir.file("hits.jsonl") + " --sgan " + dir.file("sgan.model") +
              " --dgcnn " + dir.file("dgcnn.model") + " --lambda 0.9 --out " +
              dir.file("verdicts.jsonl"))
              .exit_code == 0);
    std::istringstream verdicts(slurp(dir.file("verdicts.jsonl")));
    std::string line;
    std::size_t verdict_count = 0;
    while (std::getline(verdicts, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        CHECK(j.contains("subject"));
        CHECK(j.contains("decision"));
        CHECK(j.contains("probability"));
        CHECK(j.contains("stage"));
        CHECK(j.contains("timestamp"));
        ++verdict_count;
    }
    CHECK(verdict_count == 90);  // one verdict per simulated session

    // evaluate
    CHECK(run("evaluate --verdicts " + dir.file("verdicts.jsonl") + " --truth " +
              dir.file("truth.csv") + " --out " + dir.file("eval.json"))
              .exit_code == 0);
    auto eval = nlohmann::json::parse(slurp(dir.file("eval.json")));
    CHECK(eval["tp"].get<int>() + eval["fp"].get<int>() + eval["tn"].get<int>() +
              eval["fn"].get<int>() ==
          90);

    // importance (small K for speed)
    CHECK(run("importance --model " + dir.file("sgan.model") + " --data " +
              dir.file("labeled.jsonl") + " --k 3 --out " + dir.file("importance.csv"))
              .exit_code == 0);
    CHECK(slurp(dir.file("importance.csv")).find("feature,r2_mean") == 0);

    // size study against the truth table
    CHECK(run("size-study --model " + dir.file("dgcnn.model") + " --graphs " +
              dir.file("graphs.jsonl") + " --truth " + dir.file("truth.csv") + " --out " +
              dir.file("sizes.csv"))
              .exit_code == 0);
    CHECK(slurp(dir.file("sizes.csv")).find("nodes,graphs") == 0);
}

TEST_CASE("deterministic reruns produce byte-identical artifacts") {
    TempDir dir;
    write_file(dir.file("spec.toml"),
               "seed = 3\nn_sessions = 30\n[mix]\nhuman = 0.5\nmonitor_bot = 0.5\n");
    CHECK(run("simulate --spec " + dir.file("spec.toml") + " --out " + dir.file("a.jsonl") +
              " --truth " + dir.file("a.csv"))
              .exit_code == 0);
    CHECK(run("simulate --spec " + dir.file("spec.toml") + " --out " + dir.file("b.jsonl") +
              " --truth " + dir.file("b.csv"))
              .exit_code == 0);
    CHECK(slurp(dir.file("a.jsonl")) == slurp(dir.file("b.jsonl")));
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
}

TEST_CASE("exit codes: usage errors are 1, data errors are 2") {
    TempDir dir;
    CHECK(run("no-such-subcommand").exit_code == 1);
    CHECK(run("simulate --unknown-flag x").exit_code == 1);
    CHECK(run("detect --in missing.jsonl --sgan nope.model --dgcnn nope.model --out " +
              dir.file("v.jsonl"))
              .exit_code == 1);  // missing input caught by the flag validator

    // a present but unreadable model yields a data error (exit 2) naming the path
    write_file(dir.file("hits.jsonl"), R"({"timestamp":1,"pagename":"p"})" "\n");
    write_file(dir.file("bad.model"), "not json");
    CHECK(run("detect --in " + dir.file("hits.jsonl") + " --sgan " + dir.file("bad.model") +
              " --dgcnn " + dir.file("bad.model") + " --out " + dir.file("v.jsonl"))
              .exit_code == 2);
    std::string err = slurp("cli_stderr.log");
    CHECK(err.find("bad.model") != std::string::npos);
}

TEST_CASE("BOTRACLE_SEED provides the seed when config omits it") {
    TempDir dir;
    write_file(dir.file("spec.toml"), "n_sessions = 10\n[mix]\nhuman = 1.0\n");
    setenv("BOTRACLE_SEED", "777", 1);
    CHECK(run("simulate --spec " + dir.file("spec.toml") + " --out " + dir.file("h.jsonl") +
              " --truth " + dir.file("t.csv"))
              .exit_code == 0);
    unsetenv("BOTRACLE_SEED");
    auto sidecar = nlohmann::json::parse(slurp(dir.file("h.jsonl") + ".run.json"));
    CHECK(sidecar["seed"].get<std::uint64_t>() == 777);
}
