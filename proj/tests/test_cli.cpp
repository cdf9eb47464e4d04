#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int exit_code{0};
    std::string output;  // stdout and stderr
};

CliRun run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(GENREHAWKES_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("genrehawkes_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CliRun cli(const std::string& args) { return run_cli(args, dir_ / "log.txt"); }

    fs::path write(const std::string& name, const std::string& content) {
        const auto p = dir_ / name;
        std::ofstream(p) << content;
        return p;
    }

    fs::path dir_;
};

std::string jsonl_record(const std::string& id, double day, const std::string& uploader,
                         const std::vector<std::string>& tags, int views = 10, int comments = 1) {
    nlohmann::ordered_json j;
    j["video_id"] = id;
    j["ts"] = 1300000000.0 + day * 86400.0;
    j["uploader_id"] = uploader;
    j["tags"] = tags;
    j["views"] = views;
    j["comments"] = comments;
    return j.dump() + "\n";
}

}  // namespace

TEST_F(CliTest, ToyFixtureGivesTwoClustersAtEta2) {
    const auto input = write("toy.jsonl", jsonl_record("v1", 0, "u", {"a", "b"}) + jsonl_record("v2", 1, "u", {"a", "b"}) +
                                              jsonl_record("v3", 2, "u", {"c", "d"}) +
                                              jsonl_record("v4", 3, "u", {"c", "d"}) + jsonl_record("v5", 4, "u", {"a"}));
    const auto r = cli("cluster --input " + input.string() + " --out " + dir_.string() + " --eta 2");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto summary = nlohmann::json::parse(slurp(dir_ / "clusters.json"));
    EXPECT_EQ(summary["n_clusters"], 2);
    const auto assignments = lines(slurp(dir_ / "assignments.csv"));
    EXPECT_EQ(assignments.size(), 6u);
    EXPECT_EQ(assignments[0], "video_id,cluster_id");
}

TEST_F(CliTest, SweepRowsAreMonotone) {
    const auto corpus = dir_ / "sim";
    ASSERT_EQ(cli("simulate --seed 3 --out " + corpus.string()).exit_code, 0);
    const auto r = cli("cluster --input " + (corpus / "corpus.jsonl").string() + " --out " + dir_.string() +
                       " --sweep 1:5");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto rows = lines(slurp(dir_ / "eta_sweep.csv"));
    ASSERT_EQ(rows.size(), 6u);
    long prev = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const long n = std::stol(rows[i].substr(rows[i].find(',') + 1));
        EXPECT_GE(n, prev);
        prev = n;
    }
    EXPECT_FALSE(fs::exists(dir_ / "assignments.csv"));
}

TEST_F(CliTest, MissingInputNamesThePath) {
    const auto r = cli("cluster --input " + (dir_ / "nowhere.jsonl").string() + " --out " + dir_.string() + " --eta 2");
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("nowhere.jsonl"), std::string::npos) << r.output;
}

TEST_F(CliTest, MissingUpstreamArtifactNamesThePriorCommand) {
    const auto input = write("x.jsonl", jsonl_record("v1", 0, "u", {"a"}) + jsonl_record("v2", 5, "u", {"a"}));
    auto r = cli("fit --input " + input.string() + " --out " + dir_.string());
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("genrehawkes cluster"), std::string::npos) << r.output;

    ASSERT_EQ(cli("cluster --input " + input.string() + " --out " + dir_.string() + " --eta 1").exit_code, 0);
    for (const std::string cmd : {"forecast", "attribute"}) {
        r = cli(cmd + " --input " + input.string() + " --out " + dir_.string());
        EXPECT_NE(r.exit_code, 0);
        EXPECT_NE(r.output.find("genrehawkes fit"), std::string::npos) << r.output;
    }
}

TEST_F(CliTest, MalformedRecordReportsLineAndField) {
    const auto input = write("bad.jsonl", jsonl_record("v1", 0, "u", {"a"}) + R"({"video_id":"v2","ts":"soon",)"
                                                                               R"("uploader_id":"u","tags":["a"],)"
                                                                               R"("views":1,"comments":0})" "\n");
    const auto r = cli("cluster --input " + input.string() + " --out " + dir_.string() + " --eta 1");
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("bad.jsonl:2"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("'ts'"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "assignments.csv"));
}

TEST_F(CliTest, InvalidConfigTouchesNothing) {
    const auto input = write("x.jsonl", jsonl_record("v1", 0, "u", {"a"}));
    const auto out = dir_ / "never";
    const auto r = cli("cluster --input " + input.string() + " --out " + out.string() + " --eta 2 --mc-samples 5");
    EXPECT_NE(r.exit_code, 0);
    EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, SupercriticalClusterIsRefusedOthersProceed) {
    // "boom": upload rate growing exponentially, which only a supercritical
    // Hawkes fit reproduces. "calm": evenly spaced uploads.
    std::string text;
    for (int k = 1;; ++k) {
        const double day = 20.0 * std::log(1.0 + k / 5.0);
        if (day >= 50.0) break;
        text += jsonl_record("boom" + std::to_string(k), day, "b", {"boom"});
    }
    for (int k = 0; k < 60; ++k) text += jsonl_record("calm" + std::to_string(k), 0.4 + k * 0.83, "c", {"calm"});
    const auto input = write("mixed.jsonl", text);
    const std::string io = " --input " + input.string() + " --out " + dir_.string();
    ASSERT_EQ(cli("cluster" + io + " --eta 1").exit_code, 0);
    ASSERT_EQ(cli("fit" + io).exit_code, 0);
    const auto r = cli("forecast" + io + " --train-days 20 --mc-samples 200");
    ASSERT_EQ(r.exit_code, 0) << r.output;

    const auto forward = nlohmann::json::parse(slurp(dir_ / "forecast_forward.json"));
    const auto clusters = nlohmann::json::parse(slurp(dir_ / "clusters.json"))["clusters"];
    ASSERT_EQ(forward["clusters"].size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& row = forward["clusters"][i];
        if (clusters[i]["tags"][0] == "boom") {
            EXPECT_EQ(row["status"], "refused: supercritical");
        } else {
            EXPECT_EQ(row["status"], "ok");
            EXPECT_GT(row["expected_count"].get<double>(), 0.0);
        }
    }
    ASSERT_EQ(cli("attribute" + io).exit_code, 0);
    ASSERT_EQ(cli("report" + io).exit_code, 0);
    const auto report = nlohmann::json::parse(slurp(dir_ / "report.json"));
    bool mentioned = false;
    for (const auto& w : report["warnings"]) mentioned |= w.get<std::string>().find("supercritical") != std::string::npos;
    EXPECT_TRUE(mentioned);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
    const auto input = write("toy.jsonl", jsonl_record("v1", 0, "u", {"a", "b"}) + jsonl_record("v2", 1, "u", {"a", "b"}) +
                                              jsonl_record("v3", 2, "u", {"b", "c"}));
    const auto conf = write("run.conf", "input=" + input.string() + "\nout=" + dir_.string() + "\neta=2\n");
    ASSERT_EQ(cli("cluster --config " + conf.string()).exit_code, 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "clusters.json"))["eta"], 2);
    ASSERT_EQ(cli("cluster --config " + conf.string() + " --eta 1").exit_code, 0);
    const auto summary = nlohmann::json::parse(slurp(dir_ / "clusters.json"));
    EXPECT_EQ(summary["eta"], 1);
    EXPECT_EQ(summary["n_clusters"], 1);
}

TEST_F(CliTest, PipelineIsIdempotentAndThreadIndependent) {
    const auto sim = dir_ / "sim";
    ASSERT_EQ(cli("simulate --seed 11 --out " + sim.string()).exit_code, 0);
    const std::vector<std::string> artifacts = {
        "assignments.csv",       "clusters.json",   "fits.json",           "forecast_table.csv",
        "forecast_table.json",   "forecast_forward.csv", "forecast_forward.json", "attribution.json",
        "attribution.csv",       "report.json",     "aic_diff.csv",        "factor_shares.csv",
        "weekly_counts.csv"};
    std::vector<std::vector<std::string>> contents;
    for (const std::string threads : {"1", "1", "3"}) {
        const auto out = dir_ / ("out" + std::to_string(contents.size()));
        const std::string io = " --input " + (sim / "corpus.jsonl").string() + " --out " + out.string() +
                               " --seed 5 --mc-samples 300 --threads " + threads;
        for (const std::string cmd : {"cluster --eta 3", "fit", "forecast", "attribute", "report"}) {
            const auto r = cli(cmd + io);
            ASSERT_EQ(r.exit_code, 0) << cmd << ": " << r.output;
        }
        std::vector<std::string> c;
        for (const auto& a : artifacts) {
            ASSERT_TRUE(fs::exists(out / a)) << a;
            c.push_back(slurp(out / a));
        }
        for (const auto& entry : fs::directory_iterator(out)) {
            EXPECT_EQ(entry.path().string().find(".tmp."), std::string::npos) << "leftover " << entry.path();
        }
        contents.push_back(std::move(c));
    }
    EXPECT_EQ(contents[0], contents[1]);
    EXPECT_EQ(contents[0], contents[2]);
}

TEST_F(CliTest, SimulateIsDeterministic) {
    ASSERT_EQ(cli("simulate --seed 9 --out " + (dir_ / "a").string()).exit_code, 0);
    ASSERT_EQ(cli("simulate --seed 9 --out " + (dir_ / "b").string() + " --threads 2").exit_code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "corpus.jsonl"), slurp(dir_ / "b" / "corpus.jsonl"));
    EXPECT_EQ(slurp(dir_ / "a" / "ground_truth.json"), slurp(dir_ / "b" / "ground_truth.json"));
    const auto truth = nlohmann::json::parse(slurp(dir_ / "a" / "ground_truth.json"));
    EXPECT_EQ(truth["seed"], 9);
}
