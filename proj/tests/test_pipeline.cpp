#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "granalign/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace granalign;
using testing_support::fixture;
using testing_support::TempDir;

namespace {

std::vector<DatasetRecord> synthetic_records() {
    return load_qvhighlights(fixture("synthetic/qvh_val.jsonl"), Split::Val, 0.5);
}

MockProvider synthetic_mock(std::uint64_t seed = 0) {
    return MockProvider(seed, MockScene::load(fixture("synthetic/scene.jsonl")));
}

/// Mock that refuses to rewrite one query text.
class FailingOneQuery final : public ModelProvider {
public:
    FailingOneQuery(const ModelProvider& inner, std::string bad) : inner_(inner), bad_(std::move(bad)) {}

    RewrittenQueryPair rewrite(const Query& q, std::size_t pair, std::size_t sample) const override {
        if (q.text == bad_) throw Error(ErrorKind::RemoteUnavailable, "down for this query");
        return inner_.rewrite(q, pair, sample);
    }
    Caption caption_frame(const VideoMeta& v, std::size_t f,
                          const SemanticGuidance* g) const override {
        return inner_.caption_frame(v, f, g);
    }
    Embedding embed(std::string_view text) const override { return inner_.embed(text); }
    double frame_query_similarity(const VideoMeta& v, std::size_t f,
                                  std::string_view text) const override {
        return inner_.frame_query_similarity(v, f, text);
    }

private:
    const ModelProvider& inner_;
    std::string bad_;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + GRANALIGN_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct QuietWarnings {
    QuietWarnings() { set_warning_sink([](std::string_view) {}); }
    ~QuietWarnings() { set_warning_sink(nullptr); }
};

}  // namespace

TEST_CASE("pipeline output does not depend on the number of jobs") {
    QuietWarnings quiet;
    const auto records = synthetic_records();
    const auto mock = synthetic_mock();
    PipelineConfig cfg;
    RunOptions one;
    RunOptions two;
    two.jobs = 2;
    const auto a = run_pipeline(cfg, records, mock, one);
    const auto b = run_pipeline(cfg, records, mock, two);
    REQUIRE(a.predictions.size() == records.size());
    REQUIRE(b.predictions.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(a.predictions[i].query_id == records[i].query.id);
        CHECK(prediction_line(a.predictions[i]) == prediction_line(b.predictions[i]));
        CHECK(a.series[i].scores == b.series[i].scores);
    }
    REQUIRE(a.report);
    CHECK(a.report->num_queries == 5);
    CHECK(a.report->map_avg == b.report->map_avg);
    CHECK_FALSE(a.all_failed());
}

TEST_CASE("the committed golden predictions are reproduced") {
    QuietWarnings quiet;
    const auto result = run_pipeline(PipelineConfig{}, synthetic_records(), synthetic_mock());
    TempDir dir;
    write_predictions(result.predictions, dir.path() / "p.jsonl");
    CHECK(slurp(dir.path() / "p.jsonl") == slurp(fixture("synthetic/expected_predictions.jsonl")));
}

TEST_CASE("one failing query does not stop the others") {
    QuietWarnings quiet;
    const auto records = synthetic_records();
    const auto mock = synthetic_mock();
    const FailingOneQuery flaky(mock, records[2].query.text);
    RunOptions opts;
    opts.jobs = 2;
    const auto result = run_pipeline(PipelineConfig{}, records, flaky, opts);
    CHECK(result.predictions.size() == 4);
    CHECK(result.manifest.failed() == 1);
    REQUIRE(result.manifest.queries.size() == 5);
    CHECK_FALSE(result.manifest.queries[2].ok);
    CHECK(result.manifest.queries[2].reason.find("down for this query") != std::string::npos);
    REQUIRE(result.report);
    CHECK(result.report->num_failed == 1);
    CHECK(result.report->num_queries == 4);

    std::vector<DatasetRecord> only{records[0]};
    const FailingOneQuery first(mock, records[0].query.text);
    CHECK(run_pipeline(PipelineConfig{}, only, first).all_failed());
}

TEST_CASE("manifest records config, providers and per-span terms") {
    QuietWarnings quiet;
    const auto records = synthetic_records();
    const auto mock = synthetic_mock();
    PipelineConfig cfg;
    cfg.length_weight = 0.0;
    RunOptions opts;
    opts.dataset_name = "qvhighlights";
    opts.split_name = "val";
    opts.provider_description = {{"kind", "mock"}, {"seed", 0}};
    const auto result = run_pipeline(cfg, records, mock, opts);
    const auto j = to_json(result.manifest, result.predictions);
    CHECK(j.at("config").at("length_weight") == 0.0);
    CHECK(j.at("config").at("num_rewrites") == 3);
    CHECK(j.at("dataset") == "qvhighlights");
    CHECK(j.at("providers").at("kind") == "mock");
    CHECK(j.at("num_queries") == 5);
    CHECK(j.at("num_failed") == 0);
    CHECK(j.contains("instruction_set_version"));
    for (const auto& q : j.at("queries")) {
        CHECK(q.at("status") == "ok");
        CHECK(q.at("effective_m") == 1);
        CHECK(q.contains("warnings"));
        for (const auto& s : q.at("spans")) {
            CHECK(s.at("score").get<double>() == s.at("mu").get<double>());
            CHECK(s.at("end_frame").get<std::size_t>() >= s.at("start_frame").get<std::size_t>());
        }
    }
}

TEST_CASE("sweeps run one configuration per value") {
    QuietWarnings quiet;
    const auto records = synthetic_records();
    const auto mock = synthetic_mock();
    const std::vector<std::string> lambdas{"0", "0.1", "0.2", "0.3", "0.4"};
    const auto rows = sweep(PipelineConfig{}, records, mock, "lambda", lambdas);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].value == lambdas[i]);
        REQUIRE(rows[i].report);
        CHECK(rows[i].failed == 0);
    }

    PipelineConfig at03;
    at03.length_weight = 0.3;
    const auto direct = run_pipeline(at03, records, mock);
    CHECK(rows[3].report->map_avg == direct.report->map_avg);
    CHECK(rows[3].report->miou == direct.report->miou);

    const auto ms = sweep(PipelineConfig{}, records, mock, "m", {"1", "2"});
    CHECK(ms.size() == 2);

    const auto table = format_sweep_table("lambda", rows);
    CHECK(table.find("0.4") != std::string::npos);
    CHECK(sweep_to_json("lambda", rows).at("rows").size() == 5);

    CHECK_THROWS_AS(sweep(PipelineConfig{}, records, mock, "lambda", {}), Error);
    CHECK_THROWS_AS(sweep(PipelineConfig{}, records, mock, "lambda", {"1.5"}), Error);
    CHECK(sweep_parameter_key("tau") == "merge_gap");
    CHECK(sweep_parameter_key("nms_iou") == "nms_iou");
    CHECK_THROWS_AS(sweep_parameter_key("fps"), Error);
}

TEST_CASE("parallel_for_each_index visits every index once") {
    for (std::size_t jobs : {1u, 3u, 16u}) {
        std::vector<std::atomic<int>> hits(37);
        parallel_for_each_index(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
        for (const auto& h : hits) CHECK(h.load() == 1);
    }
}

TEST_CASE("command-line exit codes") {
    TempDir dir;
    const std::string data = "--data \"" + fixture("synthetic/qvh_val.jsonl").string() + "\"";
    const std::string scene = "--mock-scene \"" + fixture("synthetic/scene.jsonl").string() + "\"";
    const std::string out = " --out \"" + (dir.path() / "run").string() + "\"";

    CHECK(run_cli("run " + data + " " + scene + " --seed 0" + out) == 0);
    CHECK(std::filesystem::exists(dir.path() / "run" / "predictions.jsonl"));
    CHECK(std::filesystem::exists(dir.path() / "run" / "manifest.json"));
    CHECK(std::filesystem::exists(dir.path() / "run" / "report.json"));

    CHECK(run_cli("run " + data + " --lambda 2" + out) == 1);
    CHECK(run_cli("run --data \"" + (dir.path() / "missing.jsonl").string() + "\"" + out) == 1);
    CHECK(run_cli("eval --predictions \"" + (dir.path() / "run" / "predictions.jsonl").string() +
                  "\" " + data) == 0);
    CHECK(run_cli("run " + data + " --provider http --endpoint http://127.0.0.1:1" + out) == 2);
    CHECK(run_cli("run " + data + " --provider file" + out) == 1);
}
