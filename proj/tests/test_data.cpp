#include <doctest.h>

#include <fstream>
#include <string>
#include <vector>

#include "granalign/data.hpp"
#include "support/temp_dir.hpp"

using namespace granalign;
using testing_support::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

template <typename F>
ErrorKind kind_of(F&& f, std::string* message = nullptr) {
    try {
        f();
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

/// Collects warnings for the lifetime of the object.
struct WarningCapture {
    std::vector<std::string> seen;
    WarningCapture() {
        set_warning_sink([this](std::string_view m) { seen.emplace_back(m); });
    }
    ~WarningCapture() { set_warning_sink(nullptr); }
};

}  // namespace

TEST_CASE("QVHighlights line parses into one record") {
    TempDir dir;
    const auto p = dir.path() / "val.jsonl";
    write_file(p,
               "{\"qid\":1,\"query\":\"a cute dog\",\"vid\":\"v1\",\"duration\":150,"
               "\"relevant_windows\":[[90,142]],\"relevant_clip_ids\":[45,46]}\n\n");
    const auto recs = load_qvhighlights(p, Split::Val, 0.5);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].query.id == "1");
    CHECK(recs[0].query.text == "a cute dog");
    CHECK(recs[0].video.video_id == "v1");
    CHECK(recs[0].video.frame_count == 75);
    CHECK(recs[0].ground_truth.query_id == "1");
    REQUIRE(recs[0].ground_truth.windows.size() == 1);
    CHECK(recs[0].ground_truth.windows[0] == TimeSpan{90.0, 142.0});
    REQUIRE(recs[0].ground_truth.relevant_clips);
    CHECK(*recs[0].ground_truth.relevant_clips == std::vector<std::size_t>{45, 46});
}

TEST_CASE("QVHighlights errors and the test split") {
    TempDir dir;
    const auto no_gt = dir.path() / "test.jsonl";
    write_file(no_gt, "{\"qid\":\"a\",\"query\":\"x y\",\"vid\":\"v\",\"duration\":10}\n");
    CHECK(load_qvhighlights(no_gt, Split::Test, 0.5)[0].ground_truth.windows.empty());
    CHECK(kind_of([&] { load_qvhighlights(no_gt, Split::Val, 0.5); }) == ErrorKind::SchemaError);

    const auto empty = dir.path() / "empty.jsonl";
    write_file(empty,
               "{\"qid\":\"a\",\"query\":\"x\",\"vid\":\"v\",\"duration\":10,\"relevant_windows\":[]}\n");
    CHECK(kind_of([&] { load_qvhighlights(empty, Split::Train, 0.5); }) == ErrorKind::SchemaError);

    const auto bad = dir.path() / "bad.jsonl";
    std::string body;
    for (int i = 1; i <= 6; ++i) {
        body += "{\"qid\":" + std::to_string(i) +
                ",\"query\":\"q\",\"vid\":\"v\",\"duration\":10,\"relevant_windows\":[[0,1]]}\n";
    }
    body += "{\"qid\": 7, \"query\": \n";
    write_file(bad, body);
    std::string msg;
    CHECK(kind_of([&] { load_qvhighlights(bad, Split::Val, 0.5); }, &msg) == ErrorKind::ParseError);
    CHECK(msg.find("bad.jsonl:7") != std::string::npos);

    const auto missing = dir.path() / "missing.jsonl";
    write_file(missing, "{\"qid\":1,\"vid\":\"v\",\"duration\":10,\"relevant_windows\":[[0,1]]}\n");
    CHECK(kind_of([&] { load_qvhighlights(missing, Split::Val, 0.5); }, &msg) ==
          ErrorKind::SchemaError);
    CHECK(msg.find("query") != std::string::npos);

    CHECK(kind_of([&] { load_qvhighlights(dir.path() / "nope.jsonl", Split::Val, 0.5); }) ==
          ErrorKind::IoError);
}

TEST_CASE("Charades-STA lines need a duration index") {
    TempDir dir;
    const auto idx = dir.path() / "durations.txt";
    write_file(idx, "AO8RW 33.67\nZZZZZ,12\n");
    const auto durations = load_duration_index(idx);
    CHECK(durations.at("AO8RW") == 33.67);
    CHECK(durations.at("ZZZZZ") == 12.0);

    const auto p = dir.path() / "charades.txt";
    write_file(p,
               "AO8RW 0.0 6.9##a person is putting a book on a shelf.\n"
               "AO8RW 5.0 12.0##person opens the door\n");
    const auto recs = load_charades(p, durations, Split::Test, 0.5);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].query.id == "AO8RW#0");
    CHECK(recs[1].query.id == "AO8RW#1");
    CHECK(recs[0].query.text == "a person is putting a book on a shelf.");
    CHECK(recs[0].ground_truth.windows[0] == TimeSpan{0.0, 6.9});
    CHECK(recs[0].video.duration_s == 33.67);

    const auto neg = dir.path() / "neg.txt";
    write_file(neg, "AO8RW -1.0 6.9##a person\n");
    CHECK(kind_of([&] { load_charades(neg, durations, Split::Test, 0.5); }) == ErrorKind::ParseError);

    const auto nosep = dir.path() / "nosep.txt";
    write_file(nosep, "AO8RW 0.0 6.9 a person\n");
    CHECK(kind_of([&] { load_charades(nosep, durations, Split::Test, 0.5); }) ==
          ErrorKind::ParseError);

    const auto unknown = dir.path() / "unknown.txt";
    write_file(unknown, "QQQQQ 0.0 6.9##a person\n");
    CHECK(kind_of([&] { load_charades(unknown, durations, Split::Test, 0.5); }) ==
          ErrorKind::MissingDuration);

    CHECK(kind_of([&] {
              load_dataset(DatasetKind::Charades, p, Split::Test, 0.5, std::nullopt);
          }) == ErrorKind::ConfigError);
    CHECK(load_dataset(DatasetKind::Charades, p, Split::Test, 0.5, idx).size() == 2);
}

TEST_CASE("ActivityNet Captions expands sentences and clamps windows") {
    TempDir dir;
    const auto p = dir.path() / "anet.json";
    write_file(p,
               "{\"v_b\": {\"duration\": 100.0, \"timestamps\": [[0, 10], [20, 40], [90, 120]],"
               " \"sentences\": [\"one thing\", \" two things \", \"three\"]},"
               " \"v_a\": {\"duration\": 50, \"timestamps\": [[1, 2]], \"sentences\": [\"four\"]}}");
    WarningCapture warnings;
    const auto recs = load_activitynet(p, Split::Val, 0.5);
    REQUIRE(recs.size() == 4);
    CHECK(recs[0].query.id == "v_b#0");
    CHECK(recs[1].query.text == "two things");
    CHECK(recs[2].ground_truth.windows[0] == TimeSpan{90.0, 100.0});
    CHECK(recs[3].query.id == "v_a#0");
    CHECK(warnings.seen.size() == 1);

    const auto mismatch = dir.path() / "mismatch.json";
    write_file(mismatch,
               "{\"v\": {\"duration\": 10, \"timestamps\": [[0, 1], [2, 3]], \"sentences\": [\"x\"]}}");
    CHECK(kind_of([&] { load_activitynet(mismatch, Split::Val, 0.5); }) ==
          ErrorKind::LengthMismatch);

    const auto broken = dir.path() / "broken.json";
    write_file(broken, "{\"v\": ");
    CHECK(kind_of([&] { load_activitynet(broken, Split::Val, 0.5); }) == ErrorKind::ParseError);
}

TEST_CASE("prediction files round-trip at four decimals") {
    TempDir dir;
    MomentPrediction a{"12", "v", {}, {0.123456, 0.5}};
    a.spans.push_back(PredictedSpan{TimeSpan{1.000049, 2.5}, 0.987654, {}, 0.0, 0.0});
    a.spans.push_back(PredictedSpan{TimeSpan{3.0, 4.0}, 0.25, {}, 0.0, 0.0});
    MomentPrediction b{"v_x#3", "v_x", {}, {}};
    b.spans.push_back(PredictedSpan{TimeSpan{0.0, 1.0}, -0.00001, {}, 0.0, 0.0});

    CHECK(prediction_line(a) ==
          "{\"pred_relevant_windows\":[[1.0,2.5,0.9877],[3.0,4.0,0.25]],"
          "\"pred_saliency_scores\":[0.1235,0.5],\"qid\":12}");
    CHECK(prediction_line(b).find("\"qid\":\"v_x#3\"") != std::string::npos);
    CHECK(prediction_line(b).find("[0.0,1.0,0.0]") != std::string::npos);

    const auto p = dir.path() / "preds.jsonl";
    write_predictions({a, b}, p);
    const auto back = read_predictions(p);
    REQUIRE(back.size() == 2);
    CHECK(back[0].query_id == "12");
    CHECK(back[0].spans.size() == 2);
    CHECK(back[0].spans[0].span == TimeSpan{1.0, 2.5});
    CHECK(back[0].spans[0].score == 0.9877);
    CHECK(back[0].saliency == std::vector<double>{0.1235, 0.5});
    CHECK(back[1].query_id == "v_x#3");

    CHECK(kind_of([&] { write_predictions({a}, dir.path() / "no" / "such" / "dir" / "p.jsonl"); }) ==
          ErrorKind::IoError);
}

TEST_CASE("score series and rewrites round-trip exactly") {
    TempDir dir;
    const std::vector<FrameScoreSeries> series{{"v", "1", {0.1, 1.0 / 3.0, 0.7}},
                                               {"w", "q#2", {0.5}}};
    write_score_series(series, dir.path() / "s.jsonl");
    const auto s = read_score_series(dir.path() / "s.jsonl");
    REQUIRE(s.size() == 2);
    CHECK(s[0].scores == series[0].scores);
    CHECK(s[0].query_id == "1");
    CHECK(s[1].video_id == "w");

    RewriteRecord r;
    r.rewrites.original = Query::make("7", "a dog runs on grass");
    r.rewrites.pairs = {{"dog runs", "a brown dog runs on green grass"}, {"dog", "a dog"}};
    r.guidance = {{"dog", "grass"}, {"runs"}};
    r.type = {QueryCategory::Detail, true};
    write_rewrites({r}, dir.path() / "r.jsonl");
    const auto back = read_rewrites(dir.path() / "r.jsonl");
    REQUIRE(back.size() == 1);
    CHECK(back[0].rewrites.original.id == "7");
    CHECK(back[0].rewrites.original.text == r.rewrites.original.text);
    CHECK(back[0].rewrites.pairs.size() == 2);
    CHECK(back[0].rewrites.pairs[0].detailed == "a brown dog runs on green grass");
    CHECK(back[0].guidance.entities == r.guidance.entities);
    CHECK(back[0].guidance.actions == r.guidance.actions);
    CHECK(back[0].type.category == QueryCategory::Detail);
    CHECK(back[0].type.error_flag);
}

TEST_CASE("hold-out split is deterministic and sized by the fraction") {
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 40; ++i) {
        DatasetRecord r;
        r.query = Query::make(std::to_string(i), "query " + std::to_string(i));
        recs.push_back(r);
    }
    const auto [train, held] = split_holdout(recs, 0.25);
    CHECK(held.size() == 10);
    CHECK(train.size() == 30);
    const auto again = split_holdout(recs, 0.25);
    REQUIRE(again.second.size() == held.size());
    for (std::size_t i = 0; i < held.size(); ++i) {
        CHECK(again.second[i].query.id == held[i].query.id);
    }
    const auto other = split_holdout(recs, 0.25, 7);
    bool differs = false;
    for (std::size_t i = 0; i < held.size(); ++i) {
        differs = differs || other.second[i].query.id != held[i].query.id;
    }
    CHECK(differs);
    CHECK(split_holdout(recs, 0.0).second.empty());
    CHECK(split_holdout(recs, 1.0).first.empty());
    CHECK(kind_of([&] { split_holdout(recs, 1.5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("name conversions") {
    CHECK(split_from_string("val") == Split::Val);
    CHECK(to_string(Split::Test) == "test");
    CHECK(dataset_kind_from_string(to_string(DatasetKind::ActivityNet)) == DatasetKind::ActivityNet);
    CHECK_THROWS_AS(split_from_string("dev"), Error);
}
