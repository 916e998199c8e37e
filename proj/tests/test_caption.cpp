#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "granalign/caption.hpp"
#include "support/stub_provider.hpp"

using namespace granalign;
using testing_support::StubProvider;

TEST_CASE("candidate budget") {
    CHECK(candidate_count(4, 25.0) == 1);
    CHECK(candidate_count(100, 10.0) == 10);
    CHECK(candidate_count(15, 10.0) == 2);
    CHECK(candidate_count(7, 10.0) == 1);
    CHECK(candidate_count(3, 1.0) == 1);
    CHECK(candidate_count(10, 100.0) == 10);
}

TEST_CASE("candidate frames: top similarity, ties to lower index, ascending output") {
    StubProvider stub;
    stub.similarity = {{0, 0.1}, {1, 0.9}, {2, 0.5}, {3, 0.9}, {4, 0.5}, {5, 0.2}};
    const auto v = VideoMeta::make("v", 12.0, 0.5);
    const auto q = Query::make("q", "anything");
    CHECK(select_candidate_frames(v, q, 34.0, stub) == std::vector<std::size_t>{1, 2, 3});
    CHECK(select_candidate_frames(v, q, 67.0, stub) == std::vector<std::size_t>{1, 2, 3, 4, 5});
    CHECK(select_candidate_frames(v, q, 1.0, stub) == std::vector<std::size_t>{1});
}

TEST_CASE("caption set with the mock: dense agnostic, sparse aware") {
    MockScene scene;
    scene.add("v1", {2, 2, "dog running"});
    const MockProvider mock(0, scene);
    const auto v = VideoMeta::make("v1", 8.0, 0.5);
    REQUIRE(v.frame_count == 4);
    PipelineConfig cfg;
    cfg.top_k_percent = 25.0;
    const auto q = Query::make("q", "dog running");
    const SemanticGuidance g{{"dog"}, {"running"}};
    const auto set = build_caption_set(v, q, g, cfg, mock);
    CHECK(set.agnostic.size() == 4);
    CHECK(set.aware.size() == 1);
    CHECK(set.candidate_frames == std::vector<std::size_t>{2});
    CHECK(set.aware.at(2).mode == CaptionMode::Aware);
    CHECK(&set.aware_or_agnostic(2) == &set.aware.at(2));
    CHECK(&set.aware_or_agnostic(0) == &set.agnostic[0]);
    for (const auto& c : set.agnostic) CHECK(c.mode == CaptionMode::Agnostic);
}

TEST_CASE("agnostic captions do not depend on the query") {
    const MockProvider mock(1);
    const auto v = VideoMeta::make("v1", 40.0, 0.5);
    const PipelineConfig cfg;
    const auto a = build_caption_set(v, Query::make("a", "red car"), {{"car"}, {}}, cfg, mock);
    const auto b = build_caption_set(v, Query::make("b", "blue sky"), {{"sky"}, {}}, cfg, mock);
    REQUIRE(a.agnostic.size() == b.agnostic.size());
    for (std::size_t i = 0; i < a.agnostic.size(); ++i) {
        CHECK(a.agnostic[i].text == b.agnostic[i].text);
    }
    const auto pre = caption_all_frames(v, mock);
    CHECK(pre.size() == a.agnostic.size());
    CHECK(pre[3].text == a.agnostic[3].text);
}

TEST_CASE("a failing frame aborts with CaptionFailed naming it") {
    StubProvider stub;
    stub.failing_frame = 3;
    const auto v = VideoMeta::make("v", 20.0, 0.5);
    try {
        build_caption_set(v, Query::make("q", "x"), {{"x"}, {}}, PipelineConfig{}, stub);
        FAIL("expected CaptionFailed");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CaptionFailed);
        CHECK(std::string(e.what()).find("frame 3") != std::string::npos);
    }
}

TEST_CASE("hybrid budget and ordering hold on random videos") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        StubProvider stub;
        const std::size_t frames = 1 + rng() % 120;
        for (std::size_t f = 0; f < frames; ++f) {
            stub.similarity[f] = static_cast<double>(rng() % 7);
        }
        const double k = 1.0 + static_cast<double>(rng() % 100);
        const auto v = VideoMeta::make("v", static_cast<double>(frames) * 2.0, 0.5);
        const auto sel = select_candidate_frames(v, Query::make("q", "x"), k, stub);
        const double budget = std::ceil(k) / 100.0 + 1.0 / static_cast<double>(frames);
        CHECK(static_cast<double>(sel.size()) / static_cast<double>(frames) <= budget + 1e-12);
        CHECK(std::is_sorted(sel.begin(), sel.end()));
        CHECK(std::set<std::size_t>(sel.begin(), sel.end()).size() == sel.size());
        // every selected frame is at least as similar as every unselected one
        double worst_selected = 1e9;
        for (auto f : sel) worst_selected = std::min(worst_selected, stub.similarity[f]);
        for (std::size_t f = 0; f < frames; ++f) {
            if (!std::binary_search(sel.begin(), sel.end(), f)) {
                CHECK(stub.similarity[f] <= worst_selected);
            }
        }
    }
}
