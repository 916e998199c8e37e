#include <doctest.h>

#include <algorithm>

#include "granalign/rewrite.hpp"
#include "support/stub_provider.hpp"

using namespace granalign;
using testing_support::StubProvider;

namespace {

bool has(const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST_CASE("mock rewrites collapse to one pair") {
    const MockProvider mock;
    PipelineConfig cfg;
    const auto q = Query::make("q", "A person picking up a pencil from the desk");
    const auto set = generate_rewrites(q, cfg, mock);
    CHECK(set.m() == 1);
    CHECK(set.pairs[0].simplified == "person picking pencil");
    CHECK(set.pairs[0].detailed == q.text);
    CHECK(set.warnings.size() == 1);
    CHECK(set.original.id == "q");
}

TEST_CASE("distinct rewrites are all kept in sample order") {
    StubProvider stub;
    PipelineConfig cfg;
    cfg.num_rewrites = 3;
    const auto q = Query::make("q", "a query");
    const auto set = generate_rewrites(q, cfg, stub);
    REQUIRE(set.m() == 3);
    CHECK(set.pairs[0].simplified == "simple 0");
    CHECK(set.pairs[2].simplified == "simple 2");
    CHECK(set.warnings.empty());
}

TEST_CASE("failed samples are dropped, total failure is RewriteFailed") {
    PipelineConfig cfg;
    cfg.num_rewrites = 3;
    const auto q = Query::make("q", "a query");

    StubProvider flaky;
    flaky.rewrite_failures_left = 1;
    const auto set = generate_rewrites(q, cfg, flaky);
    CHECK(set.m() == 2);
    CHECK(set.pairs[0].simplified == "simple 1");
    CHECK_FALSE(set.warnings.empty());

    StubProvider down;
    down.rewrite_failures_left = 100;
    try {
        generate_rewrites(q, cfg, down);
        FAIL("expected RewriteFailed");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RewriteFailed);
    }

    StubProvider identical;
    identical.rewrite_identical = true;
    CHECK_THROWS_AS(generate_rewrites(q, cfg, identical), Error);
}

TEST_CASE("heuristic guidance") {
    const auto g = heuristic_guidance(Query::make("q", "A person picking up a pencil from the desk"));
    CHECK(has(g.entities, "person"));
    CHECK(has(g.entities, "pencil"));
    CHECK(has(g.entities, "desk"));
    CHECK(has(g.actions, "picking"));

    const auto d = heuristic_guidance(Query::make("q", "dog running"));
    CHECK(d.entities == std::vector<std::string>{"dog"});
    CHECK(d.actions == std::vector<std::string>{"running"});

    const auto only = heuristic_guidance(Query::make("q", "big green apples"));
    CHECK(only.actions.empty());
    CHECK(only.entities.size() == 3);

    const auto dup = heuristic_guidance(Query::make("q", "dog and dog"));
    CHECK(dup.entities == std::vector<std::string>{"dog"});

    try {
        heuristic_guidance(Query::make("q", "the of a"));
        FAIL("expected GuidanceEmpty");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GuidanceEmpty);
    }
}

TEST_CASE("provider guidance is validated against the query") {
    const auto q = Query::make("q", "A dog chasing a ball");
    StubProvider stub;
    stub.guidance = SemanticGuidance{{"Dog", "ball", "spaceship"}, {"chasing", "flying"}};
    const auto g = extract_guidance(q, &stub);
    CHECK(g.entities == std::vector<std::string>{"Dog", "ball"});
    CHECK(g.actions == std::vector<std::string>{"chasing"});

    stub.guidance = SemanticGuidance{{"spaceship"}, {}};
    const auto fallback = extract_guidance(q, &stub);
    CHECK(fallback.entities == heuristic_guidance(q).entities);

    CHECK(extract_guidance(q).actions == std::vector<std::string>{"chasing"});
}

TEST_CASE("query classification") {
    CHECK(classify_query(Query::make("q", "a dog runs")).category == QueryCategory::Simple);
    CHECK(classify_query(Query::make("q", "one two three four five six")).category ==
          QueryCategory::Simple);
    CHECK(classify_query(Query::make("q", "a man walks his dog along the beach")).category ==
          QueryCategory::Else);
    CHECK(classify_query(Query::make("q", "a man walks his dog along the beach in Hawaii"))
              .category == QueryCategory::Detail);
    std::string twenty;
    for (int i = 0; i < 20; ++i) twenty += "word ";
    CHECK(classify_query(Query::make("q", twenty)).category == QueryCategory::Detail);

    CHECK(has_proper_noun("we visit Paris today"));
    CHECK_FALSE(has_proper_noun("The dog runs"));
    CHECK_FALSE(has_proper_noun("then I run"));

    StubProvider grammar;
    grammar.grammar_error = true;
    const auto t = classify_query(Query::make("q", "a dogs is run"), &grammar);
    CHECK(t.error_flag);
    CHECK(t.category == QueryCategory::Simple);
    CHECK_FALSE(classify_query(Query::make("q", "a dog runs")).error_flag);
    CHECK(to_string(QueryCategory::Detail) == "Detail");
}
