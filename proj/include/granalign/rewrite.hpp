#pragma once

#include <string>
#include <vector>

#include "granalign/core.hpp"
#include "granalign/providers.hpp"

namespace granalign {

/** \brief The original query plus its deduplicated rewrite pairs. */
struct RewriteSet {
    Query original;
    std::vector<RewrittenQueryPair> pairs;
    std::vector<std::string> warnings;

    std::size_t m() const { return pairs.size(); }
};

enum class QueryCategory { Simple, Detail, Else };

std::string_view to_string(QueryCategory c);

struct QueryType {
    QueryCategory category{QueryCategory::Else};
    bool error_flag{false};
};

/// Requests `cfg.num_rewrites` samples of the configured instruction pair in
/// sample order. Failed samples and duplicate pairs are dropped with a
/// warning; throws RewriteFailed when nothing usable remains.
RewriteSet generate_rewrites(const Query& query, const PipelineConfig& cfg,
                             const ModelProvider& provider);

/// Heuristic extraction: tokens ending in "ing"/"ed" are actions, the other
/// non-stopword tokens are entities.
SemanticGuidance heuristic_guidance(const Query& query);

/// Uses the provider's extractor when it has one (items not found in the
/// query are discarded), falling back to the heuristic. Throws GuidanceEmpty
/// when the query has no content words.
SemanticGuidance extract_guidance(const Query& query, const ModelProvider* provider = nullptr);

/// Capitalized token that is not sentence-initial and not a common
/// article/pronoun.
bool has_proper_noun(const std::string& text);

/// Simple (<= 6 tokens), else Detail (>= 20 tokens or a proper noun), else Else.
/// error_flag comes from the provider's grammar check when available.
QueryType classify_query(const Query& query, const ModelProvider* grammar_checker = nullptr);

}  // namespace granalign
