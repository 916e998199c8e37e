#include "granalign/rewrite.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "granalign/text.hpp"

namespace granalign {

std::string_view to_string(QueryCategory c) {
    switch (c) {
        case QueryCategory::Simple: return "Simple";
        case QueryCategory::Detail: return "Detail";
        case QueryCategory::Else: return "Else";
    }
    return "Else";
}

RewriteSet generate_rewrites(const Query& query, const PipelineConfig& cfg,
                             const ModelProvider& provider) {
    RewriteSet set{query, {}, {}};
    std::string last_error;
    for (std::size_t i = 0; i < cfg.num_rewrites; ++i) {
        try {
            auto pair = checked_rewrite(provider, query, cfg.instruction_pair, i);
            if (std::find(set.pairs.begin(), set.pairs.end(), pair) != set.pairs.end()) {
                continue;
            }
            set.pairs.push_back(std::move(pair));
        } catch (const Error& e) {
            last_error = e.what();
            set.warnings.push_back("rewrite sample " + std::to_string(i) + " of query '" +
                                   query.id + "' failed: " + e.what());
        }
    }
    if (set.pairs.empty()) {
        throw Error(ErrorKind::RewriteFailed,
                    "no usable rewrite for query '" + query.id + "': " + last_error);
    }
    if (set.pairs.size() < cfg.num_rewrites) {
        set.warnings.push_back("query '" + query.id + "' has " + std::to_string(set.pairs.size()) +
                               " distinct rewrite pair(s) of " + std::to_string(cfg.num_rewrites) +
                               " requested");
    }
    for (const auto& w : set.warnings) {
        warn(w);
    }
    return set;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

void push_unique(std::vector<std::string>& v, std::string item) {
    if (std::find(v.begin(), v.end(), item) == v.end()) {
        v.push_back(std::move(item));
    }
}

}  // namespace

SemanticGuidance heuristic_guidance(const Query& query) {
    SemanticGuidance g;
    for (auto& tok : text::normalized_tokens(query.text)) {
        if (text::is_stopword(tok)) continue;
        if (ends_with(tok, "ing") || ends_with(tok, "ed")) {
            push_unique(g.actions, std::move(tok));
        } else {
            push_unique(g.entities, std::move(tok));
        }
    }
    if (g.empty()) {
        throw Error(ErrorKind::GuidanceEmpty, "query '" + query.id + "' has no content words");
    }
    return g;
}

SemanticGuidance extract_guidance(const Query& query, const ModelProvider* provider) {
    if (provider != nullptr) {
        if (auto extracted = provider->extract_guidance(query)) {
            SemanticGuidance checked;
            for (auto& e : extracted->entities) {
                if (text::contains_case_insensitive(query.text, e)) push_unique(checked.entities, e);
            }
            for (auto& a : extracted->actions) {
                if (text::contains_case_insensitive(query.text, a)) push_unique(checked.actions, a);
            }
            if (!checked.empty()) {
                return checked;
            }
            warn("guidance extracted for query '" + query.id +
                 "' does not match the query text; using the heuristic");
        }
    }
    return heuristic_guidance(query);
}

bool has_proper_noun(const std::string& query_text) {
    static const std::unordered_set<std::string_view> allow = {
        "I", "A", "An", "The", "He", "She", "It", "They", "We", "You", "His", "Her", "Their",
        "Its", "Our", "My", "Your", "This", "That", "These", "Those", "There",
    };
    const auto tokens = text::split_whitespace(query_text);
    bool sentence_start = true;
    for (const auto& raw : tokens) {
        std::size_t b = 0;
        while (b < raw.size() && std::ispunct(static_cast<unsigned char>(raw[b]))) ++b;
        std::string word = raw.substr(b);
        while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) {
            word.pop_back();
        }
        const bool capitalized =
            !word.empty() && std::isupper(static_cast<unsigned char>(word.front()));
        if (capitalized && !sentence_start && !allow.contains(word)) {
            return true;
        }
        const char last = raw.back();
        sentence_start = last == '.' || last == '!' || last == '?';
    }
    return false;
}

QueryType classify_query(const Query& query, const ModelProvider* grammar_checker) {
    QueryType t;
    const auto count = text::split_whitespace(query.text).size();
    if (count <= 6) {
        t.category = QueryCategory::Simple;
    } else if (count >= 20 || has_proper_noun(query.text)) {
        t.category = QueryCategory::Detail;
    } else {
        t.category = QueryCategory::Else;
    }
    if (grammar_checker != nullptr) {
        t.error_flag = grammar_checker->has_grammar_error(query).value_or(false);
    }
    return t;
}

}  // namespace granalign
