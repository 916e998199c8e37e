#pragma once

/** \file providers.hpp
 *  \brief Contract for the external model capabilities the pipeline relies on.
 *
 * Four capabilities are needed: query rewriting, frame captioning, sentence
 * embedding and frame/query visual similarity. Each backend implements all of
 * them:
 *   - MockProvider: deterministic, hash-based; used for tests and fixtures.
 *   - FileBackedProvider: reads precomputed JSON-lines caches; CacheMiss otherwise.
 *   - HttpProvider: OpenAI-compatible chat-completions and embeddings endpoints.
 *   - CachingProvider: cache-first wrapper that records misses served by another backend.
 *
 * Every backend must tolerate concurrent calls.
 */

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "granalign/core.hpp"

namespace granalign {

/** \brief Unit-norm sentence embedding. */
struct Embedding {
    std::vector<double> vector;

    std::size_t dim() const { return vector.size(); }
    double norm() const;
};

/// Returns `v / |v|`; throws ContractViolation for a zero or non-finite vector.
Embedding normalized(std::vector<double> v);

/** \brief Entities and actions pulled out of a query to steer captioning. */
struct SemanticGuidance {
    std::vector<std::string> entities;
    std::vector<std::string> actions;

    bool empty() const { return entities.empty() && actions.empty(); }
    /// Short stable hash of the guidance content; part of aware-caption cache keys.
    std::string fingerprint() const;
};

enum class CaptionMode { Agnostic, Aware };

std::string_view to_string(CaptionMode mode);
CaptionMode caption_mode_from_string(std::string_view s);

struct Caption {
    std::string text;
    CaptionMode mode{CaptionMode::Agnostic};
    std::optional<std::string> guidance_fingerprint;  // present iff mode == Aware
};

/** \brief One (simplified, detailed) reformulation of a query. */
struct RewrittenQueryPair {
    std::string simplified;
    std::string detailed;

    friend bool operator==(const RewrittenQueryPair&, const RewrittenQueryPair&) = default;
};

/** \brief Prompt text used to request one rewrite pair. */
struct InstructionPair {
    std::size_t id{0};
    std::string simplified_instruction;
    std::string detailed_instruction;
};

/// The bundled instruction set (ids start at 1).
const std::vector<InstructionPair>& instruction_pairs();
const InstructionPair& instruction_pair(std::size_t id);
std::string_view instruction_set_version();
std::vector<InstructionPair> parse_instruction_pairs(std::string_view asset);

class ModelProvider {
public:
    virtual ~ModelProvider() = default;

    virtual RewrittenQueryPair rewrite(const Query& query, std::size_t instruction_pair_id,
                                       std::size_t sample_index) const = 0;

    /// Aware caption iff `guidance` is non-null.
    virtual Caption caption_frame(const VideoMeta& video, std::size_t frame_index,
                                  const SemanticGuidance* guidance) const = 0;

    virtual Embedding embed(std::string_view text) const = 0;

    virtual double frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                          std::string_view query_text) const = 0;

    /// LLM-backed guidance extraction; nullopt when the backend has none.
    virtual std::optional<SemanticGuidance> extract_guidance(const Query&) const {
        return std::nullopt;
    }

    /// Grammar check used to flag error queries; nullopt when unavailable.
    virtual std::optional<bool> has_grammar_error(const Query&) const { return std::nullopt; }
};

/// Calls `provider.rewrite`, enforcing non-empty and distinct outputs.
/// A contract violation is retried once; remote failures are not retried.
RewrittenQueryPair checked_rewrite(const ModelProvider& provider, const Query& query,
                                   std::size_t instruction_pair_id, std::size_t sample_index);

// ---------------------------------------------------------------------------
// Mock backend

/** \brief Tokens planted on frame ranges of synthetic videos. */
class MockScene {
public:
    struct Range {
        std::size_t start{0};
        std::size_t end{0};  // inclusive
        std::string tokens;
    };

    void add(const std::string& video_id, Range range);
    /// Tokens of every range covering the frame, in insertion order.
    std::string tokens_for(const std::string& video_id, std::size_t frame_index) const;

    /// JSON-lines: {"video_id":..., "start":..., "end":..., "tokens":...}
    static MockScene load(const std::filesystem::path& path);

private:
    std::map<std::string, std::vector<Range>> ranges_;
};

class MockProvider final : public ModelProvider {
public:
    static constexpr std::size_t kDim = 64;
    static constexpr std::size_t kSimplifiedTokens = 6;

    explicit MockProvider(std::uint64_t seed = 0, MockScene scene = {})
        : seed_(seed), scene_(std::move(scene)) {}

    RewrittenQueryPair rewrite(const Query& query, std::size_t instruction_pair_id,
                               std::size_t sample_index) const override;
    Caption caption_frame(const VideoMeta& video, std::size_t frame_index,
                          const SemanticGuidance* guidance) const override;
    Embedding embed(std::string_view text) const override;
    double frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                  std::string_view query_text) const override;

private:
    std::uint64_t seed_;
    MockScene scene_;
};

// ---------------------------------------------------------------------------
// File-backed caches

/// File names inside a cache directory.
namespace cache_files {
inline constexpr std::string_view kCaptions = "captions.jsonl";
inline constexpr std::string_view kEmbeddings = "embeddings.jsonl";
inline constexpr std::string_view kSimilarity = "similarity.jsonl";
inline constexpr std::string_view kRewrites = "rewrites.jsonl";
}  // namespace cache_files

class CacheStore;

/** \brief Read-only view over a cache directory. Lookups are lock-free after load. */
class FileBackedProvider final : public ModelProvider {
public:
    explicit FileBackedProvider(const std::filesystem::path& cache_dir);
    ~FileBackedProvider() override;

    RewrittenQueryPair rewrite(const Query& query, std::size_t instruction_pair_id,
                               std::size_t sample_index) const override;
    Caption caption_frame(const VideoMeta& video, std::size_t frame_index,
                          const SemanticGuidance* guidance) const override;
    Embedding embed(std::string_view text) const override;
    double frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                  std::string_view query_text) const override;

    const CacheStore& store() const { return *store_; }

private:
    std::unique_ptr<CacheStore> store_;
};

/** \brief Serves from a cache directory first and records misses from `inner`. */
class CachingProvider final : public ModelProvider {
public:
    CachingProvider(std::unique_ptr<ModelProvider> inner, const std::filesystem::path& cache_dir);
    ~CachingProvider() override;

    RewrittenQueryPair rewrite(const Query& query, std::size_t instruction_pair_id,
                               std::size_t sample_index) const override;
    Caption caption_frame(const VideoMeta& video, std::size_t frame_index,
                          const SemanticGuidance* guidance) const override;
    Embedding embed(std::string_view text) const override;
    double frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                  std::string_view query_text) const override;
    std::optional<SemanticGuidance> extract_guidance(const Query& q) const override {
        return inner_->extract_guidance(q);
    }
    std::optional<bool> has_grammar_error(const Query& q) const override {
        return inner_->has_grammar_error(q);
    }

    /// Number of calls forwarded to the inner backend.
    std::size_t inner_calls() const;

private:
    struct State;
    std::unique_ptr<ModelProvider> inner_;
    std::unique_ptr<State> state_;
};

// ---------------------------------------------------------------------------
// HTTP backend

struct HttpOptions {
    std::string endpoint;  // e.g. http://localhost:8000 (a trailing /v1 is accepted)
    std::string chat_model;
    std::string caption_model;
    std::string embed_model;
    std::string similarity_model;
    std::optional<std::string> auth_token_env;
    /// Placeholders: {video_id}, {frame}, {time}
    std::string frame_url_template{"file://frames/{video_id}/{frame}.jpg"};
    std::size_t max_in_flight{8};
    int timeout_s{60};
    bool grammar_check{false};
};

class HttpProvider final : public ModelProvider {
public:
    explicit HttpProvider(HttpOptions options);
    ~HttpProvider() override;

    RewrittenQueryPair rewrite(const Query& query, std::size_t instruction_pair_id,
                               std::size_t sample_index) const override;
    Caption caption_frame(const VideoMeta& video, std::size_t frame_index,
                          const SemanticGuidance* guidance) const override;
    Embedding embed(std::string_view text) const override;
    double frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                  std::string_view query_text) const override;
    std::optional<SemanticGuidance> extract_guidance(const Query& query) const override;
    std::optional<bool> has_grammar_error(const Query& query) const override;

    std::string frame_url(const VideoMeta& video, std::size_t frame_index) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------

enum class ProviderKind { Http, FileBacked, Mock };

struct ProviderSpec {
    ProviderKind kind{ProviderKind::Mock};
    std::optional<std::string> endpoint;
    std::optional<std::string> model_name;
    std::optional<std::string> auth_token_env;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> mock_scene;
    HttpOptions http;  // endpoint/model/auth above override the matching fields

    void validate() const;
};

std::string_view to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(std::string_view s);

/// Builds the backend; Http and Mock specs with a cache_dir are wrapped in a
/// CachingProvider.
std::unique_ptr<ModelProvider> make_provider(const ProviderSpec& spec);

}  // namespace granalign
