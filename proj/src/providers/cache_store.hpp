#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "granalign/providers.hpp"

namespace granalign {

/** \brief In-memory image of a cache directory plus the record formats. */
class CacheStore {
public:
    static std::string caption_key(const std::string& video_id, std::size_t frame_index,
                                   CaptionMode mode, const std::optional<std::string>& fingerprint);
    static std::string similarity_key(const std::string& video_id, std::size_t frame_index,
                                      const std::string& query_sha256);
    static std::string rewrite_key(const std::string& query_sha256, std::size_t pair_id,
                                   std::size_t sample_index);

    static nlohmann::json caption_record(const VideoMeta& video, std::size_t frame_index,
                                         const Caption& caption);
    static nlohmann::json embedding_record(std::string_view text, const Embedding& e);
    static nlohmann::json similarity_record(const VideoMeta& video, std::size_t frame_index,
                                            std::string_view query_text, double score);
    static nlohmann::json rewrite_record(const Query& query, std::size_t pair_id,
                                         std::size_t sample_index, const RewrittenQueryPair& p);

    /// Missing files are treated as empty caches.
    void load(const std::filesystem::path& dir);

    /// Inserts a parsed record of the given file kind.
    void insert(std::string_view file_name, const nlohmann::json& record);

    const std::string* find_caption(const std::string& key) const;
    const std::vector<double>* find_embedding(const std::string& text_sha256) const;
    const double* find_similarity(const std::string& key) const;
    const RewrittenQueryPair* find_rewrite(const std::string& key) const;

    std::size_t size() const;

private:
    std::unordered_map<std::string, std::string> captions_;
    std::unordered_map<std::string, std::vector<double>> embeddings_;
    std::unordered_map<std::string, double> similarity_;
    std::unordered_map<std::string, RewrittenQueryPair> rewrites_;
};

}  // namespace granalign
