#include <atomic>
#include <fstream>
#include <mutex>
#include <shared_mutex>

#include "cache_store.hpp"
#include "granalign/text.hpp"

namespace granalign {

struct CachingProvider::State {
    std::filesystem::path dir;
    CacheStore store;
    mutable std::shared_mutex mutex;
    std::atomic<std::size_t> inner_calls{0};

    template <typename Lookup>
    auto find(Lookup&& lookup) const {
        std::shared_lock lock(mutex);
        return lookup(store);
    }

    void record(std::string_view file_name, const nlohmann::json& j) {
        std::unique_lock lock(mutex);
        store.insert(file_name, j);
        std::ofstream out(dir / file_name, std::ios::app);
        if (!out) {
            throw Error(ErrorKind::IoError, "cannot append to " + (dir / file_name).string());
        }
        out << j.dump() << '\n';
    }
};

CachingProvider::CachingProvider(std::unique_ptr<ModelProvider> inner,
                                 const std::filesystem::path& cache_dir)
    : inner_(std::move(inner)), state_(std::make_unique<State>()) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoError, "cannot create cache directory " + cache_dir.string());
    }
    state_->dir = cache_dir;
    state_->store.load(cache_dir);
}

CachingProvider::~CachingProvider() = default;

std::size_t CachingProvider::inner_calls() const { return state_->inner_calls.load(); }

RewrittenQueryPair CachingProvider::rewrite(const Query& query, std::size_t pair_id,
                                            std::size_t sample_index) const {
    const auto key = CacheStore::rewrite_key(text::sha256_hex(query.text), pair_id, sample_index);
    if (auto hit = state_->find([&](const CacheStore& s) {
            const auto* p = s.find_rewrite(key);
            return p ? std::optional(*p) : std::nullopt;
        })) {
        return *hit;
    }
    ++state_->inner_calls;
    auto pair = inner_->rewrite(query, pair_id, sample_index);
    // Only contract-abiding pairs are persisted; violations stay retryable.
    if (!text::trim(pair.simplified).empty() && !text::trim(pair.detailed).empty() &&
        pair.simplified != pair.detailed) {
        state_->record(cache_files::kRewrites,
                       CacheStore::rewrite_record(query, pair_id, sample_index, pair));
    }
    return pair;
}

Caption CachingProvider::caption_frame(const VideoMeta& video, std::size_t frame_index,
                                       const SemanticGuidance* guidance) const {
    const auto mode = guidance ? CaptionMode::Aware : CaptionMode::Agnostic;
    std::optional<std::string> fp;
    if (guidance) fp = guidance->fingerprint();
    const auto key = CacheStore::caption_key(video.video_id, frame_index, mode, fp);
    if (auto hit = state_->find([&](const CacheStore& s) {
            const auto* t = s.find_caption(key);
            return t ? std::optional(*t) : std::nullopt;
        })) {
        return Caption{*hit, mode, fp};
    }
    ++state_->inner_calls;
    auto caption = inner_->caption_frame(video, frame_index, guidance);
    state_->record(cache_files::kCaptions, CacheStore::caption_record(video, frame_index, caption));
    return caption;
}

Embedding CachingProvider::embed(std::string_view input) const {
    const auto sha = text::sha256_hex(input);
    if (auto hit = state_->find([&](const CacheStore& s) {
            const auto* v = s.find_embedding(sha);
            return v ? std::optional(*v) : std::nullopt;
        })) {
        return Embedding{std::move(*hit)};
    }
    ++state_->inner_calls;
    auto e = inner_->embed(input);
    state_->record(cache_files::kEmbeddings, CacheStore::embedding_record(input, e));
    return e;
}

double CachingProvider::frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                               std::string_view query_text) const {
    const auto key =
        CacheStore::similarity_key(video.video_id, frame_index, text::sha256_hex(query_text));
    if (auto hit = state_->find([&](const CacheStore& s) {
            const auto* v = s.find_similarity(key);
            return v ? std::optional(*v) : std::nullopt;
        })) {
        return *hit;
    }
    ++state_->inner_calls;
    const double score = inner_->frame_query_similarity(video, frame_index, query_text);
    state_->record(cache_files::kSimilarity,
                   CacheStore::similarity_record(video, frame_index, query_text, score));
    return score;
}

}  // namespace granalign
