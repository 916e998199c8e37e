#include <cmath>
#include <fstream>

#include "cache_store.hpp"
#include "granalign/text.hpp"

namespace granalign {

namespace {
constexpr char kSep = '\x1f';
}

std::string CacheStore::caption_key(const std::string& video_id, std::size_t frame_index,
                                    CaptionMode mode,
                                    const std::optional<std::string>& fingerprint) {
    std::string key = video_id;
    key += kSep;
    key += std::to_string(frame_index);
    key += kSep;
    key += to_string(mode);
    key += kSep;
    key += fingerprint.value_or("");
    return key;
}

std::string CacheStore::similarity_key(const std::string& video_id, std::size_t frame_index,
                                       const std::string& query_sha256) {
    return video_id + kSep + std::to_string(frame_index) + kSep + query_sha256;
}

std::string CacheStore::rewrite_key(const std::string& query_sha256, std::size_t pair_id,
                                    std::size_t sample_index) {
    return query_sha256 + kSep + std::to_string(pair_id) + kSep + std::to_string(sample_index);
}

nlohmann::json CacheStore::caption_record(const VideoMeta& video, std::size_t frame_index,
                                          const Caption& caption) {
    nlohmann::json j;
    j["video_id"] = video.video_id;
    j["frame_index"] = frame_index;
    j["mode"] = std::string(to_string(caption.mode));
    j["guidance_fingerprint"] =
        caption.guidance_fingerprint ? nlohmann::json(*caption.guidance_fingerprint) : nullptr;
    j["text"] = caption.text;
    return j;
}

nlohmann::json CacheStore::embedding_record(std::string_view input, const Embedding& e) {
    return {{"text_sha256", text::sha256_hex(input)}, {"vector", e.vector}};
}

nlohmann::json CacheStore::similarity_record(const VideoMeta& video, std::size_t frame_index,
                                             std::string_view query_text, double score) {
    return {{"video_id", video.video_id},
            {"frame_index", frame_index},
            {"query_sha256", text::sha256_hex(query_text)},
            {"score", score}};
}

nlohmann::json CacheStore::rewrite_record(const Query& query, std::size_t pair_id,
                                          std::size_t sample_index, const RewrittenQueryPair& p) {
    return {{"query_sha256", text::sha256_hex(query.text)},
            {"instruction_pair", pair_id},
            {"sample_index", sample_index},
            {"simplified", p.simplified},
            {"detailed", p.detailed}};
}

void CacheStore::insert(std::string_view file_name, const nlohmann::json& j) {
    if (file_name == cache_files::kCaptions) {
        const auto mode = caption_mode_from_string(j.at("mode").get<std::string>());
        std::optional<std::string> fp;
        if (j.contains("guidance_fingerprint") && !j.at("guidance_fingerprint").is_null()) {
            fp = j.at("guidance_fingerprint").get<std::string>();
        }
        if ((mode == CaptionMode::Aware) != fp.has_value()) {
            throw Error(ErrorKind::SchemaError,
                        "guidance_fingerprint must be present iff mode is aware");
        }
        captions_[caption_key(j.at("video_id").get<std::string>(),
                              j.at("frame_index").get<std::size_t>(), mode, fp)] =
            j.at("text").get<std::string>();
    } else if (file_name == cache_files::kEmbeddings) {
        embeddings_[j.at("text_sha256").get<std::string>()] =
            j.at("vector").get<std::vector<double>>();
    } else if (file_name == cache_files::kSimilarity) {
        similarity_[similarity_key(j.at("video_id").get<std::string>(),
                                   j.at("frame_index").get<std::size_t>(),
                                   j.at("query_sha256").get<std::string>())] =
            j.at("score").get<double>();
    } else if (file_name == cache_files::kRewrites) {
        rewrites_[rewrite_key(j.at("query_sha256").get<std::string>(),
                              j.at("instruction_pair").get<std::size_t>(),
                              j.at("sample_index").get<std::size_t>())] =
            RewrittenQueryPair{j.at("simplified").get<std::string>(),
                               j.at("detailed").get<std::string>()};
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown cache file " + std::string(file_name));
    }
}

void CacheStore::load(const std::filesystem::path& dir) {
    for (auto name : {cache_files::kCaptions, cache_files::kEmbeddings, cache_files::kSimilarity,
                      cache_files::kRewrites}) {
        const auto path = dir / name;
        std::ifstream in(path);
        if (!in) continue;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (text::trim(line).empty()) continue;
            try {
                insert(name, nlohmann::json::parse(line));
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::ParseError,
                            path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
}

const std::string* CacheStore::find_caption(const std::string& key) const {
    const auto it = captions_.find(key);
    return it == captions_.end() ? nullptr : &it->second;
}

const std::vector<double>* CacheStore::find_embedding(const std::string& sha) const {
    const auto it = embeddings_.find(sha);
    return it == embeddings_.end() ? nullptr : &it->second;
}

const double* CacheStore::find_similarity(const std::string& key) const {
    const auto it = similarity_.find(key);
    return it == similarity_.end() ? nullptr : &it->second;
}

const RewrittenQueryPair* CacheStore::find_rewrite(const std::string& key) const {
    const auto it = rewrites_.find(key);
    return it == rewrites_.end() ? nullptr : &it->second;
}

std::size_t CacheStore::size() const {
    return captions_.size() + embeddings_.size() + similarity_.size() + rewrites_.size();
}

// ---------------------------------------------------------------------------

FileBackedProvider::FileBackedProvider(const std::filesystem::path& cache_dir)
    : store_(std::make_unique<CacheStore>()) {
    if (!std::filesystem::is_directory(cache_dir)) {
        throw Error(ErrorKind::IoError, "cache directory " + cache_dir.string() + " does not exist");
    }
    store_->load(cache_dir);
}

FileBackedProvider::~FileBackedProvider() = default;

RewrittenQueryPair FileBackedProvider::rewrite(const Query& query, std::size_t pair_id,
                                               std::size_t sample_index) const {
    const auto key = CacheStore::rewrite_key(text::sha256_hex(query.text), pair_id, sample_index);
    if (const auto* hit = store_->find_rewrite(key)) return *hit;
    throw Error(ErrorKind::CacheMiss, "no cached rewrite for query '" + query.id + "' sample " +
                                          std::to_string(sample_index));
}

Caption FileBackedProvider::caption_frame(const VideoMeta& video, std::size_t frame_index,
                                          const SemanticGuidance* guidance) const {
    const auto mode = guidance ? CaptionMode::Aware : CaptionMode::Agnostic;
    std::optional<std::string> fp;
    if (guidance) fp = guidance->fingerprint();
    const auto key = CacheStore::caption_key(video.video_id, frame_index, mode, fp);
    if (const auto* hit = store_->find_caption(key)) {
        return Caption{*hit, mode, fp};
    }
    throw Error(ErrorKind::CacheMiss, "no cached " + std::string(to_string(mode)) +
                                          " caption for " + video.video_id + ":" +
                                          std::to_string(frame_index));
}

Embedding FileBackedProvider::embed(std::string_view input) const {
    if (const auto* hit = store_->find_embedding(text::sha256_hex(input))) {
        Embedding e{*hit};
        if (std::abs(e.norm() - 1.0) > 1e-9) {
            return normalized(std::move(e.vector));
        }
        return e;
    }
    throw Error(ErrorKind::CacheMiss, "no cached embedding for '" + std::string(input) + "'");
}

double FileBackedProvider::frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                                  std::string_view query_text) const {
    const auto key =
        CacheStore::similarity_key(video.video_id, frame_index, text::sha256_hex(query_text));
    if (const auto* hit = store_->find_similarity(key)) return *hit;
    throw Error(ErrorKind::CacheMiss, "no cached similarity for " + video.video_id + ":" +
                                          std::to_string(frame_index));
}

}  // namespace granalign
