#include <fstream>
#include <numeric>

#include <json.hpp>

#include "granalign/providers.hpp"
#include "granalign/text.hpp"

namespace granalign {

void MockScene::add(const std::string& video_id, Range range) {
    if (range.start > range.end) {
        throw Error(ErrorKind::InvalidArgument, "mock scene range has start > end");
    }
    ranges_[video_id].push_back(std::move(range));
}

std::string MockScene::tokens_for(const std::string& video_id, std::size_t frame_index) const {
    const auto it = ranges_.find(video_id);
    if (it == ranges_.end()) {
        return {};
    }
    std::vector<std::string> parts;
    for (const auto& r : it->second) {
        if (frame_index >= r.start && frame_index <= r.end && !r.tokens.empty()) {
            parts.push_back(r.tokens);
        }
    }
    return text::join(parts, " ");
}

MockScene MockScene::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open mock scene " + path.string());
    }
    MockScene scene;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            scene.add(j.at("video_id").get<std::string>(),
                      Range{j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>(),
                            j.at("tokens").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::ParseError,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return scene;
}

RewrittenQueryPair MockProvider::rewrite(const Query& query, std::size_t instruction_pair_id,
                                         std::size_t /*sample_index*/) const {
    instruction_pair(instruction_pair_id);  // validates the id
    const auto raw = text::split_whitespace(query.text);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < raw.size() && i < kSimplifiedTokens; ++i) {
        auto tok = text::normalize_token(raw[i]);
        if (!tok.empty() && !text::is_stopword(tok)) {
            kept.push_back(std::move(tok));
        }
    }
    return RewrittenQueryPair{text::join(kept, " "), query.text};
}

Caption MockProvider::caption_frame(const VideoMeta& video, std::size_t frame_index,
                                    const SemanticGuidance* guidance) const {
    if (frame_index >= video.frame_count) {
        throw Error(ErrorKind::InvalidArgument, "frame index out of range");
    }
    std::string caption =
        "frame " + video.video_id + ":" + std::to_string(frame_index);
    const auto planted = scene_.tokens_for(video.video_id, frame_index);
    if (!planted.empty()) {
        caption += " " + planted;
    }
    if (guidance == nullptr) {
        return Caption{std::move(caption), CaptionMode::Agnostic, std::nullopt};
    }
    for (const auto& e : guidance->entities) caption += " " + e;
    for (const auto& a : guidance->actions) caption += " " + a;
    return Caption{std::move(caption), CaptionMode::Aware, guidance->fingerprint()};
}

Embedding MockProvider::embed(std::string_view input) const {
    if (text::trim(input).empty()) {
        throw Error(ErrorKind::InvalidArgument, "cannot embed empty text");
    }
    std::vector<double> acc(kDim, 0.0);
    for (const auto& tok : text::normalized_tokens(input)) {
        if (text::is_stopword(tok)) continue;
        const auto h = text::stable_hash(seed_, tok);
        const auto index = static_cast<std::size_t>(h % kDim);
        acc[index] += ((h >> 32) & 1U) ? 1.0 : -1.0;
    }
    const double sq = std::inner_product(acc.begin(), acc.end(), acc.begin(), 0.0);
    if (sq == 0.0) {
        acc.assign(kDim, 0.0);
        acc[0] = 1.0;
        return Embedding{std::move(acc)};
    }
    return normalized(std::move(acc));
}

double MockProvider::frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                            std::string_view query_text) const {
    const auto q = embed(query_text);
    const auto c = embed(caption_frame(video, frame_index, nullptr).text);
    return std::inner_product(q.vector.begin(), q.vector.end(), c.vector.begin(), 0.0);
}

}  // namespace granalign
