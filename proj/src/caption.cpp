#include "granalign/caption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace granalign {

const Caption& CaptionSet::aware_or_agnostic(std::size_t frame) const {
    const auto it = aware.find(frame);
    return it != aware.end() ? it->second : agnostic.at(frame);
}

std::size_t candidate_count(std::size_t frame_count, double top_k_percent) {
    // K * L_v / 100 in that order keeps integral products exact.
    const double raw = top_k_percent * static_cast<double>(frame_count) / 100.0;
    const auto k = static_cast<std::size_t>(std::ceil(raw));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(frame_count, 1));
}

std::vector<std::size_t> select_candidate_frames(const VideoMeta& video, const Query& query,
                                                 double top_k_percent,
                                                 const ModelProvider& provider) {
    if (!(top_k_percent > 0.0 && top_k_percent <= 100.0)) {
        throw Error(ErrorKind::InvalidArgument, "top_k_percent must be in (0,100]");
    }
    std::vector<double> scores(video.frame_count);
    for (std::size_t f = 0; f < video.frame_count; ++f) {
        scores[f] = provider.frame_query_similarity(video, f, query.text);
    }
    std::vector<std::size_t> order(video.frame_count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(candidate_count(video.frame_count, top_k_percent));
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<Caption> caption_all_frames(const VideoMeta& video, const ModelProvider& provider) {
    std::vector<Caption> out;
    out.reserve(video.frame_count);
    for (std::size_t f = 0; f < video.frame_count; ++f) {
        try {
            out.push_back(provider.caption_frame(video, f, nullptr));
        } catch (const Error& e) {
            throw Error(ErrorKind::CaptionFailed, "agnostic caption of " + video.video_id +
                                                      " frame " + std::to_string(f) + ": " +
                                                      e.what());
        }
    }
    return out;
}

CaptionSet build_caption_set(const VideoMeta& video, const Query& query,
                             const SemanticGuidance& guidance, const PipelineConfig& cfg,
                             const ModelProvider& provider) {
    if (guidance.empty()) {
        throw Error(ErrorKind::GuidanceEmpty, "caption guidance is empty");
    }
    CaptionSet set;
    set.video_id = video.video_id;
    set.agnostic = caption_all_frames(video, provider);
    set.candidate_frames = select_candidate_frames(video, query, cfg.top_k_percent, provider);
    for (const auto f : set.candidate_frames) {
        try {
            set.aware.emplace(f, provider.caption_frame(video, f, &guidance));
        } catch (const Error& e) {
            throw Error(ErrorKind::CaptionFailed, "aware caption of " + video.video_id +
                                                      " frame " + std::to_string(f) + ": " +
                                                      e.what());
        }
    }
    return set;
}

}  // namespace granalign
