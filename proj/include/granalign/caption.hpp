#pragma once

#include <map>
#include <vector>

#include "granalign/core.hpp"
#include "granalign/providers.hpp"

namespace granalign {

/** \brief Dense query-agnostic captions plus sparse query-aware captions.
 *
 * `aware` is keyed by exactly the entries of `candidate_frames`.
 */
struct CaptionSet {
    std::string video_id;
    std::vector<Caption> agnostic;
    std::map<std::size_t, Caption> aware;
    std::vector<std::size_t> candidate_frames;

    /// The aware caption for candidate frames, the agnostic one elsewhere.
    const Caption& aware_or_agnostic(std::size_t frame) const;
};

/// L_k = max(1, ceil(K/100 * L_v)).
std::size_t candidate_count(std::size_t frame_count, double top_k_percent);

/// Top frames by frame/query similarity, ties to the lower index, returned
/// in ascending frame order.
std::vector<std::size_t> select_candidate_frames(const VideoMeta& video, const Query& query,
                                                 double top_k_percent,
                                                 const ModelProvider& provider);

/// Captions every frame agnostically and the candidate frames with guidance.
/// Any per-frame provider failure raises CaptionFailed naming the frame.
CaptionSet build_caption_set(const VideoMeta& video, const Query& query,
                             const SemanticGuidance& guidance, const PipelineConfig& cfg,
                             const ModelProvider& provider);

/// Agnostic captions only; used to precompute the query-independent cache.
std::vector<Caption> caption_all_frames(const VideoMeta& video, const ModelProvider& provider);

}  // namespace granalign
