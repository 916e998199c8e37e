#pragma once

#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "granalign/caption.hpp"
#include "granalign/providers.hpp"
#include "granalign/rewrite.hpp"

namespace granalign {

/** \brief Per-frame granular moment scores, each in [0,1]. */
struct FrameScoreSeries {
    std::string video_id;
    std::string query_id;
    std::vector<double> scores;
};

/// (1 + cos) / 2 of two unit embeddings, clamped to [0,1].
/// Throws DimensionMismatch when dimensions differ.
double similarity_g(const Embedding& a, const Embedding& b);

/// Average of 2m similarities: (1/2m) * sum_i (g_simplified_i + g_detailed_i).
double combine_frame_score(std::span<const std::pair<double, double>> pair_similarities);

/// Score of one frame. Off-candidate frames use their agnostic caption in
/// place of the aware one. Embeddings are requested directly, without memo.
double frame_score(const RewriteSet& rewrites, const CaptionSet& captions, std::size_t frame,
                   const ModelProvider& embedder);

/// Thread-safe text -> embedding memo.
class EmbeddingMemo {
public:
    Embedding get(const std::string& text, const ModelProvider& embedder);
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Embedding> memo_;
};

enum class Execution { Serial, Parallel };

/// Scores every frame. Each distinct query and caption text is embedded once.
FrameScoreSeries score_video(const RewriteSet& rewrites, const CaptionSet& captions,
                             const ModelProvider& embedder,
                             Execution execution = Execution::Parallel);

}  // namespace granalign
