#include "granalign/score.hpp"

#include <mutex>

#include "granalign/kernels.hpp"

namespace granalign {

double similarity_g(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "embedding dimensions " +
                                                      std::to_string(a.dim()) + " and " +
                                                      std::to_string(b.dim()) + " differ");
    }
    return kernels::normalized_cosine(a.vector.data(), b.vector.data(), a.dim());
}

double combine_frame_score(std::span<const std::pair<double, double>> pair_similarities) {
    kernels::GranularAccumulator acc;
    for (const auto& [g_s, g_d] : pair_similarities) {
        acc.add(g_s, g_d);
    }
    return acc.value();
}

double frame_score(const RewriteSet& rewrites, const CaptionSet& captions, std::size_t frame,
                   const ModelProvider& embedder) {
    if (frame >= captions.agnostic.size()) {
        throw Error(ErrorKind::InvalidArgument, "frame index out of range");
    }
    const auto agn = embedder.embed(captions.agnostic[frame].text);
    const auto awr = embedder.embed(captions.aware_or_agnostic(frame).text);
    std::vector<std::pair<double, double>> gs;
    gs.reserve(rewrites.pairs.size());
    for (const auto& pair : rewrites.pairs) {
        gs.emplace_back(similarity_g(embedder.embed(pair.simplified), agn),
                        similarity_g(embedder.embed(pair.detailed), awr));
    }
    return combine_frame_score(gs);
}

Embedding EmbeddingMemo::get(const std::string& text, const ModelProvider& embedder) {
    {
        std::shared_lock lock(mutex_);
        if (const auto it = memo_.find(text); it != memo_.end()) {
            return it->second;
        }
    }
    auto e = embedder.embed(text);
    std::unique_lock lock(mutex_);
    return memo_.try_emplace(text, std::move(e)).first->second;
}

std::size_t EmbeddingMemo::size() const {
    std::shared_lock lock(mutex_);
    return memo_.size();
}

FrameScoreSeries score_video(const RewriteSet& rewrites, const CaptionSet& captions,
                             const ModelProvider& embedder, Execution execution) {
    const std::size_t frames = captions.agnostic.size();
    const std::size_t m = rewrites.pairs.size();
    if (m == 0) {
        throw Error(ErrorKind::InvalidArgument, "rewrite set is empty");
    }
    FrameScoreSeries series{captions.video_id, rewrites.original.id, std::vector<double>(frames)};
    if (frames == 0) {
        return series;
    }

    EmbeddingMemo memo;
    std::size_t dim = 0;
    auto append = [&](std::vector<double>& matrix, const std::string& text) {
        const auto e = memo.get(text, embedder);
        if (dim == 0) {
            dim = e.dim();
        } else if (e.dim() != dim) {
            throw Error(ErrorKind::DimensionMismatch, "embedding dimension changed within a query");
        }
        matrix.insert(matrix.end(), e.vector.begin(), e.vector.end());
    };

    std::vector<double> simplified, detailed, agnostic, aware;
    for (const auto& pair : rewrites.pairs) {
        append(simplified, pair.simplified);
        append(detailed, pair.detailed);
    }
    for (std::size_t f = 0; f < frames; ++f) {
        append(agnostic, captions.agnostic[f].text);
        append(aware, captions.aware_or_agnostic(f).text);
    }

    const kernels::ScoreMatrices matrices{dim,       m,        frames,  simplified,
                                          detailed,  agnostic, aware};
    if (execution == Execution::Parallel) {
        kernels::granular_scores_omp(matrices, series.scores);
    } else {
        kernels::granular_scores_serial(matrices, series.scores);
    }
    return series;
}

}  // namespace granalign
