#pragma once

#include <string>
#include <vector>

#include "granalign/core.hpp"
#include "granalign/score.hpp"

namespace granalign {

/** \brief Candidate span with its relevance and length terms. */
struct ScoredSpan {
    FrameIndexSpan span;
    double mu{0.0};     // mean frame score over the span
    double rho{0.0};    // span length / total length of the batch
    double score{0.0};  // (1 - lambda) * mu + lambda * rho
};

struct ScoredTimeSpan {
    TimeSpan span;
    double score{0.0};

    friend bool operator==(const ScoredTimeSpan&, const ScoredTimeSpan&) = default;
};

struct PredictedSpan {
    TimeSpan span;
    double score{0.0};
    FrameIndexSpan frames;
    double mu{0.0};
    double rho{0.0};
};

/** \brief Ranked spans for one query plus the per-frame saliency they came from. */
struct MomentPrediction {
    std::string query_id;
    std::string video_id;
    std::vector<PredictedSpan> spans;  // score descending
    std::vector<double> saliency;
};

/// Frames whose score reaches the lower edge of the top `top_bins` of
/// `bins` equal-width bins over [min, max]. All frames when max == min.
std::vector<std::size_t> select_high_frames(const FrameScoreSeries& series, std::size_t bins,
                                            std::size_t top_bins);

/// Joins consecutive selected frames i < j when j - i - 1 <= tau.
std::vector<FrameIndexSpan> merge_frames(const std::vector<std::size_t>& selected,
                                         std::size_t tau);

double span_mean(const FrameScoreSeries& series, const FrameIndexSpan& span);

/// Nearest-rank n-th percentile of the frame scores; nullopt when n = 0.
std::optional<double> nearest_rank_percentile(std::vector<double> values, double percent);

/// Drops spans whose mean score is below the n-th percentile of all frame
/// scores. If every span would go, the one with the highest mean is kept.
std::vector<FrameIndexSpan> filter_low_spans(const std::vector<FrameIndexSpan>& spans,
                                             const FrameScoreSeries& series, double percent);

std::vector<ScoredSpan> score_spans(const std::vector<FrameIndexSpan>& spans,
                                    const FrameScoreSeries& series, double lambda);

/// Ranking used by NMS and predictions: score desc, start asc, length desc.
bool ranks_before(const ScoredTimeSpan& a, const ScoredTimeSpan& b);

/// Greedy NMS. Returns indices into `spans` of the kept entries in rank order.
/// A span is suppressed when its IoU with a kept span is strictly above theta.
std::vector<std::size_t> nms_indices(const std::vector<ScoredTimeSpan>& spans, double theta);

std::vector<ScoredTimeSpan> nms(const std::vector<ScoredTimeSpan>& spans, double theta);

/// select_high_frames -> merge_frames -> filter_low_spans -> score_spans ->
/// frames_to_time -> nms.
MomentPrediction propose(const FrameScoreSeries& series, const PipelineConfig& cfg);

}  // namespace granalign
