#include "granalign/propose.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace granalign {

std::vector<std::size_t> select_high_frames(const FrameScoreSeries& series, std::size_t bins,
                                            std::size_t top_bins) {
    if (series.scores.empty()) {
        throw Error(ErrorKind::EmptySeries, "score series of '" + series.query_id + "' is empty");
    }
    if (bins < 1 || top_bins < 1 || top_bins > bins) {
        throw Error(ErrorKind::InvalidArgument, "need 1 <= top_bins <= bins");
    }
    const auto [lo_it, hi_it] = std::minmax_element(series.scores.begin(), series.scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<std::size_t> out;
    out.reserve(series.scores.size());
    if (hi == lo) {
        out.resize(series.scores.size());
        std::iota(out.begin(), out.end(), 0);
        return out;
    }
    const double cutoff =
        lo + static_cast<double>(bins - top_bins) / static_cast<double>(bins) * (hi - lo);
    for (std::size_t f = 0; f < series.scores.size(); ++f) {
        if (series.scores[f] >= cutoff) {
            out.push_back(f);
        }
    }
    return out;
}

std::vector<FrameIndexSpan> merge_frames(const std::vector<std::size_t>& selected,
                                         std::size_t tau) {
    std::vector<FrameIndexSpan> spans;
    for (const auto f : selected) {
        if (!spans.empty() && f <= spans.back().end_idx) {
            throw Error(ErrorKind::InvalidArgument, "selected frames must be strictly increasing");
        }
        if (!spans.empty() && f - spans.back().end_idx - 1 <= tau) {
            spans.back().end_idx = f;
        } else {
            spans.push_back(FrameIndexSpan{f, f});
        }
    }
    return spans;
}

double span_mean(const FrameScoreSeries& series, const FrameIndexSpan& span) {
    if (span.end_idx >= series.scores.size() || span.start_idx > span.end_idx) {
        throw Error(ErrorKind::InvalidArgument, "span outside the score series");
    }
    double sum = 0.0;
    for (std::size_t f = span.start_idx; f <= span.end_idx; ++f) {
        sum += series.scores[f];
    }
    return sum / static_cast<double>(span.length());
}

std::optional<double> nearest_rank_percentile(std::vector<double> values, double percent) {
    if (values.empty() || percent <= 0.0) {
        return std::nullopt;
    }
    std::sort(values.begin(), values.end());
    const double raw = percent * static_cast<double>(values.size()) / 100.0;
    auto rank = static_cast<std::size_t>(std::ceil(raw));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

std::vector<FrameIndexSpan> filter_low_spans(const std::vector<FrameIndexSpan>& spans,
                                             const FrameScoreSeries& series, double percent) {
    if (!(percent >= 0.0 && percent < 100.0)) {
        throw Error(ErrorKind::InvalidArgument, "bottom percent must be in [0,100)");
    }
    const auto threshold = nearest_rank_percentile(series.scores, percent);
    if (!threshold || spans.empty()) {
        return spans;
    }
    std::vector<FrameIndexSpan> kept;
    std::size_t best = 0;
    double best_mu = -1.0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const double mu = span_mean(series, spans[i]);
        if (mu >= *threshold) {
            kept.push_back(spans[i]);
        }
        if (mu > best_mu) {
            best_mu = mu;
            best = i;
        }
    }
    if (kept.empty()) {
        kept.push_back(spans[best]);
    }
    return kept;
}

std::vector<ScoredSpan> score_spans(const std::vector<FrameIndexSpan>& spans,
                                    const FrameScoreSeries& series, double lambda) {
    if (spans.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no spans to score");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "lambda must be in [0,1]");
    }
    std::size_t total = 0;
    for (const auto& s : spans) {
        total += s.length();
    }
    std::vector<ScoredSpan> out;
    out.reserve(spans.size());
    for (const auto& s : spans) {
        ScoredSpan scored;
        scored.span = s;
        scored.mu = span_mean(series, s);
        scored.rho = static_cast<double>(s.length()) / static_cast<double>(total);
        scored.score = (1.0 - lambda) * scored.mu + lambda * scored.rho;
        out.push_back(scored);
    }
    return out;
}

bool ranks_before(const ScoredTimeSpan& a, const ScoredTimeSpan& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.span.start_s != b.span.start_s) return a.span.start_s < b.span.start_s;
    return a.span.length() > b.span.length();
}

std::vector<std::size_t> nms_indices(const std::vector<ScoredTimeSpan>& spans, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "NMS threshold must be in (0,1]");
    }
    std::vector<std::size_t> order(spans.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranks_before(spans[a], spans[b]);
    });
    std::vector<std::size_t> kept;
    for (const auto i : order) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return temporal_iou(spans[i].span, spans[k].span) > theta;
        });
        if (!suppressed) {
            kept.push_back(i);
        }
    }
    return kept;
}

std::vector<ScoredTimeSpan> nms(const std::vector<ScoredTimeSpan>& spans, double theta) {
    std::vector<ScoredTimeSpan> out;
    for (const auto i : nms_indices(spans, theta)) {
        out.push_back(spans[i]);
    }
    return out;
}

MomentPrediction propose(const FrameScoreSeries& series, const PipelineConfig& cfg) {
    if (series.scores.empty()) {
        throw Error(ErrorKind::EmptySeries, "score series of '" + series.query_id + "' is empty");
    }
    const auto selected = select_high_frames(series, cfg.histogram_bins, cfg.histogram_top_bins);
    const auto merged = merge_frames(selected, cfg.merge_gap);
    const auto filtered = filter_low_spans(merged, series, cfg.bottom_percent);
    const auto scored = score_spans(filtered, series, cfg.length_weight);

    std::vector<ScoredTimeSpan> timed;
    timed.reserve(scored.size());
    for (const auto& s : scored) {
        timed.push_back(ScoredTimeSpan{frames_to_time(s.span, cfg.fps), s.score});
    }

    MomentPrediction pred;
    pred.query_id = series.query_id;
    pred.video_id = series.video_id;
    pred.saliency = series.scores;
    for (const auto i : nms_indices(timed, cfg.nms_iou)) {
        pred.spans.push_back(
            PredictedSpan{timed[i].span, timed[i].score, scored[i].span, scored[i].mu, scored[i].rho});
    }
    return pred;
}

}  // namespace granalign
