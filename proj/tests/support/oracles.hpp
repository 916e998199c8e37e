#pragma once

// Reference implementations used by the tests. They are written from the
// definitions, deliberately using different algorithms from the library
// (painting instead of scanning, repeated argmax instead of sorting, etc.).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

struct Interval {
    double start;
    double end;
};

inline double iou(Interval a, Interval b) {
    const double la = a.end - a.start;
    const double lb = b.end - b.start;
    if (la == 0.0 && lb == 0.0) {
        return (a.start == b.start && a.end == b.end) ? 1.0 : 0.0;
    }
    double inter = 0.0;
    if (a.start < b.end && b.start < a.end) {
        inter = std::min(a.end, b.end) - std::max(a.start, b.start);
    }
    return inter / (la + lb - inter);
}

/// Paints selected frames and bridged gaps on a boolean line, then reads runs.
inline std::vector<std::pair<std::size_t, std::size_t>> merge(const std::vector<std::size_t>& sel,
                                                             std::size_t tau) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    if (sel.empty()) return runs;
    const std::size_t hi = sel.back();
    std::vector<char> on(hi + 1, 0);
    for (auto f : sel) on[f] = 1;
    // fill every gap of zeros of length <= tau that lies between two ones
    std::size_t i = 0;
    while (i <= hi) {
        if (on[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j <= hi && !on[j]) ++j;
        const bool bounded = i > 0 && j <= hi;
        if (bounded && j - i <= tau) {
            for (std::size_t k = i; k < j; ++k) on[k] = 2;
        }
        i = j;
    }
    std::size_t k = 0;
    while (k <= hi) {
        if (!on[k]) {
            ++k;
            continue;
        }
        std::size_t e = k;
        while (e + 1 <= hi && on[e + 1]) ++e;
        runs.emplace_back(k, e);
        k = e + 1;
    }
    return runs;
}

struct Scored {
    double start;
    double end;
    double score;
};

/// True if a must be taken before b: higher score, then earlier start, then longer.
inline bool better(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return (a.end - a.start) > (b.end - b.start);
}

/// Quadratic greedy NMS: repeatedly take the best surviving span and kill
/// everything overlapping it by more than theta. Equal-rank spans resolve to
/// the lower input index.
inline std::vector<std::size_t> nms(const std::vector<Scored>& spans, double theta) {
    std::vector<char> alive(spans.size(), 1);
    std::vector<std::size_t> kept;
    for (;;) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (!alive[i]) continue;
            if (!best || better(spans[i], spans[*best])) best = i;
        }
        if (!best) break;
        kept.push_back(*best);
        alive[*best] = 0;
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (alive[i] &&
                iou({spans[i].start, spans[i].end}, {spans[*best].start, spans[*best].end}) >
                    theta) {
                alive[i] = 0;
            }
        }
    }
    return kept;
}

/// Frames with score >= min + (bins - top)/bins * (max - min); all when flat.
inline std::vector<std::size_t> high_frames(const std::vector<double>& s, std::size_t bins,
                                            std::size_t top) {
    double lo = s.front();
    double hi = s.front();
    for (double v : s) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::size_t> out;
    const double cutoff =
        lo + static_cast<double>(bins - top) / static_cast<double>(bins) * (hi - lo);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (hi == lo || s[i] >= cutoff) out.push_back(i);
    }
    return out;
}

/// Smallest value v such that at least percent% of the values are <= v.
inline double percentile(std::vector<double> v, double percent) {
    std::sort(v.begin(), v.end());
    for (std::size_t r = 1; r <= v.size(); ++r) {
        if (static_cast<double>(r) * 100.0 >= percent * static_cast<double>(v.size())) {
            return v[r - 1];
        }
    }
    return v.back();
}

/// AP with one-to-one greedy matching by rank; recall base = |gt|.
inline double average_precision(const std::vector<Interval>& ranked,
                                const std::vector<Interval>& gt, double t) {
    std::vector<char> used(gt.size(), 0);
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        std::optional<std::size_t> pick;
        double pick_iou = -1.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (used[g]) continue;
            const double v = iou(ranked[r], gt[g]);
            if (v >= t && v > pick_iou) {
                pick = g;
                pick_iou = v;
            }
        }
        if (pick) {
            used[*pick] = 1;
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return gt.empty() ? 0.0 : sum / static_cast<double>(gt.size());
}

inline double best_iou(Interval p, const std::vector<Interval>& gt) {
    double best = 0.0;
    for (const auto& g : gt) best = std::max(best, iou(p, g));
    return best;
}

}  // namespace oracle
