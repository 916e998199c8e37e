#pragma once

/** \file kernels.hpp
 *  \brief Data-parallel inner loops.
 *
 * Each kernel has a serial reference and an OpenMP version. Both evaluate the
 * same per-item expression in the same order, so their outputs are bitwise
 * identical regardless of thread count; tests and the benchmark rely on that.
 */

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace granalign::kernels {

/// Row-major embedding matrices for one (query, video) scoring job.
struct ScoreMatrices {
    std::size_t dim{0};
    std::size_t pairs{0};   // m
    std::size_t frames{0};  // L_v
    std::span<const double> simplified;  // pairs x dim
    std::span<const double> detailed;    // pairs x dim
    std::span<const double> agnostic;    // frames x dim
    std::span<const double> aware;       // frames x dim (agnostic rows off-candidate)
};

inline double dot(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        s += a[k] * b[k];
    }
    return s;
}

/// Cosine of unit vectors mapped from [-1,1] to [0,1].
inline double normalized_cosine(const double* a, const double* b, std::size_t dim) {
    return std::clamp((1.0 + dot(a, b, dim)) / 2.0, 0.0, 1.0);
}

/// Running sum g_s(1) + g_d(1) + g_s(2) + ... divided by 2m, clamped.
class GranularAccumulator {
public:
    void add(double g_simplified, double g_detailed) {
        sum_ += g_simplified;
        sum_ += g_detailed;
        ++pairs_;
    }
    double value() const {
        return pairs_ == 0 ? 0.0
                           : std::clamp(sum_ / (2.0 * static_cast<double>(pairs_)), 0.0, 1.0);
    }

private:
    double sum_{0.0};
    std::size_t pairs_{0};
};

inline double granular_score_row(const ScoreMatrices& m, std::size_t frame) {
    const double* agn = m.agnostic.data() + frame * m.dim;
    const double* awr = m.aware.data() + frame * m.dim;
    GranularAccumulator acc;
    for (std::size_t i = 0; i < m.pairs; ++i) {
        acc.add(normalized_cosine(m.simplified.data() + i * m.dim, agn, m.dim),
                normalized_cosine(m.detailed.data() + i * m.dim, awr, m.dim));
    }
    return acc.value();
}

void granular_scores_serial(const ScoreMatrices& m, std::span<double> out);
void granular_scores_omp(const ScoreMatrices& m, std::span<double> out);

/// Per-query evaluation terms consumed by the metric reducers.
struct QueryTerms {
    double top1_best_iou{0.0};
    std::vector<double> average_precision;  // one per threshold
};

struct EvalInput {
    struct Span {
        double start;
        double end;
    };
    std::vector<std::vector<Span>> predictions;  // ranked, per query
    std::vector<std::vector<Span>> ground_truth;  // per query
    std::vector<double> thresholds;
    bool strict{false};  // IoU > t instead of IoU >= t
};

std::vector<QueryTerms> query_terms_serial(const EvalInput& in);
std::vector<QueryTerms> query_terms_omp(const EvalInput& in);

}  // namespace granalign::kernels
