#include "granalign/core.hpp"
#include "granalign/kernels.hpp"

namespace granalign::kernels {

namespace {

double iou(const EvalInput::Span& a, const EvalInput::Span& b) {
    return temporal_iou(TimeSpan{a.start, a.end}, TimeSpan{b.start, b.end});
}

bool passes(double value, double threshold, bool strict) {
    return strict ? value > threshold : value >= threshold;
}

QueryTerms terms_for(const EvalInput& in, std::size_t q) {
    const auto& preds = in.predictions[q];
    const auto& gts = in.ground_truth[q];
    QueryTerms t;
    if (!preds.empty()) {
        for (const auto& g : gts) {
            t.top1_best_iou = std::max(t.top1_best_iou, iou(preds.front(), g));
        }
    }
    t.average_precision.reserve(in.thresholds.size());
    for (const double threshold : in.thresholds) {
        std::vector<bool> matched(gts.size(), false);
        std::size_t hits = 0;
        double precision_sum = 0.0;
        for (std::size_t rank = 0; rank < preds.size(); ++rank) {
            std::size_t best = gts.size();
            double best_iou = -1.0;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (matched[g]) continue;
                const double v = iou(preds[rank], gts[g]);
                if (passes(v, threshold, in.strict) && v > best_iou) {
                    best = g;
                    best_iou = v;
                }
            }
            if (best < gts.size()) {
                matched[best] = true;
                ++hits;
                precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
            }
        }
        t.average_precision.push_back(
            gts.empty() ? 0.0 : precision_sum / static_cast<double>(gts.size()));
    }
    return t;
}

}  // namespace

std::vector<QueryTerms> query_terms_serial(const EvalInput& in) {
    std::vector<QueryTerms> out(in.predictions.size());
    for (std::size_t q = 0; q < out.size(); ++q) {
        out[q] = terms_for(in, q);
    }
    return out;
}

std::vector<QueryTerms> query_terms_omp(const EvalInput& in) {
    std::vector<QueryTerms> out(in.predictions.size());
    const auto n = static_cast<long long>(out.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long long q = 0; q < n; ++q) {
        out[static_cast<std::size_t>(q)] = terms_for(in, static_cast<std::size_t>(q));
    }
    return out;
}

}  // namespace granalign::kernels
