#include "granalign/kernels.hpp"

namespace granalign::kernels {

void granular_scores_omp(const ScoreMatrices& m, std::span<double> out) {
    const auto frames = static_cast<long long>(m.frames);
#pragma omp parallel for schedule(static)
    for (long long f = 0; f < frames; ++f) {
        out[static_cast<std::size_t>(f)] = granular_score_row(m, static_cast<std::size_t>(f));
    }
}

}  // namespace granalign::kernels
