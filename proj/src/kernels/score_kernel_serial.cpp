#include "granalign/kernels.hpp"

namespace granalign::kernels {

void granular_scores_serial(const ScoreMatrices& m, std::span<double> out) {
    for (std::size_t f = 0; f < m.frames; ++f) {
        out[f] = granular_score_row(m, f);
    }
}

}  // namespace granalign::kernels
