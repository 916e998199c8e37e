// Serial reference against the OpenMP kernels on synthetic inputs.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "granalign/kernels.hpp"

namespace {

using namespace granalign::kernels;

std::vector<double> unit_rows(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> out(rows * dim);
    for (std::size_t r = 0; r < rows; ++r) {
        double norm = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            out[r * dim + k] = n(rng);
            norm += out[r * dim + k] * out[r * dim + k];
        }
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < dim; ++k) out[r * dim + k] /= norm;
    }
    return out;
}

struct ScoreFixture {
    std::vector<double> s, d, a, w, out;
    ScoreMatrices mats;

    ScoreFixture(std::size_t frames, std::size_t dim = 384, std::size_t m = 3) {
        std::mt19937_64 rng(5);
        s = unit_rows(rng, m, dim);
        d = unit_rows(rng, m, dim);
        a = unit_rows(rng, frames, dim);
        w = unit_rows(rng, frames, dim);
        out.resize(frames);
        mats = ScoreMatrices{dim, m, frames, s, d, a, w};
    }
};

void BM_ScoresSerial(benchmark::State& state) {
    ScoreFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        granular_scores_serial(f.mats, f.out);
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoresOmp(benchmark::State& state) {
    ScoreFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        granular_scores_omp(f.mats, f.out);
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

EvalInput eval_input(std::size_t queries) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 150.0);
    EvalInput in;
    for (double t = 0.5; t < 0.951; t += 0.05) in.thresholds.push_back(t);
    for (std::size_t q = 0; q < queries; ++q) {
        std::vector<EvalInput::Span> preds, gts;
        for (int k = 0; k < 10; ++k) {
            const double x = u(rng), y = u(rng);
            preds.push_back({std::min(x, y), std::max(x, y)});
        }
        for (int k = 0; k < 2; ++k) {
            const double x = u(rng), y = u(rng);
            gts.push_back({std::min(x, y), std::max(x, y)});
        }
        in.predictions.push_back(std::move(preds));
        in.ground_truth.push_back(std::move(gts));
    }
    return in;
}

void BM_EvalSerial(benchmark::State& state) {
    const auto in = eval_input(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(query_terms_serial(in));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvalOmp(benchmark::State& state) {
    const auto in = eval_input(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(query_terms_omp(in));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ScoresSerial)->Arg(75)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ScoresOmp)->Arg(75)->Arg(1000)->Arg(10000);
BENCHMARK(BM_EvalSerial)->Arg(1550)->Arg(20000);
BENCHMARK(BM_EvalOmp)->Arg(1550)->Arg(20000);

BENCHMARK_MAIN();
