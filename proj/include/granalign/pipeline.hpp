#pragma once

/** \file pipeline.hpp
 *  \brief End-to-end orchestration over a dataset.
 *
 * Per query: generate_rewrites -> extract_guidance -> build_caption_set ->
 * score_video -> propose. Queries run on `jobs` worker threads; results are
 * always stored in dataset order so output files do not depend on scheduling.
 */

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "granalign/data.hpp"
#include "granalign/eval.hpp"
#include "granalign/propose.hpp"
#include "granalign/providers.hpp"

namespace granalign {

struct StageTimings {
    double rewrite_s{0.0};
    double caption_s{0.0};
    double score_s{0.0};
    double propose_s{0.0};

    StageTimings& operator+=(const StageTimings& o);
};

struct QueryOutcome {
    std::string query_id;
    bool ok{false};
    std::string reason;  // failure message when !ok
    StageTimings timings;
    std::size_t effective_m{0};
    std::vector<std::string> warnings;
};

struct RunManifest {
    PipelineConfig config;
    std::string dataset;
    std::string split;
    nlohmann::json providers = nlohmann::json::object();
    StageTimings timings;
    std::vector<QueryOutcome> queries;

    std::size_t failed() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
nlohmann::json to_json(const RunManifest& manifest, const std::vector<MomentPrediction>& preds);

struct RunOptions {
    std::size_t jobs{1};
    EvalOptions eval;
    std::string dataset_name;
    std::string split_name;
    nlohmann::json provider_description = nlohmann::json::object();
    /// Skip the classification grammar check even if the provider offers it.
    bool grammar_check{true};
};

/// Everything produced for one query.
struct QueryResult {
    RewriteRecord rewrite;
    FrameScoreSeries series;
    MomentPrediction prediction;
    QueryOutcome outcome;
};

RewriteRecord rewrite_query(const Query& query, const PipelineConfig& cfg,
                            const ModelProvider& provider, bool grammar_check = true);

FrameScoreSeries score_query(const DatasetRecord& record, const RewriteRecord& rewrite,
                             const PipelineConfig& cfg, const ModelProvider& provider,
                             Execution execution = Execution::Parallel,
                             StageTimings* timings = nullptr);

/// Full pipeline for one record; throws on any stage failure.
QueryResult process_query(const DatasetRecord& record, const PipelineConfig& cfg,
                          const ModelProvider& provider, Execution execution = Execution::Parallel,
                          bool grammar_check = true);

struct RunResult {
    /// Successful queries only, in dataset order.
    std::vector<MomentPrediction> predictions;
    std::vector<FrameScoreSeries> series;
    std::vector<RewriteRecord> rewrites;
    std::optional<EvalReport> report;
    RunManifest manifest;

    bool all_failed() const;
};

/// Evaluates automatically when any record carries ground-truth windows.
RunResult run_pipeline(const PipelineConfig& cfg, const std::vector<DatasetRecord>& dataset,
                       const ModelProvider& provider, const RunOptions& options = {});

/// Applies `fn(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for_each_index(std::size_t n, std::size_t jobs,
                             const std::function<void(std::size_t)>& fn);

/// Evaluation over the records with ground truth; predictions missing for a
/// record count as failures and are excluded.
std::optional<EvalReport> evaluate_records(const std::vector<MomentPrediction>& preds,
                                           const std::vector<DatasetRecord>& dataset,
                                           const std::map<std::string, QueryType>& types,
                                           const EvalOptions& options);

// ---------------------------------------------------------------------------
// Sweeps

/// Canonical config key for a sweep parameter; accepts CLI spellings
/// (m, lambda, top-k, tau, bottom-n, nms-iou). Throws ConfigError otherwise.
std::string sweep_parameter_key(std::string_view name);

struct SweepRow {
    std::string value;
    std::optional<EvalReport> report;
    std::size_t failed{0};
};

/// One run per value with everything else fixed. Parameters that only affect
/// proposal generation reuse the score series of a single scoring pass.
std::vector<SweepRow> sweep(const PipelineConfig& cfg, const std::vector<DatasetRecord>& dataset,
                            const ModelProvider& provider, std::string_view parameter,
                            const std::vector<std::string>& values, const RunOptions& options = {});

std::string format_sweep_table(std::string_view parameter, const std::vector<SweepRow>& rows);
nlohmann::json sweep_to_json(std::string_view parameter, const std::vector<SweepRow>& rows);

}  // namespace granalign
