#include "granalign/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <thread>

#include "granalign/caption.hpp"
#include "granalign/rewrite.hpp"
#include "granalign/score.hpp"

namespace granalign {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

StageTimings& StageTimings::operator+=(const StageTimings& o) {
    rewrite_s += o.rewrite_s;
    caption_s += o.caption_s;
    score_s += o.score_s;
    propose_s += o.propose_s;
    return *this;
}

std::size_t RunManifest::failed() const {
    return static_cast<std::size_t>(
        std::count_if(queries.begin(), queries.end(), [](const auto& q) { return !q.ok; }));
}

bool RunResult::all_failed() const {
    return !manifest.queries.empty() && manifest.failed() == manifest.queries.size();
}

nlohmann::json to_json(const PipelineConfig& cfg) {
    return {{"fps", cfg.fps},
            {"top_k_percent", cfg.top_k_percent},
            {"num_rewrites", cfg.num_rewrites},
            {"merge_gap", cfg.merge_gap},
            {"bottom_percent", cfg.bottom_percent},
            {"length_weight", cfg.length_weight},
            {"nms_iou", cfg.nms_iou},
            {"histogram_bins", cfg.histogram_bins},
            {"histogram_top_bins", cfg.histogram_top_bins},
            {"instruction_pair", cfg.instruction_pair}};
}

namespace {

nlohmann::json timings_json(const StageTimings& t) {
    return {{"rewrite_s", t.rewrite_s},
            {"caption_s", t.caption_s},
            {"score_s", t.score_s},
            {"propose_s", t.propose_s}};
}

}  // namespace

nlohmann::json to_json(const RunManifest& m, const std::vector<MomentPrediction>& preds) {
    std::map<std::string, const MomentPrediction*> by_id;
    for (const auto& p : preds) by_id.emplace(p.query_id, &p);

    nlohmann::json queries = nlohmann::json::array();
    for (const auto& q : m.queries) {
        nlohmann::json j;
        j["query_id"] = q.query_id;
        j["status"] = q.ok ? "ok" : "failed";
        if (!q.ok) j["reason"] = q.reason;
        j["timings"] = timings_json(q.timings);
        j["effective_m"] = q.effective_m;
        if (!q.warnings.empty()) j["warnings"] = q.warnings;
        if (const auto it = by_id.find(q.query_id); it != by_id.end()) {
            nlohmann::json spans = nlohmann::json::array();
            for (const auto& s : it->second->spans) {
                spans.push_back({{"start_frame", s.frames.start_idx},
                                 {"end_frame", s.frames.end_idx},
                                 {"start_s", s.span.start_s},
                                 {"end_s", s.span.end_s},
                                 {"mu", s.mu},
                                 {"rho", s.rho},
                                 {"score", s.score}});
            }
            j["spans"] = std::move(spans);
        }
        queries.push_back(std::move(j));
    }
    return {{"config", to_json(m.config)},
            {"dataset", m.dataset},
            {"split", m.split},
            {"providers", m.providers},
            {"instruction_set_version", std::string(instruction_set_version())},
            {"timings", timings_json(m.timings)},
            {"num_queries", m.queries.size()},
            {"num_failed", m.failed()},
            {"queries", std::move(queries)}};
}

RewriteRecord rewrite_query(const Query& query, const PipelineConfig& cfg,
                            const ModelProvider& provider, bool grammar_check) {
    RewriteRecord r;
    r.rewrites = generate_rewrites(query, cfg, provider);
    r.guidance = extract_guidance(query, &provider);
    r.type = classify_query(query, grammar_check ? &provider : nullptr);
    return r;
}

FrameScoreSeries score_query(const DatasetRecord& record, const RewriteRecord& rewrite,
                             const PipelineConfig& cfg, const ModelProvider& provider,
                             Execution execution, StageTimings* timings) {
    auto t0 = Clock::now();
    const auto captions =
        build_caption_set(record.video, record.query, rewrite.guidance, cfg, provider);
    if (timings) timings->caption_s += seconds_since(t0);
    t0 = Clock::now();
    auto series = score_video(rewrite.rewrites, captions, provider, execution);
    series.query_id = record.query.id;
    if (timings) timings->score_s += seconds_since(t0);
    return series;
}

QueryResult process_query(const DatasetRecord& record, const PipelineConfig& cfg,
                          const ModelProvider& provider, Execution execution, bool grammar_check) {
    QueryResult result;
    result.outcome.query_id = record.query.id;
    auto t0 = Clock::now();
    result.rewrite = rewrite_query(record.query, cfg, provider, grammar_check);
    result.outcome.timings.rewrite_s = seconds_since(t0);
    result.outcome.effective_m = result.rewrite.rewrites.m();
    result.outcome.warnings = result.rewrite.rewrites.warnings;

    result.series =
        score_query(record, result.rewrite, cfg, provider, execution, &result.outcome.timings);

    t0 = Clock::now();
    result.prediction = propose(result.series, cfg);
    result.outcome.timings.propose_s = seconds_since(t0);
    result.outcome.ok = true;
    return result;
}

void parallel_for_each_index(std::size_t n, std::size_t jobs,
                             const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                fn(i);
            }
        });
    }
}

std::optional<EvalReport> evaluate_records(const std::vector<MomentPrediction>& preds,
                                           const std::vector<DatasetRecord>& dataset,
                                           const std::map<std::string, QueryType>& types,
                                           const EvalOptions& options) {
    std::map<std::string, bool> predicted;
    for (const auto& p : preds) predicted[p.query_id] = !p.spans.empty();

    std::vector<GroundTruth> gts;
    std::size_t missing = 0;
    std::map<std::string, QueryType> slice_types;
    for (const auto& r : dataset) {
        if (r.ground_truth.windows.empty()) continue;
        const auto it = predicted.find(r.query.id);
        if (it == predicted.end() || !it->second) {
            ++missing;
            continue;
        }
        gts.push_back(r.ground_truth);
        if (const auto t = types.find(r.query.id); t != types.end()) {
            slice_types.emplace(r.query.id, t->second);
        }
    }
    if (gts.empty()) {
        return std::nullopt;
    }
    if (slice_types.size() != gts.size()) {
        slice_types.clear();
    }
    auto report = evaluate(preds, gts, slice_types, options);
    report.num_failed = missing;
    return report;
}

RunResult run_pipeline(const PipelineConfig& cfg, const std::vector<DatasetRecord>& dataset,
                       const ModelProvider& provider, const RunOptions& options) {
    cfg.validate();
    std::vector<std::optional<QueryResult>> results(dataset.size());
    std::vector<QueryOutcome> outcomes(dataset.size());
    // Nested OpenMP teams inside worker threads would oversubscribe the cores.
    const auto execution = options.jobs > 1 ? Execution::Serial : Execution::Parallel;

    parallel_for_each_index(dataset.size(), options.jobs, [&](std::size_t i) {
        try {
            auto r = process_query(dataset[i], cfg, provider, execution, options.grammar_check);
            outcomes[i] = r.outcome;
            results[i] = std::move(r);
        } catch (const std::exception& e) {
            outcomes[i].query_id = dataset[i].query.id;
            outcomes[i].ok = false;
            outcomes[i].reason = e.what();
            warn("query '" + dataset[i].query.id + "' failed: " + e.what());
        }
    });

    RunResult run;
    run.manifest.config = cfg;
    run.manifest.dataset = options.dataset_name;
    run.manifest.split = options.split_name;
    run.manifest.providers = options.provider_description;
    std::map<std::string, QueryType> types;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        run.manifest.timings += outcomes[i].timings;
        run.manifest.queries.push_back(outcomes[i]);
        if (results[i]) {
            types.emplace(dataset[i].query.id, results[i]->rewrite.type);
            run.predictions.push_back(std::move(results[i]->prediction));
            run.series.push_back(std::move(results[i]->series));
            run.rewrites.push_back(std::move(results[i]->rewrite));
        }
    }
    if (!run.predictions.empty()) {
        run.report = evaluate_records(run.predictions, dataset, types, options.eval);
    }
    return run;
}

// ---------------------------------------------------------------------------

std::string sweep_parameter_key(std::string_view name) {
    static const std::map<std::string_view, std::string_view> aliases = {
        {"num_rewrites", "num_rewrites"},   {"m", "num_rewrites"},
        {"length_weight", "length_weight"}, {"lambda", "length_weight"},
        {"top_k_percent", "top_k_percent"}, {"top-k", "top_k_percent"},
        {"merge_gap", "merge_gap"},         {"tau", "merge_gap"},
        {"bottom_percent", "bottom_percent"}, {"bottom-n", "bottom_percent"},
        {"nms_iou", "nms_iou"},             {"nms-iou", "nms_iou"},
    };
    const auto it = aliases.find(name);
    if (it == aliases.end()) {
        throw Error(ErrorKind::ConfigError, "cannot sweep '" + std::string(name) + "'");
    }
    return std::string(it->second);
}

std::vector<SweepRow> sweep(const PipelineConfig& cfg, const std::vector<DatasetRecord>& dataset,
                            const ModelProvider& provider, std::string_view parameter,
                            const std::vector<std::string>& values, const RunOptions& options) {
    if (values.empty()) {
        throw Error(ErrorKind::ConfigError, "sweep needs at least one value");
    }
    const auto key = sweep_parameter_key(parameter);
    std::vector<PipelineConfig> configs;
    for (const auto& v : values) {
        auto c = cfg;
        apply_config_value(c, key, v);
        c.validate();
        configs.push_back(c);
    }

    std::vector<SweepRow> rows;
    const bool proposal_only =
        key == "merge_gap" || key == "bottom_percent" || key == "length_weight" || key == "nms_iou";
    if (!proposal_only) {
        for (std::size_t k = 0; k < values.size(); ++k) {
            auto run = run_pipeline(configs[k], dataset, provider, options);
            rows.push_back(SweepRow{values[k], run.report, run.manifest.failed()});
        }
        return rows;
    }

    // Scores do not depend on the swept value: compute them once.
    auto base = run_pipeline(configs.front(), dataset, provider, options);
    std::map<std::string, QueryType> types;
    for (const auto& r : base.rewrites) types.emplace(r.rewrites.original.id, r.type);
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::vector<MomentPrediction> preds;
        for (const auto& s : base.series) {
            preds.push_back(propose(s, configs[k]));
        }
        rows.push_back(SweepRow{values[k], evaluate_records(preds, dataset, types, options.eval),
                                base.manifest.failed()});
    }
    return rows;
}

std::string format_sweep_table(std::string_view parameter, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-14s %8s %8s %8s %8s %8s %8s %6s\n",
                  std::string(parameter).c_str(), "R1@0.3", "R1@0.5", "R1@0.7", "mAP@0.5",
                  "mAP@avg", "mIoU", "failed");
    out << buf;
    for (const auto& row : rows) {
        if (!row.report) {
            std::snprintf(buf, sizeof(buf), "%-14s %8s %8s %8s %8s %8s %8s %6zu\n",
                          row.value.c_str(), "-", "-", "-", "-", "-", "-", row.failed);
        } else {
            const auto& r = *row.report;
            auto r1 = [&](double t) {
                const auto it = r.r1.find(t);
                return it == r.r1.end() ? 0.0 : it->second;
            };
            std::snprintf(buf, sizeof(buf), "%-14s %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f %6zu\n",
                          row.value.c_str(), r1(0.3), r1(0.5), r1(0.7), r.map_at.at(0.5),
                          r.map_avg, r.miou, row.failed);
        }
        out << buf;
    }
    return out.str();
}

nlohmann::json sweep_to_json(std::string_view parameter, const std::vector<SweepRow>& rows) {
    nlohmann::json j;
    j["parameter"] = std::string(parameter);
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
        j["rows"].push_back({{"value", row.value},
                             {"failed", row.failed},
                             {"report", row.report ? to_json(*row.report) : nlohmann::json()}});
    }
    return j;
}

}  // namespace granalign
