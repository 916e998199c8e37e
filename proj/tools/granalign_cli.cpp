// granalign: zero-shot video moment retrieval command line.
//
// Subcommands mirror the pipeline stages so each stage's output can be cached
// and resumed: precaption, rewrite, score, retrieve, eval, run, sweep.
//
// Exit codes: 0 success, 1 config/dataset error, 2 every query failed.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "granalign/caption.hpp"
#include "granalign/data.hpp"
#include "granalign/eval.hpp"
#include "granalign/pipeline.hpp"
#include "granalign/propose.hpp"
#include "granalign/providers.hpp"
#include "granalign/text.hpp"

namespace fs = std::filesystem;
using namespace granalign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAllFailed = 2;

struct Options {
    // configuration
    std::optional<fs::path> config;
    std::optional<double> fps;
    std::optional<double> top_k;
    std::optional<std::size_t> m;
    std::optional<std::size_t> tau;
    std::optional<double> bottom_n;
    std::optional<double> lambda;
    std::optional<double> nms_iou;
    std::optional<std::size_t> bins;
    std::optional<std::size_t> top_bins;
    std::optional<std::size_t> instruction_pair;

    // data
    std::string dataset{"qvhighlights"};
    std::string split{"val"};
    std::optional<fs::path> data;
    std::optional<fs::path> durations;

    // providers
    std::string provider{"mock"};
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    std::optional<std::string> chat_model;
    std::optional<std::string> caption_model;
    std::optional<std::string> embed_model;
    std::optional<std::string> similarity_model;
    std::optional<std::string> auth_env;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> mock_scene;
    std::optional<std::string> frame_url;
    std::size_t max_in_flight{8};
    bool grammar_check{false};
    std::optional<fs::path> cache_dir;

    // execution / output
    std::size_t jobs{1};
    std::optional<fs::path> out;
    bool strict_iou{false};

    // stage inputs
    std::optional<fs::path> rewrites;
    std::optional<fs::path> scores;
    std::optional<fs::path> predictions;
    std::string param;
    std::vector<std::string> values;
};

void add_common(CLI::App& app, Options& o) {
    app.add_option("--config", o.config, "Flat key = value config file");
    app.add_option("--fps", o.fps, "Frame sampling rate (default 0.5)");
    app.add_option("--top-k", o.top_k, "Percent of frames given query-aware captions (default 10)");
    app.add_option("--m", o.m, "Rewrite pairs per query (default 3)");
    app.add_option("--tau", o.tau, "Largest frame gap bridged when merging (default 6)");
    app.add_option("--bottom-n", o.bottom_n, "Percentile below which spans are dropped (default 20)");
    app.add_option("--lambda", o.lambda, "Length weight in span scores (default 0.3)");
    app.add_option("--nms-iou", o.nms_iou, "NMS IoU threshold (default 0.9)");
    app.add_option("--bins", o.bins, "Histogram bins for frame selection (default 10)");
    app.add_option("--top-bins", o.top_bins, "Histogram bins kept (default 8)");
    app.add_option("--instruction-pair", o.instruction_pair, "Rewrite instruction pair (default 1)");

    app.add_option("--dataset", o.dataset, "qvhighlights | charades | activitynet")
        ->check(CLI::IsMember({"qvhighlights", "charades", "activitynet"}));
    app.add_option("--split", o.split, "train | val | test")
        ->check(CLI::IsMember({"train", "val", "test"}));
    app.add_option("--data", o.data, "Annotation file of the dataset split");
    app.add_option("--durations", o.durations, "Charades video duration index");

    app.add_option("--provider", o.provider, "mock | http | file")
        ->check(CLI::IsMember({"mock", "http", "file"}));
    app.add_option("--endpoint", o.endpoint, "OpenAI-compatible server base URL");
    app.add_option("--model", o.model, "Default model name for every capability");
    app.add_option("--chat-model", o.chat_model, "Model for rewriting and guidance");
    app.add_option("--caption-model", o.caption_model, "Vision-language captioning model");
    app.add_option("--embed-model", o.embed_model, "Sentence embedding model");
    app.add_option("--similarity-model", o.similarity_model, "Image/text embedding model");
    app.add_option("--auth-env", o.auth_env, "Environment variable holding the bearer token");
    app.add_option("--seed", o.seed, "Mock provider seed");
    app.add_option("--mock-scene", o.mock_scene, "Mock provider scene file (JSON-lines)");
    app.add_option("--frame-url", o.frame_url, "Frame URL template ({video_id}, {frame}, {time})");
    app.add_option("--max-in-flight", o.max_in_flight, "Concurrent HTTP requests (default 8)");
    app.add_flag("--grammar-check", o.grammar_check, "Flag error queries via the chat model");
    app.add_option("--cache-dir", o.cache_dir, "Cache directory (read-through for mock/http)");

    app.add_option("--jobs", o.jobs, "Queries processed concurrently")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "Output file or directory");
    app.add_flag("--strict-iou", o.strict_iou, "Count IoU hits only when strictly above threshold");
}

PipelineConfig resolve_config(const Options& o) {
    PipelineConfig cfg;
    if (o.config) cfg = load_config_file(*o.config);
    if (o.fps) cfg.fps = *o.fps;
    if (o.top_k) cfg.top_k_percent = *o.top_k;
    if (o.m) cfg.num_rewrites = *o.m;
    if (o.tau) cfg.merge_gap = *o.tau;
    if (o.bottom_n) cfg.bottom_percent = *o.bottom_n;
    if (o.lambda) cfg.length_weight = *o.lambda;
    if (o.nms_iou) cfg.nms_iou = *o.nms_iou;
    if (o.bins) cfg.histogram_bins = *o.bins;
    if (o.top_bins) cfg.histogram_top_bins = *o.top_bins;
    if (o.instruction_pair) cfg.instruction_pair = *o.instruction_pair;
    cfg.validate();
    instruction_pair(cfg.instruction_pair);
    return cfg;
}

ProviderSpec provider_spec(const Options& o) {
    ProviderSpec spec;
    spec.kind = provider_kind_from_string(o.provider);
    spec.endpoint = o.endpoint;
    spec.model_name = o.model;
    spec.auth_token_env = o.auth_env;
    spec.cache_dir = o.cache_dir;
    spec.seed = o.seed;
    spec.mock_scene = o.mock_scene;
    if (o.chat_model) spec.http.chat_model = *o.chat_model;
    if (o.caption_model) spec.http.caption_model = *o.caption_model;
    if (o.embed_model) spec.http.embed_model = *o.embed_model;
    if (o.similarity_model) spec.http.similarity_model = *o.similarity_model;
    if (o.frame_url) spec.http.frame_url_template = *o.frame_url;
    spec.http.max_in_flight = o.max_in_flight;
    spec.http.grammar_check = o.grammar_check;
    return spec;
}

nlohmann::json describe(const ProviderSpec& spec) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(spec.kind));
    if (spec.endpoint) j["endpoint"] = *spec.endpoint;
    if (spec.model_name) j["model"] = *spec.model_name;
    if (spec.cache_dir) j["cache_dir"] = spec.cache_dir->string();
    if (spec.kind == ProviderKind::Mock) j["seed"] = spec.seed.value_or(0);
    if (spec.mock_scene) j["mock_scene"] = spec.mock_scene->filename().string();
    return j;
}

std::vector<DatasetRecord> load_records(const Options& o, const PipelineConfig& cfg) {
    if (!o.data) {
        throw Error(ErrorKind::ConfigError, "--data is required");
    }
    return load_dataset(dataset_kind_from_string(o.dataset), *o.data, split_from_string(o.split),
                        cfg.fps, o.durations);
}

EvalOptions eval_options(const Options& o) {
    EvalOptions e;
    e.strict = o.strict_iou;
    return e;
}

RunOptions run_options(const Options& o, const ProviderSpec& spec) {
    RunOptions r;
    r.jobs = o.jobs;
    r.eval = eval_options(o);
    r.dataset_name = o.dataset;
    r.split_name = o.split;
    r.provider_description = describe(spec);
    return r;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

fs::path output_dir(const Options& o, const char* fallback) {
    const fs::path dir = o.out.value_or(fallback);
    fs::create_directories(dir);
    return dir;
}

fs::path output_file(const Options& o, const char* fallback) {
    const fs::path file = o.out.value_or(fallback);
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    return file;
}

// --- subcommands ------------------------------------------------------------

int cmd_precaption(const Options& o) {
    if (!o.cache_dir) throw Error(ErrorKind::ConfigError, "precaption requires --cache-dir");
    const auto cfg = resolve_config(o);
    const auto records = load_records(o, cfg);
    const auto provider = make_provider(provider_spec(o));

    std::vector<VideoMeta> videos;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (seen.insert(r.video.video_id).second) videos.push_back(r.video);
    }
    std::atomic<std::size_t> failed{0};
    parallel_for_each_index(videos.size(), o.jobs, [&](std::size_t i) {
        try {
            caption_all_frames(videos[i], *provider);
        } catch (const std::exception& e) {
            ++failed;
            warn(e.what());
        }
    });
    std::cout << "captioned " << videos.size() - failed << " of " << videos.size()
              << " videos into " << o.cache_dir->string() << '\n';
    return !videos.empty() && failed == videos.size() ? kExitAllFailed : kExitOk;
}

int cmd_rewrite(const Options& o) {
    const auto cfg = resolve_config(o);
    const auto records = load_records(o, cfg);
    const auto provider = make_provider(provider_spec(o));

    std::vector<std::optional<RewriteRecord>> out(records.size());
    parallel_for_each_index(records.size(), o.jobs, [&](std::size_t i) {
        try {
            out[i] = rewrite_query(records[i].query, cfg, *provider, o.grammar_check);
        } catch (const std::exception& e) {
            warn("query '" + records[i].query.id + "' failed: " + e.what());
        }
    });
    std::vector<RewriteRecord> ok;
    for (auto& r : out) {
        if (r) ok.push_back(std::move(*r));
    }
    const auto path = output_file(o, "rewrites.jsonl");
    write_rewrites(ok, path);
    std::cout << "wrote " << ok.size() << " rewrite records to " << path.string() << '\n';
    return !records.empty() && ok.empty() ? kExitAllFailed : kExitOk;
}

int cmd_score(const Options& o) {
    const auto cfg = resolve_config(o);
    const auto records = load_records(o, cfg);
    const auto provider = make_provider(provider_spec(o));

    std::map<std::string, RewriteRecord> given;
    if (o.rewrites) {
        for (auto& r : read_rewrites(*o.rewrites)) {
            given.emplace(r.rewrites.original.id, std::move(r));
        }
    }
    const auto execution = o.jobs > 1 ? Execution::Serial : Execution::Parallel;
    std::vector<std::optional<FrameScoreSeries>> out(records.size());
    parallel_for_each_index(records.size(), o.jobs, [&](std::size_t i) {
        const auto& rec = records[i];
        try {
            const auto it = given.find(rec.query.id);
            const auto rw = it != given.end()
                                ? it->second
                                : rewrite_query(rec.query, cfg, *provider, o.grammar_check);
            out[i] = score_query(rec, rw, cfg, *provider, execution);
        } catch (const std::exception& e) {
            warn("query '" + rec.query.id + "' failed: " + e.what());
        }
    });
    std::vector<FrameScoreSeries> ok;
    for (auto& s : out) {
        if (s) ok.push_back(std::move(*s));
    }
    const auto path = output_file(o, "scores.jsonl");
    write_score_series(ok, path);
    std::cout << "wrote " << ok.size() << " score series to " << path.string() << '\n';
    return !records.empty() && ok.empty() ? kExitAllFailed : kExitOk;
}

int cmd_retrieve(const Options& o) {
    const auto cfg = resolve_config(o);
    if (!o.scores) throw Error(ErrorKind::ConfigError, "retrieve requires --scores");
    const auto series = read_score_series(*o.scores);
    std::vector<MomentPrediction> preds;
    std::size_t failed = 0;
    for (const auto& s : series) {
        try {
            preds.push_back(propose(s, cfg));
        } catch (const Error& e) {
            ++failed;
            warn(e.what());
        }
    }
    const auto path = output_file(o, "predictions.jsonl");
    write_predictions(preds, path);
    std::cout << "wrote " << preds.size() << " predictions to " << path.string() << '\n';
    return !series.empty() && failed == series.size() ? kExitAllFailed : kExitOk;
}

int cmd_eval(const Options& o) {
    const auto cfg = resolve_config(o);
    if (!o.predictions) throw Error(ErrorKind::ConfigError, "eval requires --predictions");
    const auto records = load_records(o, cfg);
    const auto preds = read_predictions(*o.predictions);
    const auto report = evaluate_records(preds, records, {}, eval_options(o));
    if (!report) {
        std::cerr << "no query has both ground truth and a prediction\n";
        return kExitAllFailed;
    }
    std::cout << format_table(*report);
    if (o.out) write_json(output_file(o, "report.json"), to_json(*report));
    return kExitOk;
}

int cmd_run(const Options& o) {
    const auto cfg = resolve_config(o);
    const auto records = load_records(o, cfg);
    const auto spec = provider_spec(o);
    const auto provider = make_provider(spec);

    auto result = run_pipeline(cfg, records, *provider, run_options(o, spec));
    const auto dir = output_dir(o, "granalign-out");
    write_predictions(result.predictions, dir / "predictions.jsonl");
    write_score_series(result.series, dir / "scores.jsonl");
    write_rewrites(result.rewrites, dir / "rewrites.jsonl");
    write_json(dir / "manifest.json", to_json(result.manifest, result.predictions));
    if (result.report) {
        write_json(dir / "report.json", to_json(*result.report));
        std::cout << format_table(*result.report);
    }
    std::cout << result.predictions.size() << " of " << records.size()
              << " queries succeeded; outputs in " << dir.string() << '\n';
    return result.all_failed() ? kExitAllFailed : kExitOk;
}

int cmd_sweep(const Options& o) {
    const auto cfg = resolve_config(o);
    const auto records = load_records(o, cfg);
    const auto spec = provider_spec(o);
    const auto provider = make_provider(spec);
    const auto key = sweep_parameter_key(o.param);

    const auto rows = sweep(cfg, records, *provider, key, o.values, run_options(o, spec));
    std::cout << format_sweep_table(key, rows);
    if (o.out) {
        write_json(output_dir(o, "sweep") / "sweep.json", sweep_to_json(key, rows));
    }
    const bool all_failed = std::all_of(rows.begin(), rows.end(),
                                        [](const SweepRow& r) { return !r.report.has_value(); });
    return all_failed ? kExitAllFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot video moment retrieval with granularity-aware query/caption alignment"};
    app.require_subcommand(1);
    Options o;

    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Options&);
    };
    const Sub subs[] = {
        {"precaption", "Caption every frame of the split's videos into --cache-dir", cmd_precaption},
        {"rewrite", "Rewrite queries, extract guidance and classify query types", cmd_rewrite},
        {"score", "Compute per-frame moment scores (JSON-lines)", cmd_score},
        {"retrieve", "Turn score series into ranked span predictions", cmd_retrieve},
        {"eval", "Evaluate a prediction file against ground truth", cmd_eval},
        {"run", "Full pipeline with evaluation", cmd_run},
        {"sweep", "Run once per value of one parameter", cmd_sweep},
    };
    int (*selected)(const Options&) = nullptr;
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_common(*sub, o);
        sub->callback([&selected, fn = s.fn] { selected = fn; });
        const std::string name = s.name;
        if (name == "score") sub->add_option("--rewrites", o.rewrites, "Output of `rewrite`");
        if (name == "retrieve")
            sub->add_option("--scores", o.scores, "Output of `score`")->required();
        if (name == "eval")
            sub->add_option("--predictions", o.predictions, "Prediction JSON-lines")->required();
        if (name == "sweep") {
            sub->add_option("--param", o.param, "Parameter to vary")->required();
            sub->add_option("--values", o.values, "Comma-separated values")
                ->delimiter(',')
                ->required();
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        return selected(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
