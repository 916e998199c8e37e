#include "granalign/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "granalign/text.hpp"

namespace granalign {

using nlohmann::json;

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "val";
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw Error(ErrorKind::ConfigError, "unknown split '" + std::string(s) + "'");
}

std::string_view to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::QVHighlights: return "qvhighlights";
        case DatasetKind::Charades: return "charades";
        case DatasetKind::ActivityNet: return "activitynet";
    }
    return "qvhighlights";
}

DatasetKind dataset_kind_from_string(std::string_view s) {
    if (s == "qvhighlights") return DatasetKind::QVHighlights;
    if (s == "charades") return DatasetKind::Charades;
    if (s == "activitynet") return DatasetKind::ActivityNet;
    throw Error(ErrorKind::ConfigError, "unknown dataset '" + std::string(s) + "'");
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    }
    return out;
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
    return path.string() + ":" + std::to_string(line_no);
}

/// Visits non-blank lines, tagging JSON errors with the line number.
template <typename F>
void for_each_json_line(const std::filesystem::path& path, F&& f) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ParseError, where(path, line_no) + ": " + e.what());
        }
        try {
            f(j, line_no);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::SchemaError, where(path, line_no) + ": " + e.what());
        }
    }
}

std::string id_string(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
    throw Error(ErrorKind::SchemaError, "id must be a string or integer");
}

json id_json(const std::string& id) {
    const bool numeric = !id.empty() && id.size() < 19 && (id == "0" || id.front() != '0') &&
                         std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (numeric) return std::stoll(id);
    return id;
}

const json& require(const json& j, const char* field, const std::string& context) {
    if (!j.contains(field)) {
        throw Error(ErrorKind::SchemaError, context + ": missing field '" + field + "'");
    }
    return j.at(field);
}

TimeSpan clamped_window(double start, double end, double duration, const std::string& context) {
    if (!std::isfinite(start) || !std::isfinite(end) || start < 0.0 || end < start) {
        throw Error(ErrorKind::ParseError, context + ": invalid window [" + std::to_string(start) +
                                               ", " + std::to_string(end) + "]");
    }
    TimeSpan w{start, end};
    if (w.end_s > duration || w.start_s > duration) {
        w.start_s = std::min(w.start_s, duration);
        w.end_s = std::min(w.end_s, duration);
        warn(context + ": window clamped to video duration " + std::to_string(duration));
    }
    return w;
}

}  // namespace

std::vector<DatasetRecord> load_qvhighlights(const std::filesystem::path& path, Split split,
                                             double fps) {
    std::vector<DatasetRecord> out;
    for_each_json_line(path, [&](const json& j, std::size_t line_no) {
        const auto ctx = where(path, line_no);
        DatasetRecord r;
        r.split = split;
        r.query = Query::make(id_string(require(j, "qid", ctx)),
                              require(j, "query", ctx).get<std::string>());
        r.video = VideoMeta::make(require(j, "vid", ctx).get<std::string>(),
                                  require(j, "duration", ctx).get<double>(), fps);
        r.ground_truth.query_id = r.query.id;
        if (j.contains("relevant_windows")) {
            for (const auto& w : j.at("relevant_windows")) {
                r.ground_truth.windows.push_back(clamped_window(
                    w.at(0).get<double>(), w.at(1).get<double>(), r.video.duration_s, ctx));
            }
            if (r.ground_truth.windows.empty() && split != Split::Test) {
                throw Error(ErrorKind::SchemaError, ctx + ": relevant_windows is empty");
            }
        } else if (split != Split::Test) {
            throw Error(ErrorKind::SchemaError, ctx + ": missing field 'relevant_windows'");
        }
        if (j.contains("relevant_clip_ids")) {
            r.ground_truth.relevant_clips = j.at("relevant_clip_ids").get<std::vector<std::size_t>>();
        }
        out.push_back(std::move(r));
    });
    return out;
}

std::unordered_map<std::string, double> load_duration_index(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::unordered_map<std::string, double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::replace(line.begin(), line.end(), ',', ' ');
        const auto parts = text::split_whitespace(line);
        if (parts.empty() || parts.front().front() == '#') continue;
        if (parts.size() < 2) {
            throw Error(ErrorKind::ParseError, where(path, line_no) + ": expected 'video_id duration'");
        }
        try {
            out[parts[0]] = std::stod(parts[1]);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, where(path, line_no) + ": bad duration '" + parts[1] + "'");
        }
    }
    return out;
}

std::vector<DatasetRecord> load_charades(const std::filesystem::path& path,
                                         const std::unordered_map<std::string, double>& durations,
                                         Split split, double fps) {
    auto in = open_input(path);
    std::vector<DatasetRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto ctx = where(path, line_no);
        const auto sep = line.find("##");
        if (sep == std::string::npos) {
            throw Error(ErrorKind::ParseError, ctx + ": missing '##' separator");
        }
        const auto head = text::split_whitespace(line.substr(0, sep));
        if (head.size() != 3) {
            throw Error(ErrorKind::ParseError, ctx + ": expected 'video_id start end'");
        }
        double start = 0.0, end = 0.0;
        try {
            start = std::stod(head[1]);
            end = std::stod(head[2]);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, ctx + ": bad timestamps");
        }
        const auto dur = durations.find(head[0]);
        if (dur == durations.end()) {
            throw Error(ErrorKind::MissingDuration, ctx + ": no duration for video " + head[0]);
        }
        DatasetRecord r;
        r.split = split;
        r.query = Query::make(head[0] + "#" + std::to_string(out.size()),
                              text::trim(line.substr(sep + 2)));
        r.video = VideoMeta::make(head[0], dur->second, fps);
        r.ground_truth.query_id = r.query.id;
        r.ground_truth.windows.push_back(clamped_window(start, end, dur->second, ctx));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<DatasetRecord> load_activitynet(const std::filesystem::path& path, Split split,
                                            double fps) {
    auto in = open_input(path);
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
    std::vector<DatasetRecord> out;
    for (const auto& [vid, ordered_entry] : doc.items()) {
        const auto ctx = path.string() + ":" + vid;
        const json entry = ordered_entry;  // require() returns references into its argument
        try {
            const auto duration = require(entry, "duration", ctx).get<double>();
            const auto& stamps = require(entry, "timestamps", ctx);
            const auto& sentences = require(entry, "sentences", ctx);
            if (stamps.size() != sentences.size()) {
                throw Error(ErrorKind::LengthMismatch,
                            ctx + ": " + std::to_string(stamps.size()) + " timestamps vs " +
                                std::to_string(sentences.size()) + " sentences");
            }
            const auto video = VideoMeta::make(vid, duration, fps);
            for (std::size_t i = 0; i < stamps.size(); ++i) {
                DatasetRecord r;
                r.split = split;
                r.query = Query::make(vid + "#" + std::to_string(i),
                                      text::trim(sentences[i].get<std::string>()));
                r.video = video;
                r.ground_truth.query_id = r.query.id;
                r.ground_truth.windows.push_back(clamped_window(
                    stamps[i].at(0).get<double>(), stamps[i].at(1).get<double>(), duration, ctx));
                out.push_back(std::move(r));
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::SchemaError, ctx + ": " + e.what());
        }
    }
    return out;
}

std::vector<DatasetRecord> load_dataset(DatasetKind kind, const std::filesystem::path& path,
                                        Split split, double fps,
                                        const std::optional<std::filesystem::path>& duration_index) {
    switch (kind) {
        case DatasetKind::QVHighlights: return load_qvhighlights(path, split, fps);
        case DatasetKind::ActivityNet: return load_activitynet(path, split, fps);
        case DatasetKind::Charades:
            if (!duration_index) {
                throw Error(ErrorKind::ConfigError, "charades requires a duration index file");
            }
            return load_charades(path, load_duration_index(*duration_index), split, fps);
    }
    throw Error(ErrorKind::ConfigError, "unknown dataset kind");
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split_holdout(
    const std::vector<DatasetRecord>& records, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "hold-out fraction must be in [0,1]");
    }
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    for (std::size_t i = 0; i < records.size(); ++i) {
        keyed.emplace_back(text::stable_hash(seed, records[i].query.id), i);
    }
    std::sort(keyed.begin(), keyed.end());
    const auto held = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(records.size()) - 1e-9));
    std::vector<bool> in_holdout(records.size(), false);
    for (std::size_t k = 0; k < held; ++k) {
        in_holdout[keyed[k].second] = true;
    }
    std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (in_holdout[i] ? out.second : out.first).push_back(records[i]);
    }
    return out;
}

double round4(double v) {
    const double r = std::round(v * 10000.0) / 10000.0;
    return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string prediction_line(const MomentPrediction& pred) {
    json windows = json::array();
    for (const auto& s : pred.spans) {
        windows.push_back({round4(s.span.start_s), round4(s.span.end_s), round4(s.score)});
    }
    json saliency = json::array();
    for (const double v : pred.saliency) {
        saliency.push_back(round4(v));
    }
    json j;
    j["qid"] = id_json(pred.query_id);
    j["pred_relevant_windows"] = std::move(windows);
    j["pred_saliency_scores"] = std::move(saliency);
    return j.dump();
}

void write_predictions(const std::vector<MomentPrediction>& preds,
                       const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& p : preds) {
        out << prediction_line(p) << '\n';
    }
    if (!out) {
        throw Error(ErrorKind::IoError, "failed writing " + path.string());
    }
}

std::vector<MomentPrediction> read_predictions(const std::filesystem::path& path) {
    std::vector<MomentPrediction> out;
    for_each_json_line(path, [&](const json& j, std::size_t line_no) {
        const auto ctx = where(path, line_no);
        MomentPrediction p;
        p.query_id = id_string(require(j, "qid", ctx));
        for (const auto& w : require(j, "pred_relevant_windows", ctx)) {
            PredictedSpan s;
            s.span = TimeSpan{w.at(0).get<double>(), w.at(1).get<double>()};
            s.score = w.size() > 2 ? w.at(2).get<double>() : 0.0;
            p.spans.push_back(s);
        }
        if (j.contains("pred_saliency_scores")) {
            p.saliency = j.at("pred_saliency_scores").get<std::vector<double>>();
        }
        out.push_back(std::move(p));
    });
    return out;
}

void write_score_series(const std::vector<FrameScoreSeries>& series,
                        const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& s : series) {
        out << json{{"query_id", s.query_id}, {"video_id", s.video_id}, {"scores", s.scores}}.dump()
            << '\n';
    }
}

std::vector<FrameScoreSeries> read_score_series(const std::filesystem::path& path) {
    std::vector<FrameScoreSeries> out;
    for_each_json_line(path, [&](const json& j, std::size_t line_no) {
        const auto ctx = where(path, line_no);
        out.push_back(FrameScoreSeries{require(j, "video_id", ctx).get<std::string>(),
                                       id_string(require(j, "query_id", ctx)),
                                       require(j, "scores", ctx).get<std::vector<double>>()});
    });
    return out;
}

void write_rewrites(const std::vector<RewriteRecord>& records, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& r : records) {
        json pairs = json::array();
        for (const auto& p : r.rewrites.pairs) {
            pairs.push_back({{"simplified", p.simplified}, {"detailed", p.detailed}});
        }
        json j;
        j["query_id"] = r.rewrites.original.id;
        j["query"] = r.rewrites.original.text;
        j["pairs"] = std::move(pairs);
        j["guidance"] = {{"entities", r.guidance.entities}, {"actions", r.guidance.actions}};
        j["query_type"] = {{"category", std::string(to_string(r.type.category))},
                           {"error_flag", r.type.error_flag}};
        out << j.dump() << '\n';
    }
}

std::vector<RewriteRecord> read_rewrites(const std::filesystem::path& path) {
    std::vector<RewriteRecord> out;
    for_each_json_line(path, [&](const json& j, std::size_t line_no) {
        const auto ctx = where(path, line_no);
        RewriteRecord r;
        r.rewrites.original = Query::make(id_string(require(j, "query_id", ctx)),
                                          require(j, "query", ctx).get<std::string>());
        for (const auto& p : require(j, "pairs", ctx)) {
            r.rewrites.pairs.push_back(RewrittenQueryPair{p.at("simplified").get<std::string>(),
                                                          p.at("detailed").get<std::string>()});
        }
        const auto& g = require(j, "guidance", ctx);
        r.guidance.entities = g.at("entities").get<std::vector<std::string>>();
        r.guidance.actions = g.at("actions").get<std::vector<std::string>>();
        const auto& t = require(j, "query_type", ctx);
        const auto cat = t.at("category").get<std::string>();
        r.type.category = cat == "Simple"   ? QueryCategory::Simple
                          : cat == "Detail" ? QueryCategory::Detail
                                            : QueryCategory::Else;
        r.type.error_flag = t.at("error_flag").get<bool>();
        out.push_back(std::move(r));
    });
    return out;
}

}  // namespace granalign
