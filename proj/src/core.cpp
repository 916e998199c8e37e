#include "granalign/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>

#include "granalign/text.hpp"

namespace granalign {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::RemoteUnavailable: return "RemoteUnavailable";
        case ErrorKind::ContractViolation: return "ContractViolation";
        case ErrorKind::CacheMiss: return "CacheMiss";
        case ErrorKind::RewriteFailed: return "RewriteFailed";
        case ErrorKind::GuidanceEmpty: return "GuidanceEmpty";
        case ErrorKind::CaptionFailed: return "CaptionFailed";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptySeries: return "EmptySeries";
        case ErrorKind::MissingPrediction: return "MissingPrediction";
        case ErrorKind::LabelLengthMismatch: return "LabelLengthMismatch";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::MissingDuration: return "MissingDuration";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

bool TimeSpan::valid() const {
    return std::isfinite(start_s) && std::isfinite(end_s) && start_s >= 0.0 && start_s <= end_s;
}

Query Query::make(std::string id, std::string text) {
    const auto count = text::split_whitespace(text).size();
    if (count == 0) {
        throw Error(ErrorKind::InvalidArgument, "query '" + id + "' has no words");
    }
    return Query{std::move(id), std::move(text), count};
}

VideoMeta VideoMeta::make(std::string video_id, double duration_s, double fps) {
    if (!(fps > 0.0) || !std::isfinite(fps)) {
        throw Error(ErrorKind::InvalidArgument, "fps must be positive");
    }
    if (!std::isfinite(duration_s) || duration_s < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "video '" + video_id + "' has invalid duration");
    }
    const auto frames = static_cast<std::size_t>(std::floor(duration_s * fps));
    if (frames < 1) {
        throw Error(ErrorKind::InvalidArgument,
                    "video '" + video_id + "' is shorter than one sampled frame");
    }
    return VideoMeta{std::move(video_id), duration_s, fps, frames};
}

void PipelineConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
    if (!(fps > 0.0)) fail("fps must be > 0");
    if (!(top_k_percent > 0.0 && top_k_percent <= 100.0)) fail("top_k_percent must be in (0,100]");
    if (num_rewrites < 1) fail("num_rewrites must be >= 1");
    if (!(bottom_percent >= 0.0 && bottom_percent < 100.0)) fail("bottom_percent must be in [0,100)");
    if (!(length_weight >= 0.0 && length_weight <= 1.0)) fail("length_weight must be in [0,1]");
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) fail("nms_iou must be in (0,1]");
    if (histogram_bins < 1) fail("histogram_bins must be >= 1");
    if (histogram_top_bins < 1 || histogram_top_bins > histogram_bins) {
        fail("histogram_top_bins must be in [1, histogram_bins]");
    }
    if (instruction_pair < 1) fail("instruction_pair must be >= 1");
}

namespace {

double parse_double(std::string_view key, std::string_view value) {
    const auto s = text::trim(value);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::ConfigError,
                    "invalid number for '" + std::string(key) + "': " + s);
    }
    return out;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
    const auto s = text::trim(value);
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::ConfigError,
                    "invalid integer for '" + std::string(key) + "': " + s);
    }
    return out;
}

}  // namespace

void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "fps") cfg.fps = parse_double(key, value);
    else if (key == "top_k_percent") cfg.top_k_percent = parse_double(key, value);
    else if (key == "num_rewrites") cfg.num_rewrites = parse_count(key, value);
    else if (key == "merge_gap") cfg.merge_gap = parse_count(key, value);
    else if (key == "bottom_percent") cfg.bottom_percent = parse_double(key, value);
    else if (key == "length_weight") cfg.length_weight = parse_double(key, value);
    else if (key == "nms_iou") cfg.nms_iou = parse_double(key, value);
    else if (key == "histogram_bins") cfg.histogram_bins = parse_count(key, value);
    else if (key == "histogram_top_bins") cfg.histogram_top_bins = parse_count(key, value);
    else if (key == "instruction_pair") cfg.instruction_pair = parse_count(key, value);
    else throw Error(ErrorKind::ConfigError, "unknown config key '" + std::string(key) + "'");
}

std::vector<std::string> config_keys() {
    return {"fps",            "top_k_percent", "num_rewrites",   "merge_gap",
            "bottom_percent", "length_weight", "nms_iou",        "histogram_bins",
            "histogram_top_bins", "instruction_pair"};
}

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::ConfigError, "cannot open config file " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        const auto stripped = text::trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ConfigError, path.string() + ":" + std::to_string(line_no) +
                                                    ": expected 'key = value'");
        }
        apply_config_value(base, text::trim(stripped.substr(0, eq)),
                           text::trim(stripped.substr(eq + 1)));
    }
    base.validate();
    return base;
}

double temporal_iou(const TimeSpan& a, const TimeSpan& b) {
    const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
    const double union_len = a.length() + b.length() - inter;
    if (union_len <= 0.0) {
        return a == b ? 1.0 : 0.0;
    }
    return inter / union_len;
}

TimeSpan frames_to_time(const FrameIndexSpan& span, double fps) {
    return TimeSpan{static_cast<double>(span.start_idx) / fps,
                    static_cast<double>(span.end_idx + 1) / fps};
}

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

WarningSink& sink() {
    static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
    std::lock_guard lock(sink_mutex());
    sink() = s ? std::move(s) : [](std::string_view) {};
}

void warn(std::string_view message) {
    std::lock_guard lock(sink_mutex());
    sink()(message);
}

}  // namespace granalign
