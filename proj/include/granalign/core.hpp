#pragma once

/** \file core.hpp
 *  \brief Value types and interval algebra shared by every pipeline stage.
 *
 * Frame indices are 0-based and inclusive on both ends. A frame `i` sampled at
 * `fps` covers the half-open time range [i/fps, (i+1)/fps), so consecutive
 * frame spans tile the video without gaps.
 */

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "granalign/error.hpp"

namespace granalign {

/** \brief Continuous-time interval in seconds. */
struct TimeSpan {
    double start_s{0.0};
    double end_s{0.0};

    double length() const { return end_s - start_s; }
    bool valid() const;

    friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

/** \brief Inclusive frame-index interval. */
struct FrameIndexSpan {
    std::size_t start_idx{0};
    std::size_t end_idx{0};

    std::size_t length() const { return end_idx - start_idx + 1; }

    friend bool operator==(const FrameIndexSpan&, const FrameIndexSpan&) = default;
};

struct Query {
    std::string id;
    std::string text;
    std::size_t word_count{0};

    /// Builds a query and derives word_count from whitespace tokens.
    /// Throws InvalidArgument when the text has no tokens.
    static Query make(std::string id, std::string text);
};

struct VideoMeta {
    std::string video_id;
    double duration_s{0.0};
    double fps{0.5};
    std::size_t frame_count{0};

    /// frame_count = floor(duration_s * fps), required to be at least 1.
    static VideoMeta make(std::string video_id, double duration_s, double fps);
};

struct PipelineConfig {
    double fps{0.5};
    double top_k_percent{10.0};
    std::size_t num_rewrites{3};
    std::size_t merge_gap{6};
    double bottom_percent{20.0};
    double length_weight{0.3};
    double nms_iou{0.9};
    std::size_t histogram_bins{10};
    std::size_t histogram_top_bins{8};
    std::size_t instruction_pair{1};

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
};

/// Applies one flat `key = value` setting; keys are the field names above.
void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Reads a flat key-value file (`key = value`, `#` comments) on top of `base`.
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});

std::vector<std::string> config_keys();

/// |a ∩ b| / |a ∪ b|. Two zero-length spans yield 1 only when they are equal,
/// otherwise a zero-length union yields 0.
double temporal_iou(const TimeSpan& a, const TimeSpan& b);

TimeSpan frames_to_time(const FrameIndexSpan& span, double fps);

/// Warning sink shared by all modules. Defaults to stderr.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace granalign
