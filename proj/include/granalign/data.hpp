#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "granalign/core.hpp"
#include "granalign/eval.hpp"
#include "granalign/propose.hpp"
#include "granalign/rewrite.hpp"
#include "granalign/score.hpp"

namespace granalign {

enum class Split { Train, Val, Test };
enum class DatasetKind { QVHighlights, Charades, ActivityNet };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);
std::string_view to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(std::string_view s);

struct DatasetRecord {
    Query query;
    VideoMeta video;
    GroundTruth ground_truth;
    Split split{Split::Val};
};

/// JSON-lines with qid, query, vid, duration and relevant_windows (which may
/// be absent only for the test split). relevant_clip_ids, when present,
/// become highlight labels.
std::vector<DatasetRecord> load_qvhighlights(const std::filesystem::path& path, Split split,
                                             double fps);

/// `video_id duration` per line (whitespace or comma separated).
std::unordered_map<std::string, double> load_duration_index(const std::filesystem::path& path);

/// `video_id start end##sentence` per line.
std::vector<DatasetRecord> load_charades(const std::filesystem::path& path,
                                         const std::unordered_map<std::string, double>& durations,
                                         Split split, double fps);

/// JSON object keyed by video id: {duration, timestamps, sentences}.
std::vector<DatasetRecord> load_activitynet(const std::filesystem::path& path, Split split,
                                            double fps);

std::vector<DatasetRecord> load_dataset(DatasetKind kind, const std::filesystem::path& path,
                                        Split split, double fps,
                                        const std::optional<std::filesystem::path>& duration_index);

/// Deterministic hold-out: the `fraction` of records with the smallest
/// seeded hash of their query id go to the second element.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split_holdout(
    const std::vector<DatasetRecord>& records, double fraction, std::uint64_t seed = 20240601);

/// Rounds to 4 decimal places, the precision of prediction files.
double round4(double v);

/// {qid, pred_relevant_windows: [[start, end, score], ...], pred_saliency_scores: [...]}
std::string prediction_line(const MomentPrediction& pred);
void write_predictions(const std::vector<MomentPrediction>& preds, const std::filesystem::path& path);
std::vector<MomentPrediction> read_predictions(const std::filesystem::path& path);

/// {query_id, video_id, scores: [...]} at full precision.
void write_score_series(const std::vector<FrameScoreSeries>& series,
                        const std::filesystem::path& path);
std::vector<FrameScoreSeries> read_score_series(const std::filesystem::path& path);

/// Stage output of `rewrite`: rewrites, guidance and query type per query.
struct RewriteRecord {
    RewriteSet rewrites;
    SemanticGuidance guidance;
    QueryType type;
};
void write_rewrites(const std::vector<RewriteRecord>& records, const std::filesystem::path& path);
std::vector<RewriteRecord> read_rewrites(const std::filesystem::path& path);

}  // namespace granalign
