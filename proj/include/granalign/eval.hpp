#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "granalign/core.hpp"
#include "granalign/propose.hpp"
#include "granalign/rewrite.hpp"
#include "granalign/score.hpp"

namespace granalign {

struct GroundTruth {
    std::string query_id;
    std::vector<TimeSpan> windows;
    /// Clip indices marked relevant for highlight detection, when annotated.
    std::optional<std::vector<std::size_t>> relevant_clips;
};

/// {0.5, 0.55, ..., 0.95}
std::vector<double> map_thresholds();

struct PartialReport {
    std::size_t num_queries{0};
    std::map<double, double> r1;
    std::map<double, double> map_at;
    double map_avg{0.0};
    double miou{0.0};
};

struct VhdReport {
    double map{0.0};
    double hit_at_1{0.0};
};

/** \brief All metrics in percent. */
struct EvalReport {
    std::size_t num_queries{0};
    std::size_t num_failed{0};
    std::map<double, double> r1;
    std::map<double, double> map_at;
    double map_avg{0.0};
    double miou{0.0};
    std::optional<VhdReport> vhd;
    std::map<std::string, PartialReport> by_query_type;
};

struct EvalOptions {
    std::vector<double> r1_thresholds{0.3, 0.5, 0.7};
    /// IoU must exceed the threshold instead of reaching it.
    bool strict{false};
    Execution execution{Execution::Parallel};
};

double recall_at_1(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
                   double threshold, bool strict = false);
double mean_iou(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts);
double map_at(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
              double threshold, bool strict = false);
double map_avg(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
               bool strict = false);

/// Average precision of a score-ranked list against binary labels (ties keep
/// index order). Zero when no label is positive.
double binary_average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

/// Binary labels for a series of `length` clips; LabelLengthMismatch when a
/// relevant clip falls outside the series.
std::vector<int> clip_labels(const std::vector<std::size_t>& relevant_clips, std::size_t length);

/// Mean over queries of AP and of top-1 relevance, both in percent.
VhdReport vhd_metrics(const std::vector<std::vector<double>>& saliency,
                      const std::vector<std::vector<int>>& labels);

PartialReport partial_report(const std::vector<MomentPrediction>& preds,
                             const std::vector<GroundTruth>& gts, const EvalOptions& options = {});

/// Metrics per query category (Simple/Detail/Else) plus an overlapping Error
/// slice of flagged queries. Empty slices are omitted.
std::map<std::string, PartialReport> breakdown(const std::vector<MomentPrediction>& preds,
                                               const std::vector<GroundTruth>& gts,
                                               const std::map<std::string, QueryType>& types,
                                               const EvalOptions& options = {});

/// Full report over the ground-truth queries. VHD metrics are included when
/// every ground truth carries clip labels.
EvalReport evaluate(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
                    const std::map<std::string, QueryType>& types = {},
                    const EvalOptions& options = {});

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);
std::string format_table(const EvalReport& report);
std::string threshold_label(double t);

}  // namespace granalign
