#include "granalign/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "granalign/kernels.hpp"

namespace granalign {

std::vector<double> map_thresholds() {
    std::vector<double> t;
    for (int k = 0; k < 10; ++k) {
        t.push_back(static_cast<double>(50 + 5 * k) / 100.0);
    }
    return t;
}

std::string threshold_label(double t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

namespace {

/// Predictions reordered to match `gts`; throws MissingPrediction on gaps.
kernels::EvalInput align(const std::vector<MomentPrediction>& preds,
                         const std::vector<GroundTruth>& gts, std::vector<double> thresholds,
                         bool strict) {
    std::unordered_map<std::string, const MomentPrediction*> by_id;
    for (const auto& p : preds) {
        by_id.emplace(p.query_id, &p);
    }
    kernels::EvalInput in;
    in.thresholds = std::move(thresholds);
    in.strict = strict;
    for (const auto& gt : gts) {
        const auto it = by_id.find(gt.query_id);
        if (it == by_id.end() || it->second->spans.empty()) {
            throw Error(ErrorKind::MissingPrediction, "no prediction for query '" + gt.query_id + "'");
        }
        std::vector<kernels::EvalInput::Span> ps;
        for (const auto& s : it->second->spans) {
            ps.push_back({s.span.start_s, s.span.end_s});
        }
        std::vector<kernels::EvalInput::Span> gs;
        for (const auto& w : gt.windows) {
            gs.push_back({w.start_s, w.end_s});
        }
        in.predictions.push_back(std::move(ps));
        in.ground_truth.push_back(std::move(gs));
    }
    return in;
}

std::vector<kernels::QueryTerms> terms(const kernels::EvalInput& in, Execution execution) {
    return execution == Execution::Parallel ? kernels::query_terms_omp(in)
                                            : kernels::query_terms_serial(in);
}

double percent_mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return 100.0 * std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

bool passes(double value, double threshold, bool strict) {
    return strict ? value > threshold : value >= threshold;
}

}  // namespace

double recall_at_1(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
                   double threshold, bool strict) {
    const auto in = align(preds, gts, {}, strict);
    std::vector<double> hits;
    for (const auto& t : kernels::query_terms_serial(in)) {
        hits.push_back(passes(t.top1_best_iou, threshold, strict) ? 1.0 : 0.0);
    }
    return percent_mean(hits);
}

double mean_iou(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts) {
    const auto in = align(preds, gts, {}, false);
    std::vector<double> ious;
    for (const auto& t : kernels::query_terms_serial(in)) {
        ious.push_back(t.top1_best_iou);
    }
    return percent_mean(ious);
}

double map_at(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
              double threshold, bool strict) {
    const auto in = align(preds, gts, {threshold}, strict);
    std::vector<double> aps;
    for (const auto& t : kernels::query_terms_serial(in)) {
        aps.push_back(t.average_precision.front());
    }
    return percent_mean(aps);
}

double map_avg(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
               bool strict) {
    double sum = 0.0;
    const auto ts = map_thresholds();
    for (const double t : ts) {
        sum += map_at(preds, gts, t, strict);
    }
    return sum / static_cast<double>(ts.size());
}

double binary_average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorKind::LabelLengthMismatch,
                    std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) +
                        " labels");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] != 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

std::vector<int> clip_labels(const std::vector<std::size_t>& relevant_clips, std::size_t length) {
    std::vector<int> labels(length, 0);
    for (const auto c : relevant_clips) {
        if (c >= length) {
            throw Error(ErrorKind::LabelLengthMismatch,
                        "relevant clip " + std::to_string(c) + " beyond series of length " +
                            std::to_string(length));
        }
        labels[c] = 1;
    }
    return labels;
}

VhdReport vhd_metrics(const std::vector<std::vector<double>>& saliency,
                      const std::vector<std::vector<int>>& labels) {
    if (saliency.size() != labels.size()) {
        throw Error(ErrorKind::LabelLengthMismatch, "saliency and label query counts differ");
    }
    std::vector<double> aps, hits;
    for (std::size_t q = 0; q < saliency.size(); ++q) {
        const auto& s = saliency[q];
        aps.push_back(binary_average_precision(s, labels[q]));
        if (s.empty()) {
            hits.push_back(0.0);
            continue;
        }
        const auto top = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
        hits.push_back(labels[q][top] != 0 ? 1.0 : 0.0);
    }
    return VhdReport{percent_mean(aps), percent_mean(hits)};
}

PartialReport partial_report(const std::vector<MomentPrediction>& preds,
                             const std::vector<GroundTruth>& gts, const EvalOptions& options) {
    std::vector<double> thresholds = map_thresholds();
    const auto in = align(preds, gts, thresholds, options.strict);
    const auto per_query = terms(in, options.execution);

    PartialReport r;
    r.num_queries = per_query.size();
    std::vector<double> ious;
    for (const auto& t : per_query) {
        ious.push_back(t.top1_best_iou);
    }
    r.miou = percent_mean(ious);
    for (const double t : options.r1_thresholds) {
        std::vector<double> hits;
        for (const auto& q : per_query) {
            hits.push_back(passes(q.top1_best_iou, t, options.strict) ? 1.0 : 0.0);
        }
        r.r1[t] = percent_mean(hits);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        std::vector<double> aps;
        for (const auto& q : per_query) {
            aps.push_back(q.average_precision[k]);
        }
        r.map_at[thresholds[k]] = percent_mean(aps);
        sum += r.map_at[thresholds[k]];
    }
    r.map_avg = sum / static_cast<double>(thresholds.size());
    return r;
}

std::map<std::string, PartialReport> breakdown(const std::vector<MomentPrediction>& preds,
                                               const std::vector<GroundTruth>& gts,
                                               const std::map<std::string, QueryType>& types,
                                               const EvalOptions& options) {
    std::map<std::string, std::vector<GroundTruth>> slices;
    for (const auto& gt : gts) {
        const auto it = types.find(gt.query_id);
        if (it == types.end()) {
            throw Error(ErrorKind::InvalidArgument, "no query type for '" + gt.query_id + "'");
        }
        slices[std::string(to_string(it->second.category))].push_back(gt);
        if (it->second.error_flag) {
            slices["Error"].push_back(gt);
        }
    }
    std::map<std::string, PartialReport> out;
    for (const auto& [name, slice] : slices) {
        out.emplace(name, partial_report(preds, slice, options));
    }
    return out;
}

EvalReport evaluate(const std::vector<MomentPrediction>& preds, const std::vector<GroundTruth>& gts,
                    const std::map<std::string, QueryType>& types, const EvalOptions& options) {
    const auto overall = partial_report(preds, gts, options);
    EvalReport report;
    report.num_queries = overall.num_queries;
    report.r1 = overall.r1;
    report.map_at = overall.map_at;
    report.map_avg = overall.map_avg;
    report.miou = overall.miou;

    const bool labelled = !gts.empty() && std::all_of(gts.begin(), gts.end(), [](const auto& g) {
        return g.relevant_clips.has_value();
    });
    if (labelled) {
        std::unordered_map<std::string, const MomentPrediction*> by_id;
        for (const auto& p : preds) by_id.emplace(p.query_id, &p);
        std::vector<std::vector<double>> saliency;
        std::vector<std::vector<int>> labels;
        for (const auto& gt : gts) {
            const auto& s = by_id.at(gt.query_id)->saliency;
            saliency.push_back(s);
            labels.push_back(clip_labels(*gt.relevant_clips, s.size()));
        }
        report.vhd = vhd_metrics(saliency, labels);
    }
    if (!types.empty()) {
        report.by_query_type = breakdown(preds, gts, types, options);
    }
    return report;
}

namespace {

nlohmann::json threshold_map(const std::map<double, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [t, v] : m) j[threshold_label(t)] = v;
    return j;
}

std::map<double, double> threshold_map_from(const nlohmann::json& j) {
    std::map<double, double> m;
    for (const auto& [k, v] : j.items()) m[std::stod(k)] = v.get<double>();
    return m;
}

nlohmann::json partial_json(const PartialReport& r) {
    return {{"num_queries", r.num_queries}, {"r1", threshold_map(r.r1)},
            {"map_at", threshold_map(r.map_at)}, {"map_avg", r.map_avg}, {"miou", r.miou}};
}

}  // namespace

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j;
    j["num_queries"] = report.num_queries;
    j["num_failed"] = report.num_failed;
    j["r1"] = threshold_map(report.r1);
    j["map_at"] = threshold_map(report.map_at);
    j["map_avg"] = report.map_avg;
    j["miou"] = report.miou;
    if (report.vhd) {
        j["vhd"] = {{"map", report.vhd->map}, {"hit_at_1", report.vhd->hit_at_1}};
    } else {
        j["vhd"] = nullptr;
    }
    j["by_query_type"] = nlohmann::json::object();
    for (const auto& [name, r] : report.by_query_type) {
        j["by_query_type"][name] = partial_json(r);
    }
    return j;
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.num_queries = j.at("num_queries").get<std::size_t>();
    r.num_failed = j.value("num_failed", std::size_t{0});
    r.r1 = threshold_map_from(j.at("r1"));
    r.map_at = threshold_map_from(j.at("map_at"));
    r.map_avg = j.at("map_avg").get<double>();
    r.miou = j.at("miou").get<double>();
    if (j.contains("vhd") && !j.at("vhd").is_null()) {
        r.vhd = VhdReport{j["vhd"].at("map").get<double>(), j["vhd"].at("hit_at_1").get<double>()};
    }
    if (j.contains("by_query_type")) {
        for (const auto& [name, p] : j.at("by_query_type").items()) {
            PartialReport pr;
            pr.num_queries = p.at("num_queries").get<std::size_t>();
            pr.r1 = threshold_map_from(p.at("r1"));
            pr.map_at = threshold_map_from(p.at("map_at"));
            pr.map_avg = p.at("map_avg").get<double>();
            pr.miou = p.at("miou").get<double>();
            r.by_query_type.emplace(name, pr);
        }
    }
    return r;
}

std::string format_table(const EvalReport& report) {
    std::ostringstream out;
    char buf[64];
    auto cell = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%8.2f", v);
        return std::string(buf);
    };
    auto row = [&](const std::string& name, const PartialReport& r) {
        std::snprintf(buf, sizeof(buf), "%-8s %6zu", name.c_str(), r.num_queries);
        out << buf;
        for (const double t : {0.3, 0.5, 0.7}) {
            const auto it = r.r1.find(t);
            out << (it == r.r1.end() ? std::string(7, ' ') + "-" : cell(it->second));
        }
        out << cell(r.map_at.at(0.5)) << cell(r.map_at.at(0.75)) << cell(r.map_avg)
            << cell(r.miou) << '\n';
    };
    out << "slice     count  R1@0.3  R1@0.5  R1@0.7 mAP@0.5 mAP@.75 mAP@avg    mIoU\n";
    PartialReport overall{report.num_queries, report.r1, report.map_at, report.map_avg,
                          report.miou};
    row("all", overall);
    for (const auto& [name, r] : report.by_query_type) {
        row(name, r);
    }
    if (report.vhd) {
        out << "VHD: mAP " << cell(report.vhd->map) << "  HIT@1 " << cell(report.vhd->hit_at_1)
            << '\n';
    }
    if (report.num_failed > 0) {
        out << report.num_failed << " queries failed and were excluded\n";
    }
    return out.str();
}

}  // namespace granalign
