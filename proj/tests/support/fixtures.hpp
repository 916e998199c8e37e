#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "granalign/data.hpp"
#include "granalign/eval.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& relative) {
    return std::filesystem::path(GRANALIGN_FIXTURES) / relative;
}

struct MetricFixture {
    std::vector<granalign::MomentPrediction> predictions;
    std::vector<granalign::GroundTruth> ground_truth;
    nlohmann::json expected;
};

inline MetricFixture load_metric_fixture() {
    MetricFixture f;
    for (auto& r : granalign::load_qvhighlights(fixture("metrics/ground_truth.jsonl"),
                                                granalign::Split::Val, 0.5)) {
        f.ground_truth.push_back(r.ground_truth);
    }
    f.predictions = granalign::read_predictions(fixture("metrics/predictions.jsonl"));
    std::ifstream in(fixture("metrics/expected.json"));
    f.expected = nlohmann::json::parse(in);
    return f;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace testing_support
