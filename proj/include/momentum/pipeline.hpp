#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "momentum/chart.hpp"
#include "momentum/ingest.hpp"
#include "momentum/logreg.hpp"
#include "momentum/stats.hpp"
#include "momentum/topsis.hpp"

namespace momentum::pipeline {

struct RunConfig {
    std::string input_path;
    std::string match_id;     // empty = all matches (factors only)
    std::string player = "1"; // 1 | 2 | exact name
    int set_no = 0;           // 0 = all sets
    std::vector<double> weights = {0.4, 0.25, 0.2, 0.15};
    logreg::TrainConfig train;
    ingest::KeyGameRule key_rule;
    ingest::CategoricalEncoding encoding = ingest::CategoricalEncoding::Dummy;
    double non_random_threshold = 70.0;  // percent correct
    double p_threshold = 0.05;           // factor selection vs the target column
    std::size_t top_k = 3;
    std::string out_dir;
    bool emit_csv = true;
    bool emit_json = true;
    bool emit_svg = true;
    chart::ChartMode chart_mode = chart::ChartMode::Closeness;
    std::vector<std::string> train_matches;  // swing
    std::string test_match;                  // swing
};

struct Fingerprint {
    std::size_t rows_in = 0;
    std::size_t rows_used = 0;
    std::size_t rows_dropped = 0;
};

struct SwingPhase {
    std::string name;  // "advantage" | "disadvantage"
    Fingerprint train_rows;
    Fingerprint test_rows;
    logreg::InferenceTable inference;
    logreg::ConfusionMatrix test_confusion;
};

struct StudyReport {
    std::string study;
    Fingerprint fingerprint;
    std::vector<std::string> warnings;  // every flag raised by any sub-module
    std::vector<std::string> outputs;   // files written, relative to out_dir

    std::optional<topsis::MomentumSeries> momentum;
    std::optional<logreg::InferenceTable> inference;
    std::optional<logreg::ConfusionMatrix> confusion;
    bool non_random = false;
    std::vector<SwingPhase> phases;
    std::optional<stats::CorrelationReport> correlation;
    std::optional<stats::PcaResult> components;
    std::vector<stats::RankedFactor> top;
    std::vector<std::string> selected_variables;
};

nlohmann::ordered_json to_json(const StudyReport& report, const RunConfig& config);

StudyReport run_momentum(const RunConfig& config);
StudyReport run_randomness(const RunConfig& config);
StudyReport run_swing(const RunConfig& config);
StudyReport run_factors(const RunConfig& config);

// Writes one chart file; returns false (with a warning) on an empty series.
bool emit_chart(const topsis::MomentumSeries& series, int slice, chart::ChartMode mode,
                const std::string& path, std::vector<std::string>* warnings);

// Parses "csv,json,svg" into the emit_* flags.
void apply_formats(RunConfig& config, const std::string& formats);

}  // namespace momentum::pipeline
