#include "momentum/pipeline.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "momentum/errors.hpp"

namespace momentum::pipeline {
namespace {

namespace fs = std::filesystem;

// Per-player regressors of the randomness/swing fit, in report order.
const std::vector<std::string>& fit_fields() {
    static const std::vector<std::string> fields{
        "ace",        "winner",      "winner_shot_type", "double_fault",
        "unf_err",    "net_pt",      "net_pt_won",       "break_pt",
        "break_pt_won", "distance_run", "speed_mph",      "serve_width",
        "serve_depth", "return_depth"};
    return fields;
}

// The wider indicator set screened in the factor study.
const std::vector<std::string>& factor_fields() {
    static const std::vector<std::string> fields{
        "ace",          "winner",          "winner_shot_type", "double_fault",
        "unf_err",      "net_pt",          "net_pt_won",       "break_pt",
        "break_pt_won", "break_pt_missed", "distance_run",     "speed_mph",
        "serve_width",  "serve_depth",     "return_depth"};
    return fields;
}

void append_warnings(StudyReport& report, const std::vector<std::string>& warnings) {
    report.warnings.insert(report.warnings.end(), warnings.begin(), warnings.end());
}

ingest::MatchDataset load_dataset(const RunConfig& config, StudyReport& report) {
    if (config.input_path.empty()) {
        throw DataError("no input file given");
    }
    ingest::MatchDataset dataset = ingest::parse_match_csv_file(config.input_path);
    append_warnings(report, dataset.warnings);
    return dataset;
}

std::string pick_match(const ingest::MatchDataset& dataset, const RunConfig& config) {
    if (!config.match_id.empty()) return config.match_id;
    if (dataset.match_index.size() == 1) return dataset.match_index.front().match_id;
    throw DataError("input holds " + std::to_string(dataset.match_index.size()) +
                    " matches; choose one with --match");
}

void write_output(const RunConfig& config, StudyReport& report,
                  const std::string& name, const std::string& content) {
    const fs::path dir = config.out_dir.empty() ? fs::path(".") : fs::path(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write output file '" + path.string() + "'");
    }
    out << content;
    if (!out) {
        throw DataError("failed writing output file '" + path.string() + "'");
    }
    report.outputs.push_back(name);
}

// Feature-table rows come from build_features with rows dropped; map labels
// for the retained rows via source_rows.
std::vector<int> aligned_labels(const FeatureTable& table,
                                const std::vector<int>& full_labels) {
    std::vector<int> labels;
    labels.reserve(table.row_count());
    for (std::size_t src : table.source_rows) {
        labels.push_back(full_labels[src]);
    }
    return labels;
}

std::vector<int> sides_for(const ingest::MatchDataset& dataset,
                           const std::string& selector) {
    std::vector<int> sides(dataset.records.size(), 1);
    std::size_t row = 0;
    for (const auto& match : dataset.match_index) {
        const int side = ingest::resolve_player(match, selector);
        for (std::size_t i = 0; i < match.point_count; ++i) sides[row++] = side;
    }
    return sides;
}

// Leading on sets, ties broken by games in the current set, then by total
// points; all-equal counts as not in advantage.
bool in_advantage(const ingest::PointRecord& rec, int side) {
    const int ds = side == 1 ? rec.p1_sets - rec.p2_sets : rec.p2_sets - rec.p1_sets;
    if (ds != 0) return ds > 0;
    const int dg = side == 1 ? rec.p1_games - rec.p2_games : rec.p2_games - rec.p1_games;
    if (dg != 0) return dg > 0;
    const int dp = side == 1 ? rec.p1_points_won - rec.p2_points_won
                             : rec.p2_points_won - rec.p1_points_won;
    return dp > 0;
}

nlohmann::ordered_json fingerprint_json(const Fingerprint& fp) {
    return {{"rows_in", fp.rows_in},
            {"rows_used", fp.rows_used},
            {"rows_dropped", fp.rows_dropped}};
}

nlohmann::ordered_json momentum_json(const topsis::MomentumSeries& series) {
    nlohmann::ordered_json players = nlohmann::ordered_json::array();
    for (std::size_t side = 0; side < 2; ++side) {
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (const auto& pt : series.players[side]) {
            points.push_back({{"elapsed_seconds", pt.elapsed_seconds},
                              {"set_no", pt.set_no},
                              {"game_no", pt.game_no},
                              {"point_no", pt.point_no},
                              {"closeness", pt.closeness},
                              {"points_won", pt.points_won}});
        }
        players.push_back({{"player", side + 1},
                           {"name", series.player_names[side]},
                           {"points", std::move(points)}});
    }
    return {{"match_id", series.match_id}, {"players", std::move(players)}};
}

std::string encoding_name(ingest::CategoricalEncoding e) {
    return e == ingest::CategoricalEncoding::Dummy ? "dummy" : "ordinal";
}

}  // namespace

nlohmann::ordered_json to_json(const StudyReport& report, const RunConfig& config) {
    nlohmann::ordered_json out;
    out["study"] = report.study;

    nlohmann::ordered_json cfg;
    cfg["input"] = config.input_path;
    if (!config.match_id.empty()) cfg["match"] = config.match_id;
    cfg["player"] = config.player;
    if (config.set_no != 0) cfg["set"] = config.set_no;
    if (report.study == "momentum") {
        cfg["weights"] = config.weights;
    }
    if (report.study == "randomness" || report.study == "swing") {
        cfg["alpha"] = config.train.alpha;
        cfg["max_iterations"] = config.train.max_iterations;
        cfg["tolerance"] = config.train.tolerance;
        cfg["cutoff"] = config.train.cutoff;
    }
    if (report.study == "randomness") {
        cfg["non_random_threshold"] = config.non_random_threshold;
    }
    if (report.study == "swing") {
        cfg["train_matches"] = config.train_matches;
        cfg["test_match"] = config.test_match;
        cfg["key_rule"] = ingest::to_string(config.key_rule);
    }
    if (report.study == "factors") {
        cfg["key_rule"] = ingest::to_string(config.key_rule);
        cfg["p_threshold"] = config.p_threshold;
        cfg["top_k"] = config.top_k;
    }
    if (report.study != "momentum") {
        cfg["encoding"] = encoding_name(config.encoding);
    }
    out["config"] = std::move(cfg);
    out["fingerprint"] = fingerprint_json(report.fingerprint);

    if (report.momentum) {
        out["momentum"] = momentum_json(*report.momentum);
    }
    if (report.inference) {
        out["inference"] = logreg::to_json(*report.inference);
    }
    if (report.confusion) {
        out["confusion"] = logreg::to_json(*report.confusion);
    }
    if (report.study == "randomness") {
        out["non_random"] = report.non_random;
    }
    if (!report.phases.empty()) {
        nlohmann::ordered_json phases = nlohmann::ordered_json::array();
        for (const auto& phase : report.phases) {
            phases.push_back({{"phase", phase.name},
                              {"train_rows", fingerprint_json(phase.train_rows)},
                              {"test_rows", fingerprint_json(phase.test_rows)},
                              {"inference", logreg::to_json(phase.inference)},
                              {"test_confusion", logreg::to_json(phase.test_confusion)}});
        }
        out["phases"] = std::move(phases);
    }
    if (report.correlation) {
        out["correlation"] = stats::to_json(*report.correlation);
    }
    if (!report.selected_variables.empty()) {
        out["selected_variables"] = report.selected_variables;
    }
    if (report.components) {
        out["components"] = stats::to_json(*report.components);
    }
    if (!report.top.empty()) {
        out["top_factors"] = stats::to_json(report.top);
    }
    out["warnings"] = report.warnings;
    out["outputs"] = report.outputs;
    return out;
}

bool emit_chart(const topsis::MomentumSeries& series, int slice, chart::ChartMode mode,
                const std::string& path, std::vector<std::string>* warnings) {
    std::size_t points = 0;
    for (const auto& player : series.players) {
        for (const auto& pt : player) {
            if (slice == 0 || pt.set_no == slice) ++points;
        }
    }
    if (points == 0) {
        if (warnings) {
            warnings->push_back("chart skipped, empty series: " + path);
        }
        return false;
    }
    const std::string svg = chart::momentum_chart(series, slice, mode);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write output file '" + path + "'");
    }
    out << svg;
    return true;
}

void apply_formats(RunConfig& config, const std::string& formats) {
    config.emit_csv = config.emit_json = config.emit_svg = false;
    std::istringstream in(formats);
    std::string token;
    bool any = false;
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        any = true;
        if (token == "csv") {
            config.emit_csv = true;
        } else if (token == "json") {
            config.emit_json = true;
        } else if (token == "svg") {
            config.emit_svg = true;
        } else {
            throw DataError("unknown format '" + token + "' (expected csv, json, svg)");
        }
    }
    if (!any) {
        throw DataError("empty format list (expected csv, json, svg)");
    }
}

StudyReport run_momentum(const RunConfig& config) {
    StudyReport report;
    report.study = "momentum";
    const ingest::MatchDataset dataset = load_dataset(config, report);
    const std::string match_id = pick_match(dataset, config);
    const ingest::MatchDataset match = ingest::filter_match(dataset, match_id);

    const topsis::WeightVector weights(config.weights);
    topsis::MomentumSeries series = topsis::momentum_series(match, weights);
    append_warnings(report, series.warnings);
    report.fingerprint = {match.size(), match.size(), 0};

    if (config.emit_csv) {
        write_output(config, report, "momentum_series.csv", topsis::to_csv(series));
    }
    if (config.emit_svg) {
        const fs::path dir =
            config.out_dir.empty() ? fs::path(".") : fs::path(config.out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        auto chart_file = [&](int slice, const std::string& name) {
            if (emit_chart(series, slice, config.chart_mode, (dir / name).string(),
                           &report.warnings)) {
                report.outputs.push_back(name);
            }
        };
        if (config.set_no == 0) {
            chart_file(0, "momentum_match.svg");
            std::set<int> sets;
            for (const auto& rec : match.records) sets.insert(rec.set_no);
            for (int s : sets) {
                chart_file(s, "momentum_set_" + std::to_string(s) + ".svg");
            }
        } else {
            chart_file(config.set_no,
                       "momentum_set_" + std::to_string(config.set_no) + ".svg");
        }
    }
    report.momentum = std::move(series);
    if (config.emit_json) {
        report.outputs.push_back("momentum_report.json");
        write_output(config, report, "momentum_report.json",
                     to_json(report, config).dump(2) + "\n");
        report.outputs.pop_back();  // write_output appended the duplicate
    }
    return report;
}

StudyReport run_randomness(const RunConfig& config) {
    StudyReport report;
    report.study = "randomness";
    const ingest::MatchDataset dataset = load_dataset(config, report);
    const std::string match_id = pick_match(dataset, config);
    ingest::MatchDataset subset = ingest::filter_match(dataset, match_id);
    if (config.set_no != 0) {
        subset = ingest::filter_set(subset, config.set_no);
        if (subset.empty()) {
            throw DataError("match '" + match_id + "' has no set " +
                            std::to_string(config.set_no));
        }
    }
    const int side = ingest::resolve_player(subset, config.player);

    const FeatureTable table =
        ingest::build_features(subset, fit_fields(), side, config.encoding,
                               ingest::MissingPolicy::Drop);
    append_warnings(report, table.warnings);
    report.fingerprint = {table.input_rows, table.row_count(), table.masked_rows};

    const std::vector<int> labels =
        aligned_labels(table, ingest::point_labels(subset, side));
    const logreg::LogisticModel model = logreg::fit(table, labels, config.train);
    append_warnings(report, model.warnings);

    logreg::InferenceTable inference = logreg::wald_inference(model, table, labels);
    append_warnings(report, inference.warnings);
    const logreg::ConfusionMatrix cm =
        logreg::confusion(model, table, labels, config.train.cutoff);
    report.non_random = cm.overall_pct() > config.non_random_threshold;

    report.inference = std::move(inference);
    report.confusion = cm;

    if (config.emit_csv) {
        write_output(config, report, "randomness_inference.csv",
                     logreg::to_csv(*report.inference));
        write_output(config, report, "randomness_confusion.csv", logreg::to_csv(cm));
    }
    if (config.emit_json) {
        report.outputs.push_back("randomness_report.json");
        write_output(config, report, "randomness_report.json",
                     to_json(report, config).dump(2) + "\n");
        report.outputs.pop_back();
    }
    return report;
}

StudyReport run_swing(const RunConfig& config) {
    StudyReport report;
    report.study = "swing";
    if (config.train_matches.empty() || config.test_match.empty()) {
        throw DataError("swing needs --train <ids> and --test <id>");
    }
    const ingest::MatchDataset dataset = load_dataset(config, report);
    for (const auto& id : config.train_matches) {
        if (dataset.find_match(id) == nullptr) {
            throw DataError("unknown match id '" + id + "'");
        }
        if (id == config.test_match) {
            throw DataError("match '" + id + "' appears in both --train and --test");
        }
    }
    if (dataset.find_match(config.test_match) == nullptr) {
        throw DataError("unknown match id '" + config.test_match + "'");
    }

    // One combined key-game dataset keeps dummy levels consistent between the
    // training and test rows; the split happens on feature rows.
    std::vector<char> keep(dataset.records.size(), 0);
    std::set<std::string> wanted(config.train_matches.begin(),
                                 config.train_matches.end());
    wanted.insert(config.test_match);
    {
        std::size_t row = 0;
        for (const auto& match : dataset.match_index) {
            const bool use = wanted.count(match.match_id) > 0;
            for (std::size_t i = 0; i < match.point_count; ++i, ++row) {
                keep[row] = use ? 1 : 0;
            }
        }
    }
    ingest::MatchDataset pool;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        if (keep[i]) pool.records.push_back(dataset.records[i]);
    }
    {
        // rebuild the match index of the pooled subset
        std::size_t row = 0;
        for (const auto& match : dataset.match_index) {
            if (wanted.count(match.match_id) == 0) continue;
            ingest::MatchInfo info = match;
            info.first_row = row;
            row += match.point_count;
            pool.match_index.push_back(info);
        }
    }

    const ingest::MatchDataset key = ingest::select_key_games(pool, config.key_rule);
    if (key.empty()) {
        throw DataError("no key games under rule '" + ingest::to_string(config.key_rule) +
                        "'; relax --key-rule (for example games>=4 or all)");
    }
    const std::vector<int> sides = sides_for(key, config.player);
    const std::vector<int> labels_all = ingest::point_labels(key, sides);

    const FeatureTable table = ingest::build_features(
        key, fit_fields(), sides, config.encoding, ingest::MissingPolicy::Drop);
    append_warnings(report, table.warnings);
    report.fingerprint = {table.input_rows, table.row_count(), table.masked_rows};

    const std::set<std::string> train_ids(config.train_matches.begin(),
                                          config.train_matches.end());
    auto record_class = [&](std::size_t record_idx) {
        // 0 train/advantage, 1 train/disadvantage, 2 test/advantage, 3 test/dis.
        const ingest::PointRecord& rec = key.records[record_idx];
        const bool advantage = in_advantage(rec, sides[record_idx]);
        const bool train = train_ids.count(rec.match_id) > 0;
        return (train ? 0 : 2) + (advantage ? 0 : 1);
    };

    std::array<Fingerprint, 4> split_rows{};
    for (std::size_t i = 0; i < key.records.size(); ++i) {
        split_rows[static_cast<std::size_t>(record_class(i))].rows_in += 1;
    }
    std::array<std::vector<std::size_t>, 4> split_feature_rows;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const int cls = record_class(table.source_rows[r]);
        split_feature_rows[static_cast<std::size_t>(cls)].push_back(r);
        split_rows[static_cast<std::size_t>(cls)].rows_used += 1;
    }
    for (auto& fp : split_rows) {
        fp.rows_dropped = fp.rows_in - fp.rows_used;
    }

    auto slice_table = [&](const std::vector<std::size_t>& rows) {
        FeatureTable t;
        t.columns = table.columns;
        t.input_rows = rows.size();
        for (std::size_t r : rows) {
            t.rows.push_back(table.rows[r]);
            t.source_rows.push_back(table.source_rows[r]);
        }
        return t;
    };
    auto slice_labels = [&](const std::vector<std::size_t>& rows) {
        std::vector<int> labels;
        for (std::size_t r : rows) {
            labels.push_back(labels_all[table.source_rows[r]]);
        }
        return labels;
    };

    const char* phase_names[2] = {"advantage", "disadvantage"};
    for (int phase = 0; phase < 2; ++phase) {
        const auto& train_rows = split_feature_rows[static_cast<std::size_t>(phase)];
        const auto& test_rows = split_feature_rows[static_cast<std::size_t>(2 + phase)];
        if (train_rows.empty()) {
            report.warnings.push_back(std::string("phase '") + phase_names[phase] +
                                      "' has no training rows; skipped");
            continue;
        }
        const FeatureTable train_table = slice_table(train_rows);
        const std::vector<int> train_labels = slice_labels(train_rows);

        SwingPhase result;
        result.name = phase_names[phase];
        result.train_rows = split_rows[static_cast<std::size_t>(phase)];
        result.test_rows = split_rows[static_cast<std::size_t>(2 + phase)];

        const logreg::LogisticModel model =
            logreg::fit(train_table, train_labels, config.train);
        append_warnings(report, model.warnings);
        result.inference = logreg::wald_inference(model, train_table, train_labels);
        append_warnings(report, result.inference.warnings);

        if (!test_rows.empty()) {
            const FeatureTable test_table = slice_table(test_rows);
            const std::vector<int> test_labels = slice_labels(test_rows);
            result.test_confusion = logreg::confusion(model, test_table, test_labels,
                                                      config.train.cutoff);
        } else {
            report.warnings.push_back(std::string("phase '") + phase_names[phase] +
                                      "' has no test rows");
        }
        report.phases.push_back(std::move(result));
    }
    if (report.phases.empty()) {
        throw DataError("no phase had training rows; relax --key-rule");
    }

    if (config.emit_csv) {
        for (const auto& phase : report.phases) {
            write_output(config, report, "swing_" + phase.name + "_inference.csv",
                         logreg::to_csv(phase.inference));
            write_output(config, report, "swing_" + phase.name + "_confusion.csv",
                         logreg::to_csv(phase.test_confusion));
        }
    }
    if (config.emit_svg) {
        const ingest::MatchDataset test_match =
            ingest::filter_match(dataset, config.test_match);
        const topsis::WeightVector weights(config.weights);
        const topsis::MomentumSeries test_series =
            topsis::momentum_series(test_match, weights);
        append_warnings(report, test_series.warnings);
        const fs::path dir =
            config.out_dir.empty() ? fs::path(".") : fs::path(config.out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        const std::string name = "swing_test_match.svg";
        if (emit_chart(test_series, 0, config.chart_mode, (dir / name).string(),
                       &report.warnings)) {
            report.outputs.push_back(name);
        }
    }
    if (config.emit_json) {
        report.outputs.push_back("swing_report.json");
        write_output(config, report, "swing_report.json",
                     to_json(report, config).dump(2) + "\n");
        report.outputs.pop_back();
    }
    return report;
}

StudyReport run_factors(const RunConfig& config) {
    StudyReport report;
    report.study = "factors";
    const ingest::MatchDataset dataset = load_dataset(config, report);
    ingest::MatchDataset subset =
        config.match_id.empty() ? dataset : ingest::filter_match(dataset, config.match_id);
    if (config.set_no != 0) {
        subset = ingest::filter_set(subset, config.set_no);
        if (subset.empty()) {
            throw DataError("no rows in set " + std::to_string(config.set_no));
        }
    }
    subset = ingest::select_key_games(subset, config.key_rule);
    if (subset.empty()) {
        throw DataError("no key games under rule '" + ingest::to_string(config.key_rule) +
                        "'; relax --key-rule (for example all)");
    }

    const std::vector<int> sides = sides_for(subset, config.player);
    FeatureTable table = ingest::build_features(
        subset, factor_fields(), sides, config.encoding, ingest::MissingPolicy::Keep);
    append_warnings(report, table.warnings);

    // The target column joins the table so the correlation report covers it.
    const std::vector<int> labels = ingest::point_labels(subset, sides);
    FeatureColumn target;
    target.name = "point_victor";
    target.source = "point_victor";
    target.origin = ColumnOrigin::Raw;
    table.columns.push_back(target);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        table.rows[i].push_back(static_cast<double>(labels[table.source_rows[i]]));
    }

    stats::CorrelationReport corr = stats::correlation_matrix(table, "point_victor");
    append_warnings(report, corr.warnings);

    for (const auto& entry : corr.target_ranking) {
        if (entry.defined && entry.p <= config.p_threshold) {
            report.selected_variables.push_back(entry.variable);
        }
    }
    // Restore table order for the component analysis input.
    {
        std::vector<std::string> ordered;
        for (const auto& col : table.columns) {
            if (std::find(report.selected_variables.begin(),
                          report.selected_variables.end(),
                          col.name) != report.selected_variables.end()) {
                ordered.push_back(col.name);
            }
        }
        report.selected_variables = std::move(ordered);
    }
    if (report.selected_variables.empty()) {
        std::ostringstream msg;
        msg << "no variable passes p <= " << config.p_threshold
            << " against point_victor; raise --p-threshold";
        throw DataError(msg.str());
    }

    stats::PcaResult components = stats::pca(table, report.selected_variables);
    report.fingerprint = {table.input_rows, components.sample_size,
                          table.input_rows - components.sample_size};
    report.top = stats::top_factors(corr, components, config.top_k);
    report.correlation = std::move(corr);
    report.components = std::move(components);

    if (config.emit_csv) {
        write_output(config, report, "factors_rho.csv",
                     stats::rho_csv(*report.correlation));
        write_output(config, report, "factors_p.csv", stats::p_csv(*report.correlation));
        write_output(config, report, "factors_loadings.csv",
                     stats::loadings_csv(*report.components));
        write_output(config, report, "factors_top.csv", stats::to_csv(report.top));
    }
    if (config.emit_json) {
        report.outputs.push_back("factors_report.json");
        write_output(config, report, "factors_report.json",
                     to_json(report, config).dump(2) + "\n");
        report.outputs.pop_back();
    }
    return report;
}

}  // namespace momentum::pipeline
