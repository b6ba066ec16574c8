#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "momentum/errors.hpp"
#include "momentum/pipeline.hpp"

namespace {

using momentum::pipeline::RunConfig;
using momentum::pipeline::StudyReport;

void print_summary(const StudyReport& report, const RunConfig& config) {
    if (report.study == "momentum" && report.momentum) {
        std::printf("match %s: %zu points per player\n",
                    report.momentum->match_id.c_str(),
                    report.momentum->players[0].size());
    } else if (report.study == "randomness" && report.confusion) {
        std::printf("overall percent correct: %.1f (threshold %.1f) -> %s\n",
                    report.confusion->overall_pct(), config.non_random_threshold,
                    report.non_random ? "non-random" : "inconclusive");
    } else if (report.study == "swing") {
        for (const auto& phase : report.phases) {
            std::printf("phase %s: %zu train rows, %zu test rows, overall %.1f%%\n",
                        phase.name.c_str(), phase.train_rows.rows_used,
                        phase.test_rows.rows_used,
                        phase.test_confusion.overall_pct());
        }
    } else if (report.study == "factors") {
        std::printf("selected %zu variables", report.selected_variables.size());
        if (!report.top.empty()) {
            std::printf("; top factors:");
            for (const auto& f : report.top) {
                std::printf(" %s", f.variable.c_str());
            }
        }
        std::printf("\n");
    }
    for (const auto& warning : report.warnings) {
        std::printf("warning: %s\n", warning.c_str());
    }
    std::printf("wrote %zu file(s) to %s\n", report.outputs.size(),
                config.out_dir.empty() ? "." : config.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-by-point tennis match analytics: TOPSIS momentum series, "
                 "0-1 logistic regression, and factor screening"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file supplying any flag; flags override");

    RunConfig config;
    std::string format = "csv,json,svg";
    std::string key_rule;
    std::string encoding;
    bool raw_chart = false;

    auto add_common = [&](CLI::App* sub, bool with_set) {
        sub->add_option("--input", config.input_path, "point-by-point CSV file")
            ->required();
        sub->add_option("--match", config.match_id,
                        "match id (defaults to the file's only match)");
        sub->add_option("--player", config.player, "1, 2, or exact player name");
        if (with_set) {
            sub->add_option("--set", config.set_no, "restrict to one set (0 = all)");
        }
        sub->add_option("--out", config.out_dir, "output directory (default: current)");
        sub->add_option("--format", format, "comma list out of csv,json,svg");
    };
    auto add_train = [&](CLI::App* sub) {
        sub->add_option("--alpha", config.train.alpha, "gradient-descent learning rate");
        sub->add_option("--max-iter", config.train.max_iterations, "iteration cap");
        sub->add_option("--tol", config.train.tolerance,
                        "convergence tolerance on the loss decrease");
        sub->add_option("--cutoff", config.train.cutoff, "classification threshold");
        sub->add_option("--encoding", encoding,
                        "categorical encoding: dummy or ordinal");
    };

    CLI::App* cmd_momentum = app.add_subcommand(
        "momentum", "TOPSIS closeness series and charts for one match");
    add_common(cmd_momentum, true);
    cmd_momentum
        ->add_option("--weights", config.weights,
                     "four criteria weights (sets, games, points, server)")
        ->delimiter(',');
    cmd_momentum->add_flag("--raw", raw_chart, "chart cumulative points, not closeness");

    CLI::App* cmd_randomness = app.add_subcommand(
        "randomness", "point-outcome regression for one player and subset");
    add_common(cmd_randomness, true);
    add_train(cmd_randomness);
    cmd_randomness->add_option("--threshold", config.non_random_threshold,
                               "percent-correct bar for the non-random verdict");

    CLI::App* cmd_swing = app.add_subcommand(
        "swing", "per-phase fit on key games, evaluated on a held-out match");
    add_common(cmd_swing, false);
    add_train(cmd_swing);
    cmd_swing->add_option("--train", config.train_matches, "training match ids")
        ->delimiter(',');
    cmd_swing->add_option("--test", config.test_match, "held-out match id");
    cmd_swing->add_option("--key-rule", key_rule,
                          "break_pt | games>=N | all (comma/plus separated)");
    cmd_swing->add_flag("--raw", raw_chart, "chart cumulative points, not closeness");

    CLI::App* cmd_factors = app.add_subcommand(
        "factors", "correlation screen plus component analysis of indicators");
    add_common(cmd_factors, true);
    cmd_factors->add_option("--key-rule", key_rule,
                            "break_pt | games>=N | all (default all)");
    cmd_factors->add_option("--encoding", encoding,
                            "categorical encoding: dummy or ordinal (default ordinal)");
    cmd_factors->add_option("--p-threshold", config.p_threshold,
                            "keep variables with target p below this");
    cmd_factors->add_option("--top", config.top_k, "how many top factors to report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    // Flag-value normalization; mistakes here are usage errors.
    try {
        momentum::pipeline::apply_formats(config, format);
        if (config.weights.size() != 4) {
            throw momentum::DataError("--weights needs exactly four values");
        }
        if (config.set_no < 0) {
            throw momentum::DataError("--set must be >= 0");
        }
        if (!key_rule.empty()) {
            config.key_rule = momentum::ingest::parse_key_rule(key_rule);
        } else if (cmd_factors->parsed()) {
            config.key_rule.select_all = true;
        }
        if (encoding.empty()) {
            config.encoding = cmd_factors->parsed()
                                  ? momentum::ingest::CategoricalEncoding::Ordinal
                                  : momentum::ingest::CategoricalEncoding::Dummy;
        } else if (encoding == "dummy") {
            config.encoding = momentum::ingest::CategoricalEncoding::Dummy;
        } else if (encoding == "ordinal") {
            config.encoding = momentum::ingest::CategoricalEncoding::Ordinal;
        } else {
            throw momentum::DataError("--encoding must be dummy or ordinal");
        }
        config.chart_mode = raw_chart ? momentum::chart::ChartMode::RawPoints
                                      : momentum::chart::ChartMode::Closeness;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    try {
        StudyReport report;
        if (cmd_momentum->parsed()) {
            report = momentum::pipeline::run_momentum(config);
        } else if (cmd_randomness->parsed()) {
            report = momentum::pipeline::run_randomness(config);
        } else if (cmd_swing->parsed()) {
            report = momentum::pipeline::run_swing(config);
        } else {
            report = momentum::pipeline::run_factors(config);
        }
        print_summary(report, config);
        return 0;
    } catch (const momentum::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const momentum::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
